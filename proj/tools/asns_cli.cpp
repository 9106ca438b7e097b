// Command line front end: asns <command> --config <file> [options]

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "asns/config.hpp"
#include "asns/run.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Stationary axisymmetric Navier-Stokes flows past a cylinder, periodic in z"};
    app.require_subcommand(1);

    std::string config_path;
    std::string output_dir;
    int threads = 0;
    bool quiet = false;
    std::string solution_dir;
    double tolerance = 1e-6;

    auto add_common = [&](CLI::App* sub, bool needs_config) {
        auto* opt = sub->add_option("-c,--config", config_path, "configuration file");
        if (needs_config) opt->required();
        sub->add_option("-o,--output", output_dir, "output directory (overrides output_dir)");
        sub->add_option("-t,--threads", threads, "worker threads (overrides threads and ASNS_THREADS)")
            ->check(CLI::NonNegativeNumber);
        sub->add_flag("-q,--quiet", quiet, "suppress progress output");
    };
    add_common(app.add_subcommand("solve", "Picard solve; writes modes, residuals and summary"), true);
    auto* verify = app.add_subcommand("verify", "re-check a solution directory written by solve");
    add_common(verify, false);
    verify->add_option("solution_dir", solution_dir, "directory written by solve")->required();
    verify->add_option("--tolerance", tolerance, "momentum residual bound");
    add_common(app.add_subcommand("nonunique", "two solutions for nu < -2 by perturbing mu"), true);
    add_common(app.add_subcommand("bessel", "tabulate I_a, K_a and the Wronskian defect"), false);
    add_common(app.add_subcommand("oracle", "linear-mode solvers against closed-form solutions"), false);
    add_common(app.add_subcommand("calibrate", "empirical smallness threshold by bisection"), true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : static_cast<int>(asns::ExitCode::config);
    }

    const std::string command = app.get_subcommands().front()->get_name();
    asns::RunConfig cfg;
    try {
        if (!config_path.empty()) {
            cfg = asns::load_config(config_path);
        } else if (command == "verify") {
            cfg = asns::read_solution(solution_dir).cfg;
        } else {
            asns::validate_config(cfg);
        }
    } catch (const asns::ConfigError& e) {
        std::cerr << "error[config]: " << e.what() << '\n';
        return static_cast<int>(asns::ExitCode::config);
    } catch (const std::exception& e) {
        std::cerr << "error[io]: " << e.what() << '\n';
        return static_cast<int>(asns::ExitCode::io);
    }

    asns::RunOptions opts;
    if (threads > 0) opts.threads = threads;
    if (!output_dir.empty()) opts.output_dir = output_dir;
    opts.solution_dir = solution_dir;
    opts.verify_tolerance = tolerance;
    opts.quiet = quiet;
    return static_cast<int>(asns::run_command(command, cfg, opts, std::cout, std::cerr));
}
