#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "asns/config.hpp"
#include "asns/run.hpp"
#include "doctest.h"

using namespace asns;
namespace fs = std::filesystem;

namespace {

std::string cli() {
    const char* p = std::getenv("ASNS_CLI");
    return p ? p : "";
}

fs::path scratch(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("asns_test_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

int run(const std::string& args, const fs::path& log) {
    const std::string cmd = "\"" + cli() + "\" " + args + " > \"" + log.string() + "\" 2>&1";
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

void write(const fs::path& p, const std::string& text) {
    std::ofstream f(p);
    f << text;
}

}  // namespace

TEST_CASE("minimal config uses defaults and computes tau") {
    const RunConfig c = parse_config("nu = -1\nmu = 0\n");
    CHECK(c.solver.k_max == 8);
    CHECK(c.solver.n_radial == 1024);
    CHECK(c.tau.tau == doctest::Approx(0.5));
}

TEST_CASE("hypothesis violations are rejected with the broken condition") {
    CHECK_THROWS_WITH_AS(parse_config("nu = -1\nlambda_theta = 3\n"), doctest::Contains("lambda_theta > 3 required"),
                         ConfigError);
    CHECK_THROWS_WITH(parse_config("nu = -1\nlambda_z = 2\n"), doctest::Contains("lambda_z > 2 required"));
    CHECK_THROWS_WITH(parse_config("nu = -1\nlambda = 1.5\n"), doctest::Contains("lambda > 3/2 required"));
    CHECK_THROWS_WITH(parse_config("nu = 0.5\n"), doctest::Contains("nu < 0 required"));
    CHECK_THROWS_WITH(parse_config("nu = -1\nboundary = r 0 0.1\n"), doctest::Contains("g_{r,0} = 0"));
    CHECK_THROWS_WITH(parse_config("nu = -1\nforcing = theta 0 power_decay(1e-3, 3.5)\n"),
                      doctest::Contains("slower than lambda_theta"));
}

TEST_CASE("parse errors carry line numbers") {
    try {
        parse_config("nu = -1\n\n# comment\nk_max = eight\n");
        FAIL("expected a parse error");
    } catch (const ConfigError& e) {
        CHECK(e.line() == 4);
        CHECK(std::string(e.what()).find("line 4") != std::string::npos);
    }
    CHECK_THROWS_WITH(parse_config("nu = -1\nbogus = 3\n"), doctest::Contains("line 2: unknown key"));
    CHECK_THROWS_WITH(parse_config("nu = -1\nnu = -2\n"), doctest::Contains("duplicate"));
    CHECK_THROWS_WITH(parse_config("nu -1\n"), doctest::Contains("line 1"));
    CHECK_THROWS_WITH(parse_config("nu = -1\nforcing = theta 1 gaussian(1, 2)\n"), doctest::Contains("line 2"));
}

TEST_CASE("render and parse round trip") {
    const RunConfig a = parse_config(
        "nu = -3\nmu = 0.1\nk_max = 6\nr_max = 80\nn_radial = 512\nlambda_theta = 10\nlambda_z = 10\nlambda = 10\n"
        "boundary = theta 1 0.001 -0.0002\nboundary = z 0 0.3\n"
        "forcing = z 2 power_exp_decay(0.0001, 1.5, 0.7)\nforcing = theta 0 power_decay(0.1, 11)\n"
        "output_dir = out dir\n");
    const RunConfig b = parse_config(render_config(a));
    CHECK(a.same_settings(b));
    CHECK(render_config(a) == render_config(b));
    CHECK(b.output_dir == "out dir");
    CHECK(b.boundary_data().get(Component::theta, -1) == cplx(0.001, 0.0002));
}

TEST_CASE("CLI: solve on zero data") {
    REQUIRE(!cli().empty());
    const fs::path d = scratch("zero");
    write(d / "c.ini", "nu = -1\nk_max = 2\nn_radial = 128\nr_max = 30\n");
    CHECK(run("solve -c " + (d / "c.ini").string() + " -o " + (d / "out").string(), d / "log") == 0);
    const std::string s = slurp(d / "out" / "summary.txt");
    CHECK(s.find("zero_solution: true") != std::string::npos);
    CHECK(s.find("iterations: 1\n") != std::string::npos);
    CHECK(fs::exists(d / "out" / "mode_0.csv"));
    CHECK(fs::exists(d / "out" / "mode_2.csv"));
    CHECK(fs::exists(d / "out" / "residuals.csv"));
    fs::remove_all(d);
}

TEST_CASE("CLI: nonunique refuses nu >= -2") {
    const fs::path d = scratch("nonu");
    write(d / "c.ini", "nu = -1\nk_max = 2\nn_radial = 128\nr_max = 30\n");
    CHECK(run("nonunique -c " + (d / "c.ini").string() + " -o " + (d / "out").string(), d / "log") == 1);
    CHECK(slurp(d / "log").find("nu < -2") != std::string::npos);
    fs::remove_all(d);
}

TEST_CASE("CLI: exit codes for config and io failures") {
    const fs::path d = scratch("codes");
    write(d / "bad.ini", "nu = -1\nlambda_theta = 3\n");
    CHECK(run("solve -c " + (d / "bad.ini").string(), d / "log") == 1);
    CHECK(slurp(d / "log").find("lambda_theta > 3 required") != std::string::npos);
    CHECK(run("solve -c " + (d / "missing.ini").string(), d / "log") == 4);
    CHECK(run("verify " + (d / "nowhere").string(), d / "log") == 4);
    CHECK(run("frobnicate", d / "log") == 1);
    fs::remove_all(d);
}

TEST_CASE("CLI: verify passes on a solve and flags a tampered mode file") {
    const fs::path d = scratch("verify");
    write(d / "c.ini",
          "nu = -3\nmu = 1\nk_max = 4\nn_radial = 512\nr_max = 40\nboundary = theta 1 0.001\n"
          "boundary = z 2 0 0.0005\n");
    const fs::path out = d / "out";
    REQUIRE(run("solve -c " + (d / "c.ini").string() + " -o " + out.string(), d / "log") == 0);
    CHECK(run("verify " + out.string(), d / "log") == 0);
    CHECK(slurp(d / "log").find("verify: pass") != std::string::npos);

    // overwrite v_z of mode 1 at one interior node
    std::ifstream in(out / "mode_1.csv");
    std::ostringstream edited;
    std::string line;
    int row = 0;
    while (std::getline(in, line)) {
        if (row == 150) {
            std::stringstream ss(line);
            std::vector<std::string> cells;
            for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
            std::ostringstream v;
            v.precision(17);
            v << std::stod(cells[5]) + 1e-5;
            cells[5] = v.str();
            line.clear();
            for (size_t i = 0; i < cells.size(); ++i) line += (i ? "," : "") + cells[i];
        }
        edited << line << '\n';
        ++row;
    }
    in.close();
    write(out / "mode_1.csv", edited.str());
    CHECK(run("verify " + out.string(), d / "log") == 2);
    CHECK(slurp(d / "log").find("FAIL") != std::string::npos);
    fs::remove_all(d);
}

TEST_CASE("CLI: oracle and bessel tables") {
    const fs::path d = scratch("tables");
    write(d / "c.ini", "nu = -3\nn_radial = 512\nr_max = 100\n");
    CHECK(run("oracle -c " + (d / "c.ini").string() + " -o " + d.string(), d / "log") == 0);
    CHECK(fs::exists(d / "oracle.csv"));
    CHECK(run("bessel -o " + d.string(), d / "log") == 0);
    const std::string b = slurp(d / "bessel.csv");
    CHECK(std::count(b.begin(), b.end(), '\n') == 1001);
    fs::remove_all(d);
}
