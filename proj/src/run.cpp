#include "asns/run.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <ostream>
#include <sstream>

#include "asns/linear_modes.hpp"
#include "asns/special_functions.hpp"

namespace asns {

namespace fs = std::filesystem;

const char* exit_class(ExitCode c) {
    switch (c) {
        case ExitCode::ok: return "ok";
        case ExitCode::config: return "config";
        case ExitCode::numeric: return "numeric";
        case ExitCode::convergence: return "convergence";
        case ExitCode::io: return "io";
    }
    return "?";
}

ResidualOptions default_residual_options() { return {}; }

namespace {

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::ofstream open_out(const fs::path& p) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw IoError("cannot write " + p.string());
    return f;
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

void write_modes(const fs::path& dir, const RadialGrid& grid, const SolutionBundle& b) {
    const FourierField& v = b.v;
    for (int k = 0; k <= v.k_max(); ++k) {
        std::ofstream f = open_out(dir / ("mode_" + std::to_string(k) + ".csv"));
        f << "r,re_v_r,im_v_r,re_v_theta,im_v_theta,re_v_z,im_v_z,re_w,im_w,re_phi,im_phi\n";
        const CVec vt = k == 0 ? v.swirl_zero_total(grid).values : v.at(Component::theta, k).values;
        const CVec& vr = v.at(Component::r, k).values;
        const CVec& vz = v.at(Component::z, k).values;
        const auto ku = static_cast<size_t>(k);
        const bool aux = ku < b.stream.w.size();
        for (int i = 0; i < grid.size(); ++i) {
            const auto u = static_cast<size_t>(i);
            const cplx w = aux ? b.stream.w[ku][u] : cplx{};
            const cplx ph = aux ? b.stream.phi[ku][u] : cplx{};
            f << num(grid.r(i)) << ',' << num(vr[u].real()) << ',' << num(vr[u].imag()) << ','
              << num(vt[u].real()) << ',' << num(vt[u].imag()) << ',' << num(vz[u].real()) << ','
              << num(vz[u].imag()) << ',' << num(w.real()) << ',' << num(w.imag()) << ',' << num(ph.real())
              << ',' << num(ph.imag()) << '\n';
        }
        if (!f) throw IoError("write failed for mode " + std::to_string(k));
    }
}

void write_residuals(const fs::path& dir, const ResidualReport& rep) {
    std::ofstream f = open_out(dir / "residuals.csv");
    f << "r,momentum_r,momentum_theta,momentum_z,curl_rz,divergence\n";
    for (const auto& row : rep.curve) {
        f << num(row.r) << ',' << num(row.momentum_r) << ',' << num(row.momentum_theta) << ','
          << num(row.momentum_z) << ',' << num(row.curl_rz) << ',' << num(row.divergence) << '\n';
    }
}

void write_region(std::ostream& os, const std::string& name, const RegionResidual& r) {
    os << "residual_" << name << "_momentum_r: " << num(r.momentum_r.value_or(NAN)) << '\n'
       << "residual_" << name << "_momentum_theta: " << num(r.momentum_theta) << '\n'
       << "residual_" << name << "_momentum_z: " << num(r.momentum_z.value_or(NAN)) << '\n'
       << "residual_" << name << "_curl_rz: " << num(r.curl_rz) << '\n'
       << "residual_" << name << "_divergence: " << num(r.divergence) << '\n';
}

void write_report_lines(std::ostream& os, const ResidualReport& rep) {
    os << "residual_r_split: " << num(rep.r_split) << '\n';
    write_region(os, "inner", rep.inner);
    write_region(os, "outer", rep.outer);
    os << "boundary_mismatch: " << num(rep.max_boundary_mismatch) << '\n'
       << "imag_residue: " << num(rep.imag_residue) << '\n';
    for (const auto& [name, fit] : rep.decay_fits) {
        os << "decay_" << name << ": " << num(fit.exponent) << " r2 " << num(fit.r_squared) << '\n';
    }
}

void write_bundle_lines(std::ostream& os, const SolutionBundle& b) {
    os << "status: " << status_name(b.state.status) << '\n'
       << "iterations: " << b.state.iter << '\n'
       << "contraction_estimate: " << num(b.state.contraction_estimate) << '\n'
       << "tau: " << num(b.tau.tau) << '\n'
       << "lambda_bar_theta: " << num(b.tau.lambda_bar_theta) << '\n'
       << "lambda_bar_z: " << num(b.tau.lambda_bar_z) << '\n'
       << "bnorm: " << num(b.bnorm) << '\n'
       << "vnorm: " << num(b.vnorm) << '\n'
       << "enorm: " << num(b.enorm) << '\n'
       << "c_emp: " << num(b.c_emp) << '\n'
       << "smallness_exceeded: " << (b.smallness_exceeded ? "true" : "false") << '\n'
       << "zero_solution: " << (b.bnorm == 0.0 ? "true" : "false") << '\n'
       << "sigma: " << (b.v.sigma ? num(*b.v.sigma) : std::string("none")) << '\n'
       << "discarded_fr0_max: " << num(b.audit.discarded_fr0_max) << '\n'
       << "truncation_tail: " << num(b.audit.truncation_tail) << '\n';
    os << "diff_history:";
    for (double d : b.state.diff_norm_history) os << ' ' << num(d);
    os << '\n';
    if (!b.state.diagnostic.empty()) os << "diagnostic: " << b.state.diagnostic << '\n';
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    for (std::string t; std::getline(ss, t, ',');) out.push_back(t);
    return out;
}

double parse_cell(const std::string& s, const fs::path& file, int line) {
    try {
        size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw IoError(file.string() + ":" + std::to_string(line) + ": bad number '" + s + "'");
    }
}

SolverConfig with_threads(SolverConfig s, const RunOptions& opts) {
    if (opts.threads) s.threads = *opts.threads;
    return s;
}

ExitCode status_code(const SolutionBundle& b) {
    return b.converged() ? ExitCode::ok : ExitCode::convergence;
}

// Linear-mode checks against closed-form solutions on three resolutions.
void run_oracle(const RunConfig& cfg, const fs::path& dir, std::ostream& out) {
    struct Example {
        std::string name;
        std::function<double(const RadialGrid&)> error;
    };
    const double nu = cfg.solver.nu;
    std::vector<Example> ex;
    ex.push_back({"zero_swirl_nu-3", [](const RadialGrid& g) {
                      const CVec f = sample(g, [](double r) { return cplx(std::pow(r, -4.0)); });
                      const RadialProfile v = solve_zero_swirl(g, -3.0, f, 4.0, 0.0).total(g);
                      double e = 0.0;
                      for (int i = 0; i < g.size(); ++i) {
                          const double r = g.r(i);
                          e = std::max(e, std::abs(v.values[static_cast<size_t>(i)] - std::log(r) / (r * r)));
                      }
                      return e;
                  }});
    ex.push_back({"zero_vertical_nu-1", [](const RadialGrid& g) {
                      const CVec f = sample(g, [](double r) { return cplx(std::pow(r, -3.0)); });
                      const RadialProfile v = solve_zero_meridional(g, -1.0, f, 3.0, 0.0).v_z;
                      double e = 0.0;
                      for (int i = 0; i < g.size(); ++i) {
                          const double r = g.r(i);
                          e = std::max(e, std::abs(v.values[static_cast<size_t>(i)] - std::log(r) / r));
                      }
                      return e;
                  }});
    ex.push_back({"swirl_mode_k1", [nu](const RadialGrid& g) {
                      const CVec f(static_cast<size_t>(g.size()), cplx{});
                      const RadialProfile v = solve_swirl_mode(g, 1, nu, f, 1.0);
                      const KernelSample k1 = kernel_K(1, nu, 1.0);
                      double e = 0.0;
                      for (int i = 0; i < g.size(); ++i) {
                          const KernelSample kr = kernel_K(1, nu, g.r(i));
                          const double exact = kr.value.mantissa / k1.value.mantissa *
                                               std::exp(kr.value.exp_shift - k1.value.exp_shift);
                          e = std::max(e, std::abs(v.values[static_cast<size_t>(i)] - exact));
                      }
                      return e;
                  }});
    std::ofstream f = open_out(dir / "oracle.csv");
    f << "example,n_radial,max_error,order\n";
    const int N = cfg.solver.n_radial;
    for (const auto& e : ex) {
        double prev = 0.0;
        for (int n : {N / 4, N / 2, N}) {
            const RadialGrid g(n, cfg.solver.r_max, cfg.solver.grid_gamma);
            const double err = e.error(g);
            const double order = prev > 0.0 ? observed_order(prev, err) : NAN;
            f << e.name << ',' << n << ',' << num(err) << ',' << num(order) << '\n';
            out << e.name << " N=" << n << " max_error " << err;
            if (prev > 0.0) out << " order " << order;
            out << '\n';
            prev = err;
        }
    }
}

void run_bessel(const fs::path& dir, std::ostream& out) {
    std::ofstream f = open_out(dir / "bessel.csv");
    f << "alpha,x,bessel_i,bessel_k,bessel_i_prime,bessel_k_prime,wronskian_rel_defect\n";
    double worst = 0.0;
    for (double a : {0.0, 0.5, 1.0, 1.5, 2.5}) {
        for (int j = 0; j < 200; ++j) {
            const double x = 0.1 * std::pow(300.0, j / 199.0);
            const BesselOrder o(a);
            const double i = bessel_i(o, x).value(), k = bessel_k(o, x).value();
            const double ip = bessel_i_prime(o, x).value(), kp = bessel_k_prime(o, x).value();
            const double w = std::abs((kp * i - k * ip) * x + 1.0);
            worst = std::max(worst, w);
            f << num(a) << ',' << num(x) << ',' << num(i) << ',' << num(k) << ',' << num(ip) << ',' << num(kp)
              << ',' << num(w) << '\n';
        }
    }
    out << "bessel table written; worst Wronskian relative defect " << worst << '\n';
}

}  // namespace

ResidualReport audit_solution(const SolutionBundle& b, const ForcingData& f, const BoundaryData& g,
                              const RadialGrid& grid, const ResidualOptions& opts) {
    const ModeSeries p = recover_pressure_field(b, f, grid);
    return residual_asns(b.v, grid, b.background(), f, &g, &p, opts);
}

void write_solution(const std::string& dir_s, const RunConfig& cfg, const SolutionBundle& b,
                    const ResidualReport& rep, const std::string& command) {
    const fs::path dir(dir_s);
    ensure_dir(dir);
    const RadialGrid grid = cfg.solver.make_grid();
    write_modes(dir, grid, b);
    write_residuals(dir, rep);
    {
        std::ofstream c = open_out(dir / "config.ini");
        c << render_config(cfg);
    }
    std::ofstream s = open_out(dir / "summary.txt");
    s << "command: " << command << '\n'
      << "nu: " << num(b.nu) << '\n'
      << "mu: " << num(b.mu) << '\n'
      << "k_max: " << b.v.k_max() << '\n'
      << "n_radial: " << grid.intervals() << '\n'
      << "r_max: " << num(grid.r_max()) << '\n';
    write_bundle_lines(s, b);
    write_report_lines(s, rep);
}

LoadedSolution read_solution(const std::string& dir_s) {
    const fs::path dir(dir_s);
    LoadedSolution out;
    {
        std::ifstream c(dir / "config.ini");
        if (!c) throw IoError("missing " + (dir / "config.ini").string());
        std::ostringstream ss;
        ss << c.rdbuf();
        out.cfg = parse_config(ss.str());
    }
    const RadialGrid grid = out.cfg.solver.make_grid();
    const int K = out.cfg.solver.k_max;
    const size_t n = static_cast<size_t>(grid.size());
    const FiniteDifference fd(grid);
    out.v = FourierField(K, n);
    for (int k = 0; k <= K; ++k) {
        const fs::path file = dir / ("mode_" + std::to_string(k) + ".csv");
        std::ifstream f(file);
        if (!f) throw IoError("missing " + file.string());
        std::string line;
        std::getline(f, line);
        CVec vr(n), vt(n), vz(n);
        size_t i = 0;
        int line_no = 1;
        while (std::getline(f, line)) {
            ++line_no;
            if (line.empty()) continue;
            const auto cells = split_csv(line);
            if (cells.size() < 7) throw IoError(file.string() + ":" + std::to_string(line_no) + ": short row");
            if (i >= n) throw IoError(file.string() + ": more rows than grid nodes");
            const double r = parse_cell(cells[0], file, line_no);
            if (std::abs(r - grid.r(static_cast<int>(i))) > 1e-12 * r) {
                throw IoError(file.string() + ":" + std::to_string(line_no) + ": radius does not match the grid");
            }
            vr[i] = {parse_cell(cells[1], file, line_no), parse_cell(cells[2], file, line_no)};
            vt[i] = {parse_cell(cells[3], file, line_no), parse_cell(cells[4], file, line_no)};
            vz[i] = {parse_cell(cells[5], file, line_no), parse_cell(cells[6], file, line_no)};
            ++i;
        }
        if (i != n) throw IoError(file.string() + ": expected " + std::to_string(n) + " rows");
        auto prof = [&](const CVec& s) {
            RadialProfile p;
            p.values = s;
            p.d1 = fd.d1(s);
            p.d2 = fd.d2(s);
            return p;
        };
        out.v.at(Component::r, k) = prof(vr);
        out.v.at(Component::theta, k) = prof(vt);
        out.v.at(Component::z, k) = prof(vz);
    }
    out.v.fill_conjugates();
    return out;
}

CalibrationResult calibrate(const RunConfig& cfg) {
    RunConfig base = cfg;
    if (base.boundary.empty() && base.forcing.empty()) {
        base.boundary.push_back({Component::theta, 1, cplx(1.0, 0.0)});
    }
    CalibrationResult res;
    auto probe = [&](double s) {
        RunConfig c = base.scaled(s);
        c.solver.smallness = std::numeric_limits<double>::infinity();
        const SolutionBundle b = picard_solve(c.solver, c.forcing_data(), c.boundary_data());
        CalibrationProbe p;
        p.scale = s;
        p.data_size = b.vnorm + b.enorm;
        p.contraction = b.state.contraction_estimate;
        p.iterations = b.state.iter;
        p.converged = b.converged() && p.contraction <= 0.5;
        if (res.probes.empty()) res.c_emp = b.c_emp;
        res.probes.push_back(p);
        return p;
    };
    double lo = cfg.calibrate_lo, hi = cfg.calibrate_hi;
    const CalibrationProbe first = probe(lo);
    if (!first.converged) {
        res.threshold_scale = 0.0;
        return res;
    }
    res.threshold_scale = lo;
    res.threshold_size = first.data_size;
    const CalibrationProbe top = probe(hi);
    if (top.converged) {
        res.threshold_scale = hi;
        res.threshold_size = top.data_size;
    } else {
        for (int it = 0; it < cfg.calibrate_steps; ++it) {
            const double mid = std::sqrt(lo * hi);
            const CalibrationProbe p = probe(mid);
            if (p.converged) {
                lo = mid;
                res.threshold_scale = mid;
                res.threshold_size = p.data_size;
            } else {
                hi = mid;
            }
        }
    }
    if (res.c_emp > 0.0) res.predicted_size = 1.0 / std::pow(4.0 * res.c_emp, 2.0);
    return res;
}

ExitCode run_command(const std::string& command, const RunConfig& cfg_in, const RunOptions& opts, std::ostream& out,
                     std::ostream& err) {
    try {
        RunConfig cfg = cfg_in;
        cfg.solver = with_threads(cfg.solver, opts);
        if (opts.output_dir) cfg.output_dir = *opts.output_dir;
        const fs::path dir(cfg.output_dir);
        const auto t0 = std::chrono::steady_clock::now();
        auto elapsed = [&] {
            return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        };

        if (command == "solve") {
            const ForcingData f = cfg.forcing_data();
            const BoundaryData g = cfg.boundary_data();
            const RadialGrid grid = cfg.solver.make_grid();
            const SolutionBundle b = picard_solve(cfg.solver, f, g);
            const ResidualReport rep = audit_solution(b, f, g, grid);
            write_solution(cfg.output_dir, cfg, b, rep, command);
            if (!opts.quiet) {
                out << "solve: " << status_name(b.state.status) << " after " << b.state.iter << " iterations, bnorm "
                    << b.bnorm << ", inner momentum residual " << rep.inner.max_momentum() << " (" << elapsed()
                    << " s)\n";
            }
            if (!b.converged()) err << "error[convergence]: " << b.state.diagnostic << '\n';
            return status_code(b);
        }
        if (command == "verify") {
            const std::string src = opts.solution_dir.empty() ? cfg.output_dir : opts.solution_dir;
            const LoadedSolution ls = read_solution(src);
            const RadialGrid grid = ls.cfg.solver.make_grid();
            const ForcingData f = ls.cfg.forcing_data();
            const BoundaryData g = ls.cfg.boundary_data();
            SolutionBundle b;
            b.v = ls.v;
            b.nu = ls.cfg.solver.nu;
            b.mu = ls.cfg.solver.mu;
            const ResidualReport rep = audit_solution(b, f, g, grid);
            const RegionResidual& in = rep.inner;
            double worst_r = 1.0, worst = 0.0;
            for (const auto& row : rep.curve) {
                const double m = std::max({row.momentum_r, row.momentum_theta, row.momentum_z});
                if (row.r <= rep.r_split && m > worst) {
                    worst = m;
                    worst_r = row.r;
                }
            }
            const double mom = std::max({in.momentum_theta, in.momentum_r.value_or(0.0), in.momentum_z.value_or(0.0)});
            const bool ok = mom <= opts.verify_tolerance && in.divergence <= opts.verify_divergence &&
                            rep.max_boundary_mismatch <= opts.verify_tolerance;
            {
                ensure_dir(src);
                std::ofstream s = open_out(fs::path(src) / "verify.txt");
                s << "verify: " << (ok ? "pass" : "FAIL") << '\n'
                  << "max_inner_momentum: " << num(mom) << '\n'
                  << "worst_r: " << num(worst_r) << '\n';
                write_report_lines(s, rep);
            }
            out << "verify: " << (ok ? "pass" : "FAIL") << ", inner momentum residual " << mom << " (worst at r = "
                << worst_r << "), divergence " << in.divergence << ", boundary mismatch "
                << rep.max_boundary_mismatch << '\n';
            if (!ok) {
                err << "error[numeric]: residual above tolerance " << opts.verify_tolerance << " near r = " << worst_r
                    << '\n';
                return ExitCode::numeric;
            }
            return ExitCode::ok;
        }
        if (command == "nonunique") {
            if (!(cfg.solver.nu < -2.0)) {
                err << "error[config]: nonunique needs nu < -2 (got nu = " << cfg.solver.nu
                    << "); the two-solution construction uses the 1/r freedom of the swirl that exists only there\n";
                return ExitCode::config;
            }
            const ForcingData f = cfg.forcing_data();
            const BoundaryData g = cfg.boundary_data();
            const RadialGrid grid = cfg.solver.make_grid();
            const NonuniquenessResult nr = nonuniqueness_pair(cfg.solver, f, g, cfg.delta_mu);
            const ResidualReport r1 = audit_solution(nr.first, f, g, grid);
            BoundaryData g2 = g;
            g2.set(Component::theta, 0, g.get(Component::theta, 0) - cfg.delta_mu);
            const ResidualReport r2 = audit_solution(nr.second, f, g2, grid);
            write_solution(cfg.output_dir, cfg, nr.first, r1, command);
            RunConfig cfg2 = cfg;
            cfg2.solver.mu += cfg.delta_mu;
            cfg2.output_dir = (dir / "second").string();
            bool replaced = false;
            for (auto& e : cfg2.boundary) {
                if (e.component == Component::theta && e.k == 0 && !replaced) {
                    e.value -= cfg.delta_mu;
                    replaced = true;
                }
            }
            if (!replaced) cfg2.boundary.push_back({Component::theta, 0, cplx(-cfg.delta_mu, 0.0)});
            write_solution(cfg2.output_dir, cfg2, nr.second, r2, command);
            {
                std::ofstream s = open_out(dir / "separation.csv");
                s << "r,r_times_swirl_difference\n";
                for (const auto& row : nr.separation) s << num(row.r) << ',' << num(row.value) << '\n';
            }
            {
                std::ofstream s(dir / "summary.txt", std::ios::app);
                s << "delta_mu: " << num(nr.delta_mu) << '\n'
                  << "separation_at_half: " << num(nr.at_half) << '\n'
                  << "separation_limit_estimate: " << num(nr.limit_estimate) << '\n'
                  << "bnorm_distance: " << num(nr.bnorm_distance) << '\n'
                  << "second_status: " << status_name(nr.second.state.status) << '\n';
            }
            out << "nonunique: separation at R/2 " << nr.at_half << " (expected " << -cfg.delta_mu
                << "), bnorm distance " << nr.bnorm_distance << " (" << elapsed() << " s)\n";
            if (!nr.first.converged() || !nr.second.converged()) {
                err << "error[convergence]: one of the two Picard runs did not converge\n";
                return ExitCode::convergence;
            }
            return ExitCode::ok;
        }
        if (command == "bessel") {
            ensure_dir(dir);
            run_bessel(dir, out);
            return ExitCode::ok;
        }
        if (command == "oracle") {
            ensure_dir(dir);
            run_oracle(cfg, dir, out);
            return ExitCode::ok;
        }
        if (command == "calibrate") {
            ensure_dir(dir);
            const CalibrationResult res = calibrate(cfg);
            std::ofstream s = open_out(dir / "calibrate.csv");
            s << "scale,data_size,converged,contraction,iterations\n";
            for (const auto& p : res.probes) {
                s << num(p.scale) << ',' << num(p.data_size) << ',' << (p.converged ? 1 : 0) << ','
                  << num(p.contraction) << ',' << p.iterations << '\n';
            }
            std::ofstream sum = open_out(dir / "summary.txt");
            sum << "command: calibrate\n"
                << "threshold_scale: " << num(res.threshold_scale) << '\n'
                << "threshold_data_size: " << num(res.threshold_size) << '\n'
                << "c_emp: " << num(res.c_emp) << '\n'
                << "predicted_data_size: " << num(res.predicted_size) << '\n';
            out << "calibrate: largest converging data size " << res.threshold_size << " (scale "
                << res.threshold_scale << "), (4 C_emp)^-2 = " << res.predicted_size << '\n';
            if (res.threshold_scale == 0.0) {
                err << "error[convergence]: no converging scale in the bracket\n";
                return ExitCode::convergence;
            }
            return ExitCode::ok;
        }
        err << "error[config]: unknown command '" << command << "'\n";
        return ExitCode::config;
    } catch (const ConfigError& e) {
        err << "error[config]: " << e.what() << '\n';
        return ExitCode::config;
    } catch (const IoError& e) {
        err << "error[io]: " << e.what() << '\n';
        return ExitCode::io;
    } catch (const std::ios_base::failure& e) {
        err << "error[io]: " << e.what() << '\n';
        return ExitCode::io;
    } catch (const fs::filesystem_error& e) {
        err << "error[io]: " << e.what() << '\n';
        return ExitCode::io;
    } catch (const std::exception& e) {
        err << "error[numeric]: " << e.what() << '\n';
        return ExitCode::numeric;
    }
}

}  // namespace asns
