#include "asns/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace asns {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& raw, int line, const std::string& key) {
    const std::string s = trim(raw);
    double v = 0.0;
    const char* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || p != end || s.empty()) {
        throw ConfigError("expected a number for '" + key + "', got '" + s + "'", line);
    }
    if (!std::isfinite(v)) throw ConfigError("non-finite value for '" + key + "'", line);
    return v;
}

int to_int(const std::string& raw, int line, const std::string& key) {
    const std::string s = trim(raw);
    int v = 0;
    const char* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || p != end || s.empty()) {
        throw ConfigError("expected an integer for '" + key + "', got '" + s + "'", line);
    }
    return v;
}

bool to_bool(const std::string& raw, int line, const std::string& key) {
    const std::string s = trim(raw);
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ConfigError("expected true or false for '" + key + "', got '" + s + "'", line);
}

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream is(s);
    std::vector<std::string> out;
    for (std::string t; is >> t;) out.push_back(t);
    return out;
}

Component component_or_throw(const std::string& s, int line) {
    const auto c = parse_component(s);
    if (!c) throw ConfigError("unknown component '" + s + "' (use r, theta or z)", line);
    return *c;
}

BoundaryEntry parse_boundary(const std::string& value, int line) {
    const auto tok = split_ws(value);
    if (tok.size() != 3 && tok.size() != 4) {
        throw ConfigError("boundary expects '<component> <k> <re> [<im>]'", line);
    }
    BoundaryEntry e;
    e.component = component_or_throw(tok[0], line);
    e.k = to_int(tok[1], line, "boundary");
    const double re = to_double(tok[2], line, "boundary");
    const double im = tok.size() == 4 ? to_double(tok[3], line, "boundary") : 0.0;
    e.value = {re, im};
    return e;
}

ForcingEntry parse_forcing(const std::string& value, int line) {
    std::istringstream is(value);
    std::string comp, kstr;
    is >> comp >> kstr;
    std::string rest;
    std::getline(is, rest);
    rest = trim(rest);
    ForcingEntry e;
    e.component = component_or_throw(comp, line);
    e.k = to_int(kstr, line, "forcing");
    const auto open = rest.find('(');
    if (open == std::string::npos || rest.back() != ')') {
        throw ConfigError("forcing expects power_decay(a, p) or power_exp_decay(a, p, rate)", line);
    }
    const std::string family = trim(rest.substr(0, open));
    std::vector<double> args;
    std::stringstream inner(rest.substr(open + 1, rest.size() - open - 2));
    for (std::string a; std::getline(inner, a, ',');) args.push_back(to_double(a, line, "forcing"));
    if (family == "power_decay") {
        if (args.size() != 2) throw ConfigError("power_decay takes (a, p)", line);
        e.family = ForcingFamily::power_decay;
    } else if (family == "power_exp_decay") {
        if (args.size() != 3) throw ConfigError("power_exp_decay takes (a, p, rate)", line);
        e.family = ForcingFamily::power_exp_decay;
        e.rate = args[2];
        if (e.rate < 0.0) throw ConfigError("power_exp_decay rate must be >= 0", line);
    } else {
        throw ConfigError("unknown forcing family '" + family + "'", line);
    }
    e.amplitude = args[0];
    e.exponent = args[1];
    return e;
}

ForcingTerm to_term(const ForcingEntry& e) {
    ForcingTerm t;
    t.family = e.family;
    t.amplitude = e.amplitude;
    t.exponent = e.exponent;
    t.rate = e.rate;
    return t;
}

}  // namespace

BoundaryData RunConfig::boundary_data() const {
    BoundaryData g;
    for (const auto& e : boundary) {
        g.set_real_field(e.component, e.k, g.get(e.component, e.k) + e.value);
    }
    return g;
}

ForcingData RunConfig::forcing_data() const {
    ForcingData f;
    for (const auto& e : forcing) f.add_real_field(e.component, e.k, to_term(e));
    return f;
}

RunConfig RunConfig::scaled(double factor) const {
    RunConfig c = *this;
    for (auto& e : c.boundary) e.value *= factor;
    for (auto& e : c.forcing) e.amplitude *= factor;
    return c;
}

bool RunConfig::same_settings(const RunConfig& o) const {
    const SolverConfig& a = solver;
    const SolverConfig& b = o.solver;
    return a.nu == b.nu && a.mu == b.mu && a.k_max == b.k_max && a.r_max == b.r_max && a.n_radial == b.n_radial &&
           a.grid_gamma == b.grid_gamma && a.lambda_theta == b.lambda_theta && a.lambda_z == b.lambda_z &&
           a.lambda == b.lambda && a.tol_picard == b.tol_picard && a.max_iters == b.max_iters &&
           a.relaxation == b.relaxation && a.smallness == b.smallness && a.threads == b.threads &&
           a.linear_only == b.linear_only && boundary == o.boundary && forcing == o.forcing &&
           output_dir == o.output_dir && delta_mu == o.delta_mu && calibrate_lo == o.calibrate_lo &&
           calibrate_hi == o.calibrate_hi && calibrate_steps == o.calibrate_steps;
}

void validate_config(RunConfig& cfg) {
    const SolverConfig& s = cfg.solver;
    try {
        s.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    for (const auto& e : cfg.boundary) {
        if (e.k < 0) throw ConfigError("boundary modes are given for k >= 0; k < 0 follows by conjugation");
        if (e.component == Component::r && e.k == 0 && e.value != cplx{}) {
            throw ConfigError("boundary g_r at k = 0 must vanish (normalization g_{r,0} = 0: a radial flux is "
                              "carried by the background nu/r)");
        }
        if (e.k == 0 && e.value.imag() != 0.0) {
            throw ConfigError("boundary value at k = 0 must be real");
        }
        if (e.k > s.k_max) throw ConfigError("boundary mode k = " + std::to_string(e.k) + " exceeds k_max");
    }
    for (const auto& e : cfg.forcing) {
        if (e.k < 0) throw ConfigError("forcing modes are given for k >= 0; k < 0 follows by conjugation");
        if (e.k > s.k_max) throw ConfigError("forcing mode k = " + std::to_string(e.k) + " exceeds k_max");
    }
    try {
        if (!s.linear_only) cfg.forcing_data().validate(s.lambda_theta, s.lambda_z, s.lambda);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (!(cfg.calibrate_lo > 0.0 && cfg.calibrate_hi > cfg.calibrate_lo)) {
        throw ConfigError("0 < calibrate_lo < calibrate_hi required");
    }
    if (cfg.calibrate_steps < 1) throw ConfigError("calibrate_steps >= 1 required");
    if (cfg.output_dir.empty()) throw ConfigError("output_dir must not be empty");
    if (s.linear_only) {
        cfg.tau = {};
    } else {
        cfg.tau = compute_tau_info(s.nu, s.lambda_theta, s.lambda_z, s.lambda);
    }
}

RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    SolverConfig& s = cfg.solver;
    std::map<std::string, int> seen;
    std::istringstream in(text);
    int line_no = 0;
    for (std::string raw; std::getline(in, raw);) {
        ++line_no;
        const auto hash = raw.find('#');
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') continue;  // section headers are cosmetic
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line_no);
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (value.empty()) throw ConfigError("missing value for '" + key + "'", line_no);
        if (key != "boundary" && key != "forcing") {
            if (seen.count(key)) {
                throw ConfigError("duplicate key '" + key + "' (first set on line " + std::to_string(seen[key]) + ")",
                                  line_no);
            }
            seen[key] = line_no;
        }
        if (key == "nu") s.nu = to_double(value, line_no, key);
        else if (key == "mu") s.mu = to_double(value, line_no, key);
        else if (key == "k_max") s.k_max = to_int(value, line_no, key);
        else if (key == "r_max") s.r_max = to_double(value, line_no, key);
        else if (key == "n_radial") s.n_radial = to_int(value, line_no, key);
        else if (key == "grid_gamma") s.grid_gamma = to_double(value, line_no, key);
        else if (key == "lambda_theta") s.lambda_theta = to_double(value, line_no, key);
        else if (key == "lambda_z") s.lambda_z = to_double(value, line_no, key);
        else if (key == "lambda") s.lambda = to_double(value, line_no, key);
        else if (key == "tol_picard") s.tol_picard = to_double(value, line_no, key);
        else if (key == "max_iters") s.max_iters = to_int(value, line_no, key);
        else if (key == "relaxation") s.relaxation = to_double(value, line_no, key);
        else if (key == "smallness") s.smallness = to_double(value, line_no, key);
        else if (key == "threads") s.threads = to_int(value, line_no, key);
        else if (key == "linear_only") s.linear_only = to_bool(value, line_no, key);
        else if (key == "delta_mu") cfg.delta_mu = to_double(value, line_no, key);
        else if (key == "calibrate_lo") cfg.calibrate_lo = to_double(value, line_no, key);
        else if (key == "calibrate_hi") cfg.calibrate_hi = to_double(value, line_no, key);
        else if (key == "calibrate_steps") cfg.calibrate_steps = to_int(value, line_no, key);
        else if (key == "output_dir") cfg.output_dir = value;
        else if (key == "boundary") cfg.boundary.push_back(parse_boundary(value, line_no));
        else if (key == "forcing") cfg.forcing.push_back(parse_forcing(value, line_no));
        else throw ConfigError("unknown key '" + key + "'", line_no);
    }
    validate_config(cfg);
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot open config file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string render_config(const RunConfig& cfg) {
    const SolverConfig& s = cfg.solver;
    std::ostringstream os;
    os << "nu = " << num(s.nu) << '\n'
       << "mu = " << num(s.mu) << '\n'
       << "k_max = " << s.k_max << '\n'
       << "r_max = " << num(s.r_max) << '\n'
       << "n_radial = " << s.n_radial << '\n'
       << "grid_gamma = " << num(s.grid_gamma) << '\n'
       << "lambda_theta = " << num(s.lambda_theta) << '\n'
       << "lambda_z = " << num(s.lambda_z) << '\n'
       << "lambda = " << num(s.lambda) << '\n'
       << "tol_picard = " << num(s.tol_picard) << '\n'
       << "max_iters = " << s.max_iters << '\n'
       << "relaxation = " << num(s.relaxation) << '\n'
       << "smallness = " << num(s.smallness) << '\n'
       << "threads = " << s.threads << '\n'
       << "linear_only = " << (s.linear_only ? "true" : "false") << '\n'
       << "delta_mu = " << num(cfg.delta_mu) << '\n'
       << "calibrate_lo = " << num(cfg.calibrate_lo) << '\n'
       << "calibrate_hi = " << num(cfg.calibrate_hi) << '\n'
       << "calibrate_steps = " << cfg.calibrate_steps << '\n'
       << "output_dir = " << cfg.output_dir << '\n';
    for (const auto& e : cfg.boundary) {
        os << "boundary = " << component_name(e.component) << ' ' << e.k << ' ' << num(e.value.real()) << ' '
           << num(e.value.imag()) << '\n';
    }
    for (const auto& e : cfg.forcing) {
        os << "forcing = " << component_name(e.component) << ' ' << e.k << ' ';
        if (e.family == ForcingFamily::power_decay) {
            os << "power_decay(" << num(e.amplitude) << ", " << num(e.exponent) << ")\n";
        } else {
            os << "power_exp_decay(" << num(e.amplitude) << ", " << num(e.exponent) << ", " << num(e.rate) << ")\n";
        }
    }
    return os.str();
}

}  // namespace asns
