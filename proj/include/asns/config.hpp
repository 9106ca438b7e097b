#pragma once

// Flat key = value run configuration.  Data lines:
//   boundary = <component> <k> <re> [<im>]
//   forcing  = <component> <k> power_decay(a, p) | power_exp_decay(a, p, rate)
// Both describe real fields: k >= 0 is given and mode -k is its conjugate.

#include <stdexcept>
#include <string>
#include <vector>

#include "asns/fourier_core.hpp"
#include "asns/nonlinear_solver.hpp"

namespace asns {

class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& what, int line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

struct BoundaryEntry {
    Component component = Component::theta;
    int k = 0;
    cplx value{};
    bool operator==(const BoundaryEntry&) const = default;
};

struct ForcingEntry {
    Component component = Component::theta;
    int k = 0;
    ForcingFamily family = ForcingFamily::power_decay;
    double amplitude = 0.0;
    double exponent = 0.0;
    double rate = 0.0;
    bool operator==(const ForcingEntry&) const = default;
};

struct RunConfig {
    SolverConfig solver;
    std::vector<BoundaryEntry> boundary;
    std::vector<ForcingEntry> forcing;
    std::string output_dir = "asns_out";
    double delta_mu = 0.05;     // nonunique
    double calibrate_lo = 1e-4; // calibrate: bracket for the data scale
    double calibrate_hi = 10.0;
    int calibrate_steps = 12;
    TauInfo tau;                // filled by validation

    BoundaryData boundary_data() const;
    ForcingData forcing_data() const;
    // Multiplies every boundary value and forcing amplitude.
    RunConfig scaled(double factor) const;

    bool same_settings(const RunConfig& o) const;
};

// Parses and validates.  Throws ConfigError.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
// Hypothesis checks; fills cfg.tau.  Throws ConfigError.
void validate_config(RunConfig& cfg);
std::string render_config(const RunConfig& cfg);

}  // namespace asns
