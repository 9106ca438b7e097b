#pragma once

// Run orchestration for the command line tool: solve, verify, nonunique,
// bessel, oracle and calibrate, with a fixed output layout.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "asns/config.hpp"
#include "asns/nonlinear_solver.hpp"
#include "asns/verification.hpp"

namespace asns {

enum class ExitCode : int { ok = 0, config = 1, numeric = 2, convergence = 3, io = 4 };

const char* exit_class(ExitCode c);

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunOptions {
    std::optional<int> threads;       // overrides the config value
    std::optional<std::string> output_dir;
    std::string solution_dir;         // verify: directory written by solve
    double verify_tolerance = 1e-6;   // momentum residual bound for verify
    double verify_divergence = 1e-8;
    bool quiet = false;
};

// Residual defaults used by every command.
ResidualOptions default_residual_options();

// Solution plus audit: pressure recovery and residual of the full system.
ResidualReport audit_solution(const SolutionBundle& b, const ForcingData& f, const BoundaryData& g,
                              const RadialGrid& grid, const ResidualOptions& opts = default_residual_options());

// mode_{k}.csv for k = 0..K, residuals.csv and summary.txt (plus config.ini).
void write_solution(const std::string& dir, const RunConfig& cfg, const SolutionBundle& b,
                    const ResidualReport& rep, const std::string& command);

// Reads config.ini and the mode CSVs written by write_solution.  The zero-mode
// swirl is loaded as a total (sigma folded in); derivatives are rebuilt by
// finite differences.
struct LoadedSolution {
    RunConfig cfg;
    FourierField v;
};
LoadedSolution read_solution(const std::string& dir);

struct CalibrationProbe {
    double scale = 0.0;
    double data_size = 0.0;  // vnorm + enorm at this scale
    bool converged = false;
    double contraction = 0.0;
    int iterations = 0;
};

struct CalibrationResult {
    std::vector<CalibrationProbe> probes;
    double threshold_scale = 0.0;  // largest scale seen to converge
    double threshold_size = 0.0;
    double c_emp = 0.0;            // bnorm / data at the smallest scale
    double predicted_size = 0.0;   // (4 C_emp)^{-2}
};

// Bisection in log scale for the largest data scale with a converged Picard
// run whose contraction estimate stays <= 1/2.
CalibrationResult calibrate(const RunConfig& cfg);

// Dispatches a subcommand and maps failures to exit codes.  Messages go to
// `out` and `err`.
ExitCode run_command(const std::string& command, const RunConfig& cfg, const RunOptions& opts, std::ostream& out,
                     std::ostream& err);

}  // namespace asns
