#pragma once

// Picard iteration for the reduced problem around the background
// (nu/r) e_r + (mu/r) e_theta: quadratic right-hand sides by mode convolution,
// per-mode linear solves in a parallel map, contraction monitoring and the
// two-solution construction obtained by perturbing mu.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "asns/fourier_core.hpp"
#include "asns/linear_modes.hpp"
#include "asns/radial_numerics.hpp"
#include "asns/verification.hpp"

namespace asns {

struct TauInfo {
    double tau = 0.0;
    double lambda_bar_theta = 0.0;  // min(lambda_theta, 2 - nu/2) when nu < -2
    double lambda_bar_z = 0.0;      // min(lambda_z, 2 - nu/2)
};

// tau = min(lambda_bar_theta - 3, lambda_bar_z - 2, lambda - 3/2).
// Throws std::invalid_argument when a hypothesis fails or tau <= 0.
TauInfo compute_tau_info(double nu, double lambda_theta, double lambda_z, double lambda);
double compute_tau(double nu, double lambda_theta, double lambda_z, double lambda);

struct SolverConfig {
    double nu = -1.0;
    double mu = 0.0;
    int k_max = 8;
    double r_max = 100.0;
    int n_radial = 1024;
    double grid_gamma = 2.0;
    double lambda_theta = 4.0;
    double lambda_z = 3.0;
    double lambda = 2.0;
    double tol_picard = 1e-12;
    int max_iters = 50;
    double relaxation = 1.0;
    double smallness = 0.1;  // warn when enorm + vnorm exceeds this
    int threads = 0;         // 0: ASNS_THREADS or the hardware count
    bool linear_only = false;

    RadialGrid make_grid() const { return RadialGrid(n_radial, r_max, grid_gamma); }
    // Hypotheses of the construction; throws std::invalid_argument.
    void validate() const;
};

int resolve_thread_count(int requested);

// Runs fn(0..count-1) on `threads` workers; each index runs exactly once.
void parallel_for(int count, int threads, const std::function<void(int)>& fn);

struct RhsAudit {
    CVec discarded_fr0;            // zero mode of fbar_r before absorption into the pressure
    double discarded_fr0_max = 0.0;
    double truncation_tail = 0.0;  // largest product magnitude generated beyond K
};

struct ModeForcingSet {
    ModeSeries f_r, f_theta, f_z;
    RhsAudit audit;
};

// fbar from the current iterate (sigma/r included in the swirl), plus f.
// fbar_{r,0} is zeroed and kept in the audit.  The 2 mu v_theta / r^2
// coupling is added by the linear step, where the new swirl is known.
ModeForcingSet assemble_rhs(const FourierField& vbar, const ForcingData& f, const RadialGrid& grid);

class KernelCache {
public:
    KernelCache(const RadialGrid& grid, int k_max, double nu, int threads);
    const ModeKernels& at(int k) const { return kernels_[static_cast<size_t>(k - 1)]; }

private:
    std::vector<ModeKernels> kernels_;
};

// Vorticity and stream function of modes k = 0..K.  Mode 0 carries -v_z' and a
// zero stream function.
struct StreamFields {
    std::vector<CVec> w, phi;
};

// One application of the linear solution map for the given forcing.
FourierField solve_linear_step(const RadialGrid& grid, const SolverConfig& cfg, const ModeForcingSet& rhs,
                               const BoundaryData& g, const KernelCache& kernels, StreamFields* aux = nullptr);

enum class PicardStatus { converged, max_iterations, diverged };
const char* status_name(PicardStatus s);

struct IterationState {
    int iter = 0;
    std::vector<double> diff_norm_history;
    std::vector<double> iterate_norms;
    double contraction_estimate = 0.0;
    PicardStatus status = PicardStatus::max_iterations;
    std::string diagnostic;
};

struct SolutionBundle {
    FourierField v;
    double nu = 0.0, mu = 0.0;
    TauInfo tau;
    double vnorm = 0.0, enorm = 0.0, bnorm = 0.0;
    double c_emp = 0.0;
    bool smallness_exceeded = false;
    IterationState state;
    RhsAudit audit;
    StreamFields stream;
    std::optional<ResidualReport> residual;

    bool converged() const { return state.status == PicardStatus::converged; }
    Background background() const { return {nu, mu}; }
};

// Geometric mean of the last (up to three) ratios of consecutive differences.
double contraction_from_history(const std::vector<double>& history);

SolutionBundle picard_solve(const SolverConfig& cfg, const ForcingData& f, const BoundaryData& g);

// Pressure perturbation modes for a solved bundle: k != 0 from the z equation,
// k = 0 from the unabsorbed fbar_{r,0}.
ModeSeries recover_pressure_field(const SolutionBundle& b, const ForcingData& f, const RadialGrid& grid);

struct SeparationRow {
    double r = 0.0;
    double value = 0.0;  // r (u_theta - u~_theta), z-averaged
};

struct NonuniquenessResult {
    SolutionBundle first, second;
    double delta_mu = 0.0;
    std::vector<SeparationRow> separation;  // nodes of the last decade
    double at_half = 0.0;                   // value at r = R_max / 2
    double limit_estimate = 0.0;            // a in a + b r^{nu+2}
    double bnorm_distance = 0.0;
};

// Solves with mu and with mu + delta_mu (boundary swirl lowered by delta_mu).
// Throws std::invalid_argument for nu >= -2.
NonuniquenessResult nonuniqueness_pair(const SolverConfig& cfg, const ForcingData& f, const BoundaryData& g,
                                       double delta_mu);

}  // namespace asns
