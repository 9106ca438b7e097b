#pragma once

// Per-Fourier-mode linear solvers: zero-mode swirl and vertical components
// (Euler kernels), nonzero-mode swirl (modified Bessel Green's function) and
// nonzero-mode meridional flow through vorticity and stream function.

#include <optional>

#include "asns/radial_numerics.hpp"
#include "asns/special_functions.hpp"

namespace asns {

struct ScaledComplex {
    cplx mantissa{};
    double exp_shift = 0.0;
    cplx value() const { return mantissa * std::exp(exp_shift); }
};

// Scaled kernel samples on the grid: K(r) = k[i] e^{-kappa r}, I(r) = i[i] e^{kappa r};
// kd, id are the r-derivatives carrying the same exponentials.
struct KernelTable {
    double kappa = 0.0;
    RVec k, kd, i, id;
};

KernelTable make_kernel_table(const RadialGrid& grid, int k, double nu, KernelFamily family);

struct ModeKernels {
    int k = 0;
    double nu = 0.0;
    KernelTable swirl;
    KernelTable vorticity;
    KernelTable stream;

    static ModeKernels build(const RadialGrid& grid, int k, double nu);
};

struct ZeroModeSwirlSolution {
    RadialProfile v_regular;       // the o(1/r) part
    std::optional<cplx> sigma;     // coefficient of 1/r, present when -2 <= nu < 0
    RadialProfile total(const RadialGrid& grid) const;  // v_regular + sigma/r
};

// -(v'' + (1-nu)/r v' - (1+nu)/r^2 v) = f, v(1) = g, decaying.
// `decay` is the declared exponent of f (used for the tail closures).
ZeroModeSwirlSolution solve_zero_swirl(const RadialGrid& grid, double nu, const CVec& f,
                                       std::optional<double> decay, cplx g_theta0);

struct ZeroMeridionalSolution {
    RadialProfile v_r;  // identically zero
    RadialProfile v_z;
};

// -(v'' + (1-nu)/r v') = f, v(1) = g, decaying.
ZeroMeridionalSolution solve_zero_meridional(const RadialGrid& grid, double nu, const CVec& f_z,
                                             std::optional<double> decay, cplx g_z0);

// -(v'' + (1-nu)/r v' - (1+nu)/r^2 v - k^2 v) = f, v(1) = g.
RadialProfile solve_swirl_mode(const RadialGrid& grid, int k, double nu, const CVec& f, cplx g_theta_k,
                               const ModeKernels* kernels = nullptr, ScaledComplex* v_bar = nullptr);

struct ClosureCoefficients {
    ScaledComplex A, B, D, G;
};

struct MeridionalModeSolution {
    RadialProfile v_r, v_z, w, phi;
    ScaledComplex phi_bar, w_bar;
    ClosureCoefficients closure;
};

// How f_z' enters the vorticity forcing F = i k f_r - f_z'.
enum class VorticityForcingPath {
    integrated_by_parts,  // only f_z values needed
    direct,               // f_z' supplied by the caller
};

struct MeridionalForcing {
    CVec f_r;
    CVec f_z;
    std::optional<CVec> f_z_prime;  // required for the direct path
    VorticityForcingPath path = VorticityForcingPath::integrated_by_parts;
};

MeridionalModeSolution solve_meridional_mode(const RadialGrid& grid, int k, double nu,
                                             const MeridionalForcing& forcing, cplx g_r_k, cplx g_z_k,
                                             const ModeKernels* kernels = nullptr);

// Pressure mode pi_k.  For k != 0 from the z-momentum equation; for k = 0 from
// pi_0' = fbar_{r,0} integrated inward from infinity.  `v_z` needs d1 and d2.
RadialProfile recover_pressure(const RadialGrid& grid, int k, double nu, const RadialProfile& v_z,
                               const CVec& fbar_r, const CVec& fbar_z);

}  // namespace asns
