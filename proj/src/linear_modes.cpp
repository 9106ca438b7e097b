#include "asns/linear_modes.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace asns {

namespace {

constexpr cplx kI{0.0, 1.0};

void check_size(const RadialGrid& grid, const CVec& v, const char* what) {
    if (static_cast<int>(v.size()) != grid.size()) {
        throw std::invalid_argument(std::string(what) + ": profile size does not match the grid");
    }
}

std::optional<double> shifted(std::optional<double> decay, double by) {
    if (!decay) return std::nullopt;
    return *decay + by;
}

// e^{-kappa (r - 1)} at every node
RVec boundary_decay(const RadialGrid& grid, double kappa) {
    RVec e(static_cast<size_t>(grid.size()));
    for (int i = 0; i < grid.size(); ++i) e[static_cast<size_t>(i)] = std::exp(-kappa * (grid.r(i) - 1.0));
    return e;
}

// Particular solution sum  K(r) int_1^r a I + I(r) int_r^inf b K  in scaled form,
// where a, b already contain the scaled kernels.  Returns value and derivative.
struct GreenParts {
    CVec inner;  // J-hat
    CVec outer;  // L-hat
};

GreenParts green_parts(const RadialGrid& grid, const CVec& a, const CVec& b, double kappa, const std::string& label) {
    TailSpec t;
    t.label = label;
    return {cumulative_inner(grid, a, kappa), cumulative_outer(grid, b, kappa, t)};
}

}  // namespace

RadialProfile ZeroModeSwirlSolution::total(const RadialGrid& grid) const {
    RadialProfile out = v_regular;
    if (!sigma) return out;
    const cplx s = *sigma;
    for (int i = 0; i < grid.size(); ++i) {
        const double r = grid.r(i);
        out.values[static_cast<size_t>(i)] += s / r;
        if (out.d1) (*out.d1)[static_cast<size_t>(i)] += -s / (r * r);
        if (out.d2) (*out.d2)[static_cast<size_t>(i)] += 2.0 * s / (r * r * r);
    }
    return out;
}

KernelTable make_kernel_table(const RadialGrid& grid, int k, double nu, KernelFamily family) {
    KernelTable t;
    t.kappa = std::abs(static_cast<double>(k));
    const auto n = static_cast<size_t>(grid.size());
    t.k.resize(n);
    t.kd.resize(n);
    t.i.resize(n);
    t.id.resize(n);
    for (int j = 0; j < grid.size(); ++j) {
        const double r = grid.r(j);
        const KernelSample ks = kernel_K(k, nu, r, family);
        const KernelSample is = kernel_I(k, nu, r, family);
        const auto u = static_cast<size_t>(j);
        t.k[u] = ks.value.mantissa;
        t.kd[u] = ks.d1.mantissa;
        t.i[u] = is.value.mantissa;
        t.id[u] = is.d1.mantissa;
    }
    return t;
}

ModeKernels ModeKernels::build(const RadialGrid& grid, int k, double nu) {
    ModeKernels m;
    m.k = k;
    m.nu = nu;
    m.swirl = make_kernel_table(grid, k, nu, KernelFamily::swirl);
    m.vorticity = make_kernel_table(grid, k, nu, KernelFamily::vorticity);
    m.stream = make_kernel_table(grid, k, nu, KernelFamily::stream);
    return m;
}

ZeroModeSwirlSolution solve_zero_swirl(const RadialGrid& grid, double nu, const CVec& f,
                                       std::optional<double> decay, cplx g) {
    check_size(grid, f, "solve_zero_swirl");
    if (!(nu < 0.0)) throw std::domain_error("solve_zero_swirl: nu < 0 required");
    if (decay && !(*decay > 3.0)) {
        throw NonIntegrableTail("solve_zero_swirl: forcing decay exponent must exceed 3 (lambda_theta > 3)");
    }
    const size_t n = static_cast<size_t>(grid.size());
    ZeroModeSwirlSolution sol;
    sol.v_regular = RadialProfile::zeros(n);
    CVec& v = sol.v_regular.values;
    CVec& v1 = *sol.v_regular.d1;
    CVec& v2 = *sol.v_regular.d2;

    if (nu < -2.0) {
        CVec a(n), b(n);
        for (size_t i = 0; i < n; ++i) {
            const double s = grid.r(static_cast<int>(i));
            a[i] = std::pow(s, -nu) * f[i];
            b[i] = s * s * f[i];
        }
        TailSpec t;
        t.declared = shifted(decay, -2.0);
        t.label = "zero swirl, s^2 f";
        const CVec J1 = cumulative_inner(grid, a);
        const CVec J2 = cumulative_outer(grid, b, 0.0, t);
        const double c = -1.0 / (2.0 + nu);
        const cplx C = g + J2[0] / (nu + 2.0);
        for (size_t i = 0; i < n; ++i) {
            const double r = grid.r(static_cast<int>(i));
            const double rn1 = std::pow(r, nu + 1.0);
            const double rn = rn1 / r;
            v[i] = c * (rn1 * J1[i] + J2[i] / r) + C * rn1;
            v1[i] = c * ((nu + 1.0) * rn * J1[i] - J2[i] / (r * r)) + C * (nu + 1.0) * rn;
        }
        v[0] = g;
    } else {
        CVec p_int(n);
        for (size_t i = 0; i < n; ++i) p_int[i] = std::pow(grid.r(static_cast<int>(i)), -nu) * f[i];
        TailSpec tp;
        tp.declared = shifted(decay, nu);
        tp.label = "zero swirl, t^{-nu} f";
        const CVec P = cumulative_outer(grid, p_int, 0.0, tp);
        CVec q_int(n);
        for (size_t i = 0; i < n; ++i) q_int[i] = std::pow(grid.r(static_cast<int>(i)), nu + 1.0) * P[i];
        TailSpec tq;
        tq.declared = shifted(decay, -2.0);
        tq.label = "zero swirl, s^{nu+1} P";
        const CVec Q = cumulative_outer(grid, q_int, 0.0, tq);
        for (size_t i = 0; i < n; ++i) {
            const double r = grid.r(static_cast<int>(i));
            v[i] = -Q[i] / r;
            v1[i] = Q[i] / (r * r) + std::pow(r, nu) * P[i];
        }
        sol.sigma = g + Q[0];
    }
    for (size_t i = 0; i < n; ++i) {
        const double r = grid.r(static_cast<int>(i));
        v2[i] = -f[i] - (1.0 - nu) / r * v1[i] + (1.0 + nu) / (r * r) * v[i];
    }
    sol.v_regular.decay_exponent = decay ? std::optional<double>(std::min(*decay - 2.0, -(nu + 1.0)))
                                         : std::nullopt;
    return sol;
}

ZeroMeridionalSolution solve_zero_meridional(const RadialGrid& grid, double nu, const CVec& f,
                                             std::optional<double> decay, cplx g) {
    check_size(grid, f, "solve_zero_meridional");
    if (!(nu < 0.0)) throw std::domain_error("solve_zero_meridional: nu < 0 required");
    if (decay && !(*decay > 2.0)) {
        throw NonIntegrableTail("solve_zero_meridional: forcing decay exponent must exceed 2 (lambda_z > 2)");
    }
    const size_t n = static_cast<size_t>(grid.size());
    ZeroMeridionalSolution sol;
    sol.v_r = RadialProfile::zeros(n);
    sol.v_z = RadialProfile::zeros(n);
    CVec a(n), b(n);
    for (size_t i = 0; i < n; ++i) {
        const double s = grid.r(static_cast<int>(i));
        a[i] = f[i] * std::pow(s, 1.0 - nu);
        b[i] = f[i] * s;
    }
    TailSpec t;
    t.declared = shifted(decay, -1.0);
    t.label = "zero vertical, s f";
    const CVec A = cumulative_inner(grid, a);
    const CVec B = cumulative_outer(grid, b, 0.0, t);
    // Signs chosen so that -(v'' + (1-nu)/r v') = f holds.
    const cplx C = g + B[0] / nu;
    CVec& v = sol.v_z.values;
    CVec& v1 = *sol.v_z.d1;
    CVec& v2 = *sol.v_z.d2;
    for (size_t i = 0; i < n; ++i) {
        const double r = grid.r(static_cast<int>(i));
        const double rn = std::pow(r, nu);
        v[i] = C * rn - rn * A[i] / nu - B[i] / nu;
        v1[i] = -rn / r * A[i] + C * nu * rn / r;
        v2[i] = -f[i] - (1.0 - nu) / r * v1[i];
    }
    v[0] = g;
    return sol;
}

RadialProfile solve_swirl_mode(const RadialGrid& grid, int k, double nu, const CVec& f, cplx g,
                               const ModeKernels* kernels, ScaledComplex* v_bar) {
    check_size(grid, f, "solve_swirl_mode");
    if (k == 0) throw std::domain_error("solve_swirl_mode: k != 0 required");
    ModeKernels local;
    if (!kernels || kernels->k != k || kernels->nu != nu) {
        local = ModeKernels::build(grid, k, nu);
        kernels = &local;
    }
    const KernelTable& T = kernels->swirl;
    const double kappa = T.kappa;
    const size_t n = static_cast<size_t>(grid.size());
    CVec a(n), b(n);
    for (size_t i = 0; i < n; ++i) {
        const double w = std::pow(grid.r(static_cast<int>(i)), 1.0 - nu);
        a[i] = f[i] * w * T.i[i];
        b[i] = f[i] * w * T.k[i];
    }
    const GreenParts gp = green_parts(grid, a, b, kappa, "swirl mode " + std::to_string(k));
    const cplx c0 = (g - T.i[0] * gp.outer[0]) / T.k[0];
    if (v_bar) *v_bar = {c0, kappa};
    const RVec E = boundary_decay(grid, kappa);
    RadialProfile out = RadialProfile::zeros(n);
    const double k2 = kappa * kappa;
    for (size_t i = 0; i < n; ++i) {
        const double r = grid.r(static_cast<int>(i));
        const cplx v = c0 * T.k[i] * E[i] + T.k[i] * gp.inner[i] + T.i[i] * gp.outer[i];
        const cplx v1 = c0 * T.kd[i] * E[i] + T.kd[i] * gp.inner[i] + T.id[i] * gp.outer[i];
        out.values[i] = v;
        (*out.d1)[i] = v1;
        (*out.d2)[i] = -f[i] - (1.0 - nu) / r * v1 + ((1.0 + nu) / (r * r) + k2) * v;
    }
    out.values[0] = g;
    return out;
}

MeridionalModeSolution solve_meridional_mode(const RadialGrid& grid, int k, double nu,
                                             const MeridionalForcing& fc, cplx g_r, cplx g_z,
                                             const ModeKernels* kernels) {
    if (k == 0) throw std::domain_error("solve_meridional_mode: k != 0 required");
    check_size(grid, fc.f_r, "solve_meridional_mode f_r");
    check_size(grid, fc.f_z, "solve_meridional_mode f_z");
    if (fc.path == VorticityForcingPath::direct) {
        if (!fc.f_z_prime) throw std::invalid_argument("solve_meridional_mode: direct path needs f_z'");
        check_size(grid, *fc.f_z_prime, "solve_meridional_mode f_z'");
    }
    ModeKernels local;
    if (!kernels || kernels->k != k || kernels->nu != nu) {
        local = ModeKernels::build(grid, k, nu);
        kernels = &local;
    }
    const KernelTable& V = kernels->vorticity;
    const KernelTable& S = kernels->stream;
    const double kappa = V.kappa;
    const double kd = static_cast<double>(k);
    const cplx ik = kI * kd;
    const size_t n = static_cast<size_t>(grid.size());
    const RVec E = boundary_decay(grid, kappa);

    // (1) particular vorticity h_{k,F} and its derivative
    CVec a(n), b(n);
    for (size_t i = 0; i < n; ++i) {
        const double s = grid.r(static_cast<int>(i));
        const double w = std::pow(s, 1.0 - nu);
        if (fc.path == VorticityForcingPath::direct) {
            const cplx F = ik * fc.f_r[i] - (*fc.f_z_prime)[i];
            a[i] = F * w * V.i[i];
            b[i] = F * w * V.k[i];
        } else {
            const double wp = (1.0 - nu) * std::pow(s, -nu);
            a[i] = ik * fc.f_r[i] * w * V.i[i] + fc.f_z[i] * (wp * V.i[i] + w * V.id[i]);
            b[i] = ik * fc.f_r[i] * w * V.k[i] + fc.f_z[i] * (wp * V.k[i] + w * V.kd[i]);
        }
    }
    const GreenParts hp = green_parts(grid, a, b, kappa, "vorticity mode " + std::to_string(k));
    const cplx boundary_term = (fc.path == VorticityForcingPath::direct) ? cplx{} : fc.f_z[0] * V.i[0];
    CVec h(n), h1(n);
    for (size_t i = 0; i < n; ++i) {
        h[i] = boundary_term * V.k[i] * E[i] + V.k[i] * hp.inner[i] + V.i[i] * hp.outer[i];
        h1[i] = boundary_term * V.kd[i] * E[i] + V.kd[i] * hp.inner[i] + V.id[i] * hp.outer[i];
        if (fc.path == VorticityForcingPath::integrated_by_parts) h1[i] += fc.f_z[i];
    }

    // (2) closure coefficients, all carrying a factor e^{-kappa} (D: e^{-2 kappa})
    MeridionalModeSolution sol;
    CVec dint(n), gint(n);
    for (size_t i = 0; i < n; ++i) {
        const double s = grid.r(static_cast<int>(i));
        dint[i] = S.k[i] * s * V.k[i];
        gint[i] = S.k[i] * s * h[i];
    }
    TailSpec td;
    td.label = "closure D";
    const cplx Dh = cumulative_outer(grid, dint, 2.0 * kappa, td)[0];
    TailSpec tg;
    tg.label = "closure G";
    const cplx Gh = cumulative_outer(grid, gint, kappa, tg)[0];
    const cplx Bh = S.k[0];
    const cplx Ah = (S.kd[0] + S.k[0]) / ik;
    if (!(std::abs(Dh) > 1e-250) || !std::isfinite(std::abs(Dh))) {
        throw std::runtime_error("solve_meridional_mode: closure coefficient D_k below the scaled floor");
    }
    sol.closure = {{Ah, -kappa}, {Bh, -kappa}, {Dh, -2.0 * kappa}, {Gh, -kappa}};
    const cplx wh = (Ah * g_r + Bh * g_z - Gh) / Dh;
    sol.w_bar = {wh, kappa};

    // (3) vorticity
    sol.w = RadialProfile::zeros(n);
    CVec& w = sol.w.values;
    CVec& w1 = *sol.w.d1;
    for (size_t i = 0; i < n; ++i) {
        w[i] = wh * V.k[i] * E[i] + h[i];
        w1[i] = wh * V.kd[i] * E[i] + h1[i];
    }

    // (4) stream function
    const cplx ph = -S.i[0] * g_z + (kI * g_r / kd) * (S.i[0] + S.id[0]);
    sol.phi_bar = {ph, kappa};
    CVec pa(n), pb(n);
    for (size_t i = 0; i < n; ++i) {
        const double s = grid.r(static_cast<int>(i));
        pa[i] = S.i[i] * s * w[i];
        pb[i] = S.k[i] * s * w[i];
    }
    const GreenParts pp = green_parts(grid, pa, pb, kappa, "stream mode " + std::to_string(k));
    sol.phi = RadialProfile::zeros(n);
    CVec& phi = sol.phi.values;
    CVec& phi1 = *sol.phi.d1;
    CVec& phi2 = *sol.phi.d2;
    const double k2 = kd * kd;
    for (size_t i = 0; i < n; ++i) {
        const double r = grid.r(static_cast<int>(i));
        phi[i] = ph * S.k[i] * E[i] + S.k[i] * pp.inner[i] + S.i[i] * pp.outer[i];
        phi1[i] = ph * S.kd[i] * E[i] + S.kd[i] * pp.inner[i] + S.id[i] * pp.outer[i];
        phi2[i] = -w[i] - phi1[i] / r + phi[i] / (r * r) + k2 * phi[i];
    }
    // w'' from the vorticity equation, for completeness of the profile
    {
        const CVec Fv = [&] {
            CVec F(n);
            if (fc.path == VorticityForcingPath::direct) {
                for (size_t i = 0; i < n; ++i) F[i] = ik * fc.f_r[i] - (*fc.f_z_prime)[i];
            } else {
                const FiniteDifference fd(grid);
                const CVec fz1 = fd.d1(fc.f_z);
                for (size_t i = 0; i < n; ++i) F[i] = ik * fc.f_r[i] - fz1[i];
            }
            return F;
        }();
        for (size_t i = 0; i < n; ++i) {
            const double r = grid.r(static_cast<int>(i));
            (*sol.w.d2)[i] = -Fv[i] - (1.0 - nu) / r * w1[i] + ((1.0 - nu) / (r * r) + k2) * w[i];
        }
    }

    // (5) velocities
    sol.v_r = RadialProfile::zeros(n);
    sol.v_z = RadialProfile::zeros(n);
    for (size_t i = 0; i < n; ++i) {
        const double r = grid.r(static_cast<int>(i));
        sol.v_r.values[i] = -ik * phi[i];
        (*sol.v_r.d1)[i] = -ik * phi1[i];
        (*sol.v_r.d2)[i] = -ik * phi2[i];
        sol.v_z.values[i] = phi1[i] + phi[i] / r;
        (*sol.v_z.d1)[i] = -w[i] + k2 * phi[i];
        (*sol.v_z.d2)[i] = -w1[i] + k2 * phi1[i];
    }
    return sol;
}

RadialProfile recover_pressure(const RadialGrid& grid, int k, double nu, const RadialProfile& v_z,
                               const CVec& fbar_r, const CVec& fbar_z) {
    const size_t n = static_cast<size_t>(grid.size());
    RadialProfile out;
    if (k == 0) {
        check_size(grid, fbar_r, "recover_pressure");
        TailSpec t;
        t.label = "zero-mode pressure";
        const CVec L = cumulative_outer(grid, fbar_r, 0.0, t);
        out.values.resize(n);
        for (size_t i = 0; i < n; ++i) out.values[i] = -L[i];
        out.d1 = fbar_r;
        return out;
    }
    if (!v_z.has_derivatives()) throw std::invalid_argument("recover_pressure: v_z needs d1 and d2");
    check_size(grid, fbar_z, "recover_pressure");
    const cplx ik{0.0, static_cast<double>(k)};
    const double k2 = static_cast<double>(k) * k;
    out.values.resize(n);
    for (size_t i = 0; i < n; ++i) {
        const double r = grid.r(static_cast<int>(i));
        out.values[i] = (fbar_z[i] + (*v_z.d2)[i] + (1.0 - nu) / r * (*v_z.d1)[i] - k2 * v_z.values[i]) / ik;
    }
    return out;
}

}  // namespace asns
