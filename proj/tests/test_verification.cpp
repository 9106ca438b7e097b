#include <cmath>
#include <random>

#include "asns/nonlinear_solver.hpp"
#include "asns/verification.hpp"
#include "doctest.h"

using namespace asns;

namespace {

FourierField zero_field(int K, size_t n) {
    FourierField f(K, n);
    for (int k = -K; k <= K; ++k)
        for (Component c : kComponents) f.at(c, k) = RadialProfile::zeros(n, true);
    return f;
}

struct Solved {
    SolutionBundle b;
    ForcingData f;
    BoundaryData g;
    RadialGrid grid;
};

Solved solved_case() {
    SolverConfig cfg;
    cfg.nu = -3.0;
    cfg.mu = 1.0;
    cfg.n_radial = 512;
    cfg.r_max = 40.0;
    cfg.k_max = 4;
    BoundaryData g;
    g.set_real_field(Component::theta, 1, 1e-3);
    g.set_real_field(Component::r, 2, cplx(2e-4, 1e-4));
    ForcingData f;
    ForcingTerm t;
    t.amplitude = 1e-3;
    t.exponent = 5.0;
    f.add_real_field(Component::theta, 0, t);
    return {picard_solve(cfg, f, g), f, g, cfg.make_grid()};
}

}  // namespace

TEST_CASE("background flow has zero residual") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> nu_d(-6.0, -0.1), mu_d(-5.0, 5.0);
    const RadialGrid g(128, 50.0, 2.0);
    const FourierField v = zero_field(2, static_cast<size_t>(g.size()));
    const ModeSeries p(5, CVec(static_cast<size_t>(g.size()), cplx{}));
    for (int trial = 0; trial < 5; ++trial) {
        const Background bg{nu_d(rng), mu_d(rng)};
        const ResidualReport r = residual_asns(v, g, bg, ForcingData{}, nullptr, &p);
        CHECK(r.inner.max_momentum() <= 1e-12);
        CHECK(r.outer.max_momentum() <= 1e-12);
        CHECK(r.inner.divergence <= 1e-12);
    }
}

TEST_CASE("converged solution: small residuals, decay fits, shift invariance") {
    const Solved s = solved_case();
    REQUIRE(s.b.converged());
    const ModeSeries p = recover_pressure_field(s.b, s.f, s.grid);
    const ResidualReport r = residual_asns(s.b.v, s.grid, s.b.background(), s.f, &s.g, &p);
    CHECK(r.inner.momentum_theta < 1e-7);
    CHECK(*r.inner.momentum_r < 1e-7);
    CHECK(*r.inner.momentum_z < 1e-7);
    CHECK(r.inner.divergence < 1e-9);
    // meridional boundary values hold to quadrature accuracy at this resolution
    CHECK(r.max_boundary_mismatch < 5e-11);
    CHECK(r.imag_residue < 1e-15);
    CHECK(r.decay_fits.count("theta_0") == 1);
    CHECK(r.decay_fits.at("theta_1").exponent < -3.0);

    ResidualOptions shifted;
    shifted.z_shift = 0.37;
    const ResidualReport r2 = residual_asns(s.b.v, s.grid, s.b.background(), s.f, &s.g, &p, shifted);
    CHECK(std::abs(r2.inner.max_momentum() - r.inner.max_momentum()) <= 1e-12);
}

TEST_CASE("a perturbed mode is detected") {
    const Solved s = solved_case();
    const ModeSeries p = recover_pressure_field(s.b, s.f, s.grid);
    FourierField bad = s.b.v;
    bad.at(Component::z, 1).values[100] += 1e-5;
    bad.fill_conjugates();
    const ResidualReport r = residual_asns(bad, s.grid, s.b.background(), s.f, &s.g, &p);
    CHECK(r.inner.max_momentum() > 1e-3);
    double worst_r = 0.0, worst = 0.0;
    for (const auto& row : r.curve) {
        if (row.momentum_z > worst) {
            worst = row.momentum_z;
            worst_r = row.r;
        }
    }
    CHECK(worst_r == doctest::Approx(s.grid.r(100)).epsilon(0.05));
}

TEST_CASE("boundary mismatch is reported") {
    const Solved s = solved_case();
    BoundaryData g = s.g;
    g.set_real_field(Component::z, 3, 1e-4);
    const ResidualReport r = residual_asns(s.b.v, s.grid, s.b.background(), s.f, &g);
    CHECK(r.max_boundary_mismatch == doctest::Approx(1e-4));
    CHECK(!r.inner.momentum_r);
}

TEST_CASE("decay fit over the last decade") {
    const RadialGrid g(256, 100.0, 2.0);
    const CVec s = sample(g, [](double r) { return cplx(std::pow(r, -1.75)); });
    const DecayFit f = decay_fit(g, s);
    CHECK(f.exponent == doctest::Approx(-1.75));
    CHECK(f.r_squared > 0.999999);
    CHECK_THROWS_AS(decay_fit(g, CVec(static_cast<size_t>(g.size()), cplx{})), std::domain_error);
}
