#include <atomic>
#include <cmath>
#include <numbers>
#include <set>

#include "asns/nonlinear_solver.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace asns;

namespace {

// Smooth real field with analytic radial derivatives: mode k of component c is
// a_{c,k} e^{-(k+1)(r-1)/2} / r, conjugated for k < 0.
FourierField smooth_field(const RadialGrid& g, int K, std::optional<double> sigma) {
    const size_t n = static_cast<size_t>(g.size());
    FourierField f(K, n);
    for (int k = 0; k <= K; ++k) {
        for (Component c : kComponents) {
            RadialProfile p = RadialProfile::zeros(n, true);
            const cplx a = c == Component::r && k == 0
                               ? cplx{}
                               : cplx(1e-2 * (1 + static_cast<int>(c)), k == 0 ? 0.0 : 3e-3 * k);
            const double b = 0.5 * (k + 1);
            for (size_t i = 0; i < n; ++i) {
                const double r = g.r(static_cast<int>(i));
                const double e = std::exp(-b * (r - 1.0));
                p.values[i] = a * e / r;
                (*p.d1)[i] = a * e * (-b / r - 1.0 / (r * r));
                (*p.d2)[i] = a * e * (b * b / r + 2.0 * b / (r * r) + 2.0 / (r * r * r));
            }
            f.at(c, k) = p;
        }
    }
    f.sigma = sigma;
    f.fill_conjugates();
    return f;
}

}  // namespace

TEST_CASE("tau from the decay exponents") {
    CHECK(compute_tau(-1.0, 4.0, 3.0, 2.0) == doctest::Approx(0.5));
    // nu = -3: the caps 2 - nu/2 = 3.5 bind
    const TauInfo t = compute_tau_info(-3.0, 10.0, 10.0, 10.0);
    CHECK(t.lambda_bar_theta == doctest::Approx(3.5));
    CHECK(t.lambda_bar_z == doctest::Approx(3.5));
    CHECK(t.tau == doctest::Approx(0.5));
    CHECK(compute_tau(-1.0, 10.0, 10.0, 10.0) == doctest::Approx(0.5));
    CHECK(compute_tau(-6.0, 10.0, 10.0, 10.0) == doctest::Approx(2.0));
    CHECK_THROWS_WITH(compute_tau(-1.0, 3.0, 3.0, 2.0), "lambda_theta > 3 required");
    CHECK_THROWS_WITH(compute_tau(-1.0, 4.0, 2.0, 2.0), "lambda_z > 2 required");
    CHECK_THROWS_WITH(compute_tau(-1.0, 4.0, 3.0, 1.5), "lambda > 3/2 required");
    CHECK_THROWS_WITH(compute_tau(1.0, 4.0, 3.0, 2.0), "nu < 0 required");
}

TEST_CASE("quadratic right-hand side against a physical-space evaluation") {
    const RadialGrid g(64, 20.0, 2.0);
    const int K = 3;
    const FourierField v = smooth_field(g, K, 0.05);
    ForcingData f;
    ForcingTerm t;
    t.amplitude = 1e-3;
    t.exponent = 5.0;
    f.add_real_field(Component::theta, 1, t);
    const ModeForcingSet rhs = assemble_rhs(v, f, g);

    const int M = 4 * K + 3;
    double worst = 0.0;
    for (int i = 0; i < g.size(); i += 7) {
        const auto u = static_cast<size_t>(i);
        const double r = g.r(i);
        std::vector<cplx> Fr(static_cast<size_t>(M)), Ft(static_cast<size_t>(M)), Fz(static_cast<size_t>(M));
        for (int j = 0; j < M; ++j) {
            const double z = 2.0 * std::numbers::pi * j / M;
            double ur = 0, ut = 0.05 / r, uz = 0, urr = 0, utr = -0.05 / (r * r), uzr = 0, urz = 0, utz = 0, uzz = 0;
            for (int k = -K; k <= K; ++k) {
                const cplx e = std::exp(cplx(0.0, k * z));
                const cplx ik(0.0, k);
                ur += (v.at(Component::r, k).values[u] * e).real();
                ut += (v.at(Component::theta, k).values[u] * e).real();
                uz += (v.at(Component::z, k).values[u] * e).real();
                urr += ((*v.at(Component::r, k).d1)[u] * e).real();
                utr += ((*v.at(Component::theta, k).d1)[u] * e).real();
                uzr += ((*v.at(Component::z, k).d1)[u] * e).real();
                urz += (ik * v.at(Component::r, k).values[u] * e).real();
                utz += (ik * v.at(Component::theta, k).values[u] * e).real();
                uzz += (ik * v.at(Component::z, k).values[u] * e).real();
            }
            const double ft = 2.0 * 1e-3 * std::pow(r, -5.0) * std::cos(z);
            Fr[static_cast<size_t>(j)] = -(ur * urr + uz * urz) + ut * ut / r;
            Ft[static_cast<size_t>(j)] = -(ur * utr + uz * utz) - ur * ut / r + ft;
            Fz[static_cast<size_t>(j)] = -(ur * uzr + uz * uzz);
        }
        auto mode = [&](const std::vector<cplx>& s, int k) {
            cplx a{};
            for (int j = 0; j < M; ++j) a += s[static_cast<size_t>(j)] * std::exp(cplx(0.0, -k * 2.0 * std::numbers::pi * j / M));
            return a / static_cast<double>(M);
        };
        for (int k = -K; k <= K; ++k) {
            const auto ku = static_cast<size_t>(k + K);
            worst = std::max(worst, std::abs(rhs.f_theta[ku][u] - mode(Ft, k)));
            worst = std::max(worst, std::abs(rhs.f_z[ku][u] - mode(Fz, k)));
            const cplx fr_expected = k == 0 ? cplx{} : mode(Fr, k);
            worst = std::max(worst, std::abs(rhs.f_r[ku][u] - fr_expected));
        }
        worst = std::max(worst, std::abs(rhs.audit.discarded_fr0[u] - mode(Fr, 0)));
    }
    CHECK(worst < 1e-15);
    CHECK(rhs.audit.discarded_fr0_max > 0.0);
    CHECK(rhs.audit.truncation_tail > 0.0);
}

TEST_CASE("zero data gives the zero solution after one iteration") {
    SolverConfig cfg;
    cfg.n_radial = 128;
    cfg.r_max = 30.0;
    cfg.k_max = 2;
    const SolutionBundle b = picard_solve(cfg, ForcingData{}, BoundaryData{});
    CHECK(b.converged());
    CHECK(b.state.iter == 1);
    CHECK(b.bnorm == 0.0);
}

TEST_CASE("small data: contraction, boundary values and linear scaling") {
    SolverConfig cfg;
    cfg.nu = -1.0;
    cfg.mu = 1.0;
    cfg.n_radial = 256;
    cfg.r_max = 40.0;
    cfg.k_max = 4;
    auto run = [&](double eps) {
        BoundaryData g;
        g.set_real_field(Component::theta, 1, eps);
        return picard_solve(cfg, ForcingData{}, g);
    };
    const SolutionBundle a = run(1e-3);
    const SolutionBundle b = run(5e-4);
    REQUIRE(a.converged());
    REQUIRE(b.converged());
    CHECK(a.state.iter <= 15);
    CHECK(a.state.contraction_estimate < 0.5);
    CHECK(std::abs(a.v.at(Component::theta, 1).values[0] - cplx(1e-3)) < 1e-14);
    // meridional boundary values hold to quadrature accuracy, 4th order in N
    CHECK(std::abs(a.v.at(Component::r, 1).values[0]) < 5e-11);
    CHECK(std::abs(a.v.at(Component::z, 1).values[0]) < 5e-11);
    // zero modes keep round-off imaginary parts from the quadratic terms
    CHECK(a.v.symmetry_defect() < 1e-20);
    const double ra = a.bnorm / 1e-3, rb = b.bnorm / 5e-4;
    CHECK(std::abs(ra - rb) / rb < 0.1);
}

TEST_CASE("thread count does not change the result") {
    SolverConfig cfg;
    cfg.nu = -3.0;
    cfg.mu = 0.5;
    cfg.n_radial = 128;
    cfg.r_max = 30.0;
    cfg.k_max = 3;
    BoundaryData g;
    g.set_real_field(Component::theta, 1, 1e-3);
    g.set_real_field(Component::z, 2, cplx(0.0, 5e-4));
    cfg.threads = 1;
    const SolutionBundle a = picard_solve(cfg, ForcingData{}, g);
    cfg.threads = 3;
    const SolutionBundle b = picard_solve(cfg, ForcingData{}, g);
    double d = 0.0;
    for (int k = -3; k <= 3; ++k)
        for (Component c : kComponents)
            d = std::max(d, oracle::max_abs_diff(a.v.at(c, k).values, b.v.at(c, k).values));
    CHECK(d == 0.0);
}

TEST_CASE("real-field check on the data") {
    SolverConfig cfg;
    cfg.n_radial = 64;
    cfg.r_max = 20.0;
    cfg.k_max = 2;
    BoundaryData g;
    g.set(Component::theta, 1, 1e-3);
    CHECK_THROWS_WITH_AS(picard_solve(cfg, ForcingData{}, g), doctest::Contains("real field"), std::invalid_argument);
}

TEST_CASE("large data is flagged and does not converge silently") {
    SolverConfig cfg;
    cfg.nu = -1.0;
    cfg.n_radial = 128;
    cfg.r_max = 30.0;
    cfg.k_max = 4;
    cfg.max_iters = 30;
    BoundaryData g;
    g.set_real_field(Component::theta, 1, 30.0);
    std::vector<std::string> warnings;
    set_warning_handler([&](const std::string& m) { warnings.push_back(m); });
    const SolutionBundle b = picard_solve(cfg, ForcingData{}, g);
    set_warning_handler([](const std::string&) {});
    CHECK(b.smallness_exceeded);
    CHECK(!warnings.empty());
    CHECK(!b.converged());
    CHECK(!b.state.diagnostic.empty());
}

TEST_CASE("two-solution construction is refused for nu >= -2") {
    SolverConfig cfg;
    cfg.nu = -1.0;
    CHECK_THROWS_WITH_AS(nonuniqueness_pair(cfg, ForcingData{}, BoundaryData{}, 0.05), doctest::Contains("nu < -2"),
                         std::invalid_argument);
}

TEST_CASE("two-solution construction separates by delta_mu") {
    SolverConfig cfg;
    cfg.nu = -3.0;
    cfg.mu = 1.0;
    cfg.n_radial = 256;
    cfg.r_max = 60.0;
    cfg.k_max = 2;
    const NonuniquenessResult r = nonuniqueness_pair(cfg, ForcingData{}, BoundaryData{}, 0.05);
    CHECK(r.first.converged());
    CHECK(r.second.converged());
    // zero data: the first solution is the background itself
    CHECK(r.first.bnorm == 0.0);
    CHECK(r.at_half == doctest::Approx(-0.05).epsilon(0.05));
    CHECK(r.limit_estimate == doctest::Approx(-0.05).epsilon(1e-3));
    CHECK(r.bnorm_distance > 1e-6);
}

TEST_CASE("contraction estimate is the geometric mean of recent ratios") {
    CHECK(contraction_from_history({1.0, 0.1, 0.01, 0.001}) == doctest::Approx(0.1));
    CHECK(contraction_from_history({1.0}) == 0.0);
}

TEST_CASE("parallel_for visits every index once and rethrows") {
    std::vector<std::atomic<int>> hits(50);
    parallel_for(50, 4, [&](int i) { hits[static_cast<size_t>(i)]++; });
    for (auto& h : hits) CHECK(h.load() == 1);
    CHECK_THROWS_AS(parallel_for(10, 3, [](int i) {
                        if (i == 7) throw std::runtime_error("boom");
                    }),
                    std::runtime_error);
}
