#include <cmath>
#include <random>

#include "asns/fourier_core.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace asns;

namespace {

ModeSeries random_real_series(int K, size_t n, std::mt19937& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    ModeSeries s(static_cast<size_t>(2 * K + 1), CVec(n));
    for (size_t i = 0; i < n; ++i) {
        s[static_cast<size_t>(K)][i] = u(rng);
        for (int k = 1; k <= K; ++k) {
            const cplx c(u(rng), u(rng));
            s[static_cast<size_t>(K + k)][i] = c;
            s[static_cast<size_t>(K - k)][i] = std::conj(c);
        }
    }
    return s;
}

}  // namespace

TEST_CASE("convolution equals the sampled product") {
    std::mt19937 rng(7);
    const int K = 5;
    const size_t n = 4;
    const ModeSeries a = random_real_series(K, n, rng);
    const ModeSeries b = random_real_series(K, n, rng);
    double discarded = 0.0;
    const ModeSeries c = convolve_product(a, b, K, &discarded);
    double tail = 0.0;
    for (size_t i = 0; i < n; ++i) {
        std::vector<cplx> ai, bi;
        for (int k = -K; k <= K; ++k) {
            ai.push_back(a[static_cast<size_t>(k + K)][i]);
            bi.push_back(b[static_cast<size_t>(k + K)][i]);
        }
        const auto full = oracle::product_by_sampling(ai, bi, K, 2 * K);
        for (int k = -K; k <= K; ++k) {
            CHECK(std::abs(c[static_cast<size_t>(k + K)][i] - full[static_cast<size_t>(k + 2 * K)]) < 1e-13);
        }
        for (int k = K + 1; k <= 2 * K; ++k) {
            tail = std::max({tail, std::abs(full[static_cast<size_t>(k + 2 * K)]),
                             std::abs(full[static_cast<size_t>(2 * K - k)])});
        }
    }
    CHECK(discarded == doctest::Approx(tail).epsilon(1e-12));
}

TEST_CASE("z derivative multiplies by (ik)^order") {
    ModeSeries s(5, CVec(1, cplx(1.0, 0.0)));
    const ModeSeries d1 = z_derivative(s, 1);
    const ModeSeries d2 = z_derivative(s, 2);
    CHECK(d1[4][0] == cplx(0.0, 2.0));
    CHECK(d1[0][0] == cplx(0.0, -2.0));
    CHECK(d2[3][0] == cplx(-1.0, 0.0));
    CHECK(d1[2][0] == cplx(0.0, 0.0));
}

TEST_CASE("conjugate fill and symmetry defect") {
    FourierField f(2, 3);
    for (Component c : kComponents) {
        for (int k = 0; k <= 2; ++k) f.at(c, k) = RadialProfile::zeros(3, true);
        for (int k = -2; k < 0; ++k) f.at(c, k) = RadialProfile::zeros(3, true);
    }
    f.at(Component::z, 2).values[1] = cplx(0.5, -0.25);
    CHECK(f.symmetry_defect() > 0.5);
    f.fill_conjugates();
    CHECK(f.symmetry_defect() == 0.0);
    CHECK(f.at(Component::z, -2).values[1] == cplx(0.5, 0.25));
}

TEST_CASE("boundary data rules") {
    BoundaryData g;
    CHECK_THROWS_WITH_AS(g.set(Component::r, 0, 0.1), doctest::Contains("g_{r,0}"), std::invalid_argument);
    g.set_real_field(Component::theta, 1, cplx(1e-3, 2e-3));
    CHECK(g.get(Component::theta, -1) == cplx(1e-3, -2e-3));
    CHECK_THROWS(g.set_real_field(Component::z, 0, cplx(0.0, 1.0)));
    CHECK_THROWS(g.set_real_field(Component::z, -1, cplx(1.0, 0.0)));
    g.set_real_field(Component::z, 0, 0.5);
    CHECK(g.max_mode() == 1);
    // (1 + k^2) weights: 2 * 2 * |1e-3 + 2e-3 i| + 0.5
    CHECK(vnorm(g) == doctest::Approx(4.0 * std::abs(cplx(1e-3, 2e-3)) + 0.5));
}

TEST_CASE("forcing terms, validation and rendering") {
    ForcingTerm t;
    t.amplitude = 2.0;
    t.exponent = 4.5;
    CHECK(t(2.0).real() == doctest::Approx(2.0 * std::pow(2.0, -4.5)));
    CHECK(t.render() == "power_decay(2, 4.5)");
    ForcingTerm e;
    e.family = ForcingFamily::power_exp_decay;
    e.amplitude = 1.0;
    e.exponent = 1.0;
    e.rate = 2.0;
    CHECK(e(3.0).real() == doctest::Approx(std::exp(-4.0) / 3.0));

    ForcingData f;
    f.add_real_field(Component::theta, 0, t);
    f.add_real_field(Component::r, 2, e);
    CHECK(f.has(Component::r, -2));
    CHECK(*f.declared_decay(Component::theta, 0) == 4.5);
    CHECK_NOTHROW(f.validate(4.0, 3.0, 2.0));
    CHECK_THROWS_WITH(f.validate(3.0, 3.0, 2.0), "lambda_theta > 3 required");
    CHECK_THROWS_WITH(f.validate(4.0, 2.0, 2.0), "lambda_z > 2 required");
    CHECK_THROWS_WITH(f.validate(4.0, 3.0, 1.5), "lambda > 3/2 required");
    CHECK_THROWS_WITH(f.validate(5.0, 3.0, 2.0), doctest::Contains("slower than lambda_theta"));
}

TEST_CASE("synthesis at a node sums the modes") {
    const RadialGrid g(16, 10.0, 2.0);
    FourierField f(1, static_cast<size_t>(g.size()));
    for (Component c : kComponents)
        for (int k = -1; k <= 1; ++k) f.at(c, k) = RadialProfile::zeros(static_cast<size_t>(g.size()));
    f.at(Component::r, 1).values[3] = cplx(0.5, 0.5);
    f.fill_conjugates();
    const double z = 0.7;
    const Velocity v = synthesize_node(f, g, 3, z, Background{-2.0, 1.0});
    const double r = g.r(3);
    CHECK(v.r == doctest::Approx(-2.0 / r + 2.0 * (0.5 * std::cos(z) - 0.5 * std::sin(z))));
    CHECK(v.theta == doctest::Approx(1.0 / r));
    CHECK(v.imag_residue < 1e-15);
    CHECK_THROWS(synthesize(f, g, 11.0, 0.0));
}

TEST_CASE("bnorm weights of a single swirl profile") {
    const RadialGrid g(64, 20.0, 2.0);
    const size_t n = static_cast<size_t>(g.size());
    FourierField f(1, n);
    for (Component c : kComponents)
        for (int k = -1; k <= 1; ++k) f.at(c, k) = RadialProfile::zeros(n, true);
    // v_{theta,0} = r^{-3}: sup r^{3+tau} |v''| + r^{2+tau} |v'| + r^{1+tau} |v| at r = 1 for tau <= 1
    RadialProfile& p = f.at(Component::theta, 0);
    for (size_t i = 0; i < n; ++i) {
        const double r = g.r(static_cast<int>(i));
        p.values[i] = std::pow(r, -3.0);
        (*p.d1)[i] = -3.0 * std::pow(r, -4.0);
        (*p.d2)[i] = 12.0 * std::pow(r, -5.0);
    }
    const BNormParts b = bnorm_parts(f, g, 0.5);
    CHECK(b.swirl_zero == doctest::Approx(12.0 + 3.0 + 1.0));
    CHECK(b.nonzero == 0.0);
    CHECK(bnorm(f, g, 0.5) == doctest::Approx(16.0));
    FourierField missing(0, n);
    for (Component c : kComponents) missing.at(c, 0) = RadialProfile::zeros(n, false);
    CHECK_THROWS(bnorm(missing, g, 0.5));
}

TEST_CASE("component names round trip") {
    for (Component c : kComponents) CHECK(*parse_component(component_name(c)) == c);
    CHECK(*parse_component("th") == Component::theta);
    CHECK(!parse_component("x"));
}
