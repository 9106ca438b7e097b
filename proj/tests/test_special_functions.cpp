#include <cmath>
#include <numbers>

#include "asns/special_functions.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace asns;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_CASE("bessel_i matches the power series") {
    for (double a : {0.0, 0.5, 1.0, 1.5, 2.5, 3.7}) {
        for (double x : {0.1, 0.7, 2.0, 5.5, 12.0, 30.0}) {
            CHECK(rel(bessel_i(BesselOrder(a), x).value(), oracle::bessel_i_series(a, x)) < 1e-12);
        }
    }
}

TEST_CASE("bessel_k matches the integral representation") {
    for (double a : {0.0, 0.5, 1.0, 1.5, 2.5, 3.7}) {
        for (double x : {0.1, 0.7, 2.0, 5.5, 12.0, 30.0}) {
            CHECK(rel(bessel_k(BesselOrder(a), x).value(), oracle::bessel_k_integral(a, x)) < 1e-11);
        }
    }
}

TEST_CASE("orders near an integer stay accurate") {
    for (double a : {1.0 - 1e-9, 1.0 + 1e-7, 2.0 - 1e-5}) {
        for (double x : {0.3, 3.0}) {
            CHECK(rel(bessel_k(BesselOrder(a), x).value(), oracle::bessel_k_integral(a, x)) < 1e-11);
        }
    }
}

TEST_CASE("half-integer closed forms") {
    for (double x : {0.2, 1.0, 7.0, 40.0}) {
        const double k = std::sqrt(std::numbers::pi / (2.0 * x)) * std::exp(-x);
        CHECK(rel(bessel_k(BesselOrder(0.5), x).value(), k) < 1e-13);
        const double i = std::sqrt(2.0 / (std::numbers::pi * x)) * std::sinh(x);
        CHECK(rel(bessel_i(BesselOrder(0.5), x).value(), i) < 1e-13);
    }
}

TEST_CASE("derivatives against the recurrences") {
    for (double a : {0.0, 1.0, 2.5}) {
        for (double x : {0.5, 4.0, 20.0}) {
            CHECK(rel(bessel_k_prime(BesselOrder(a), x).value(), oracle::bessel_k_prime_integral(a, x)) < 1e-10);
            CHECK(rel(bessel_i_prime(BesselOrder(a), x).value(), oracle::bessel_i_prime_series(a, x)) < 1e-11);
        }
    }
}

TEST_CASE("Wronskian K_a' I_a - K_a I_a' = -1/x") {
    for (double a : {0.0, 1.0, 1.3, 3.0}) {
        for (double x = 0.5; x <= 50.0; x *= 1.37) {
            const BesselIKScaled s = bessel_ik_scaled(BesselOrder(a), x);
            // the exponential scalings cancel in the products
            CHECK(std::abs((s.kp * s.i - s.k * s.ip) * x + 1.0) < 1e-12);
        }
    }
}

TEST_CASE("series and uniform branches agree at the switch point") {
    for (double a : {0.0, 0.5, 1.0, 2.5, 6.0}) {
        const double x = bessel_switch_point(a);
        CHECK(rel(bessel_i_series_scaled(a, x), bessel_i_uniform_scaled(a, x)) < 1e-12);
    }
}

TEST_CASE("scaled output survives arguments beyond the overflow range") {
    const double x = 2000.0;
    const ScaledValue k = bessel_k(BesselOrder(1.0), x);
    const ScaledValue i = bessel_i(BesselOrder(1.0), x);
    REQUIRE(std::isfinite(k.mantissa));
    REQUIRE(std::isfinite(i.mantissa));
    // leading asymptotics sqrt(pi / 2x) e^{-x} and e^{x} / sqrt(2 pi x)
    const double kl = std::log(k.mantissa) + k.exp_shift - (0.5 * std::log(std::numbers::pi / (2 * x)) - x);
    const double il = std::log(i.mantissa) + i.exp_shift - (x - 0.5 * std::log(2 * std::numbers::pi * x));
    CHECK(std::abs(kl) < 1e-3);
    CHECK(std::abs(il) < 1e-3);
}

TEST_CASE("kernel orders of the three families") {
    CHECK(kernel_order(KernelFamily::swirl, -3.0).alpha == doctest::Approx(0.5));
    CHECK(kernel_order(KernelFamily::vorticity, -3.0).alpha == doctest::Approx(2.5));
    CHECK(kernel_order(KernelFamily::stream, -3.0).alpha == doctest::Approx(1.0));
    CHECK(kernel_order(KernelFamily::swirl, -1.0).alpha == doctest::Approx(0.5));
    CHECK_THROWS(BesselOrder(-1.0));
}

TEST_CASE("kernel derivatives are consistent with the values") {
    const double nu = -3.0;
    for (KernelFamily fam : {KernelFamily::swirl, KernelFamily::vorticity, KernelFamily::stream}) {
        for (double r : {1.5, 3.0, 9.0}) {
            const double h = 1e-4;
            auto val = [&](double s) { return kernel_K(2, nu, s, fam).value.value(); };
            const KernelSample ks = kernel_K(2, nu, r, fam);
            const double d1 = (val(r + h) - val(r - h)) / (2 * h);
            const double d2 = (val(r + h) - 2 * val(r) + val(r - h)) / (h * h);
            CHECK(rel(ks.d1.value(), d1) < 1e-7);
            CHECK(rel(ks.d2.value(), d2) < 1e-5);
            // the kernel is r^{nu/2} K_a(k r) except for the stream family
            const double a = kernel_order(fam, nu).alpha;
            const double pre = fam == KernelFamily::stream ? 1.0 : std::pow(r, nu / 2.0);
            CHECK(rel(ks.value.value(), pre * oracle::bessel_k_integral(a, 2.0 * r)) < 1e-11);
        }
    }
}
