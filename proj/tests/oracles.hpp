#pragma once

// Independent reference computations used by the tests.  Nothing here calls
// into the library's numerics except the grid class.

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

#include "asns/radial_numerics.hpp"

namespace oracle {

using cplx = std::complex<double>;

// I_a(x) by its power series, term ratio recursion.
inline double bessel_i_series(double a, double x) {
    const double q = 0.25 * x * x;
    double term = std::pow(0.5 * x, a) / std::tgamma(a + 1.0);
    double sum = term;
    for (int m = 1; m < 500; ++m) {
        term *= q / (m * (m + a));
        sum += term;
        if (term < 1e-18 * sum) break;
    }
    return sum;
}

// e^{x} K_a(x) = int_0^inf exp(-x (cosh t - 1)) cosh(a t) dt, trapezoid rule
// (spectrally accurate for this integrand).
inline double bessel_k_scaled_integral(double a, double x) {
    const double h = 0.01;
    double sum = 0.5;
    for (int j = 1; j < 200000; ++j) {
        const double t = j * h;
        const double term = std::exp(-x * (std::cosh(t) - 1.0) + a * t) * 0.5 * (1.0 + std::exp(-2.0 * a * t));
        sum += term;
        if (term < 1e-20 * sum && x * (std::cosh(t) - 1.0) > 50.0) break;
    }
    return sum * h;
}

inline double bessel_k_integral(double a, double x) { return bessel_k_scaled_integral(a, x) * std::exp(-x); }

// K_a'(x) = -(K_{a-1}(x) + K_{a+1}(x)) / 2
inline double bessel_k_prime_integral(double a, double x) {
    return -0.5 * (bessel_k_integral(a - 1.0, x) + bessel_k_integral(a + 1.0, x));
}

inline double bessel_i_prime_series(double a, double x) {
    // I_a' = I_{a+1} + (a / x) I_a
    return bessel_i_series(a + 1.0, x) + a / x * bessel_i_series(a, x);
}

// Naive physical-space product of two truncated Fourier series, followed by a
// direct DFT back to modes |k| <= K_out.  Modes are indexed k + K.
inline std::vector<cplx> product_by_sampling(const std::vector<cplx>& a, const std::vector<cplx>& b, int K,
                                             int K_out) {
    const int M = 4 * K + 3;
    std::vector<cplx> prod(static_cast<size_t>(M));
    for (int j = 0; j < M; ++j) {
        const double z = 2.0 * std::numbers::pi * j / M;
        cplx sa{}, sb{};
        for (int k = -K; k <= K; ++k) {
            const cplx e = std::exp(cplx(0.0, k * z));
            sa += a[static_cast<size_t>(k + K)] * e;
            sb += b[static_cast<size_t>(k + K)] * e;
        }
        prod[static_cast<size_t>(j)] = sa * sb;
    }
    std::vector<cplx> out(static_cast<size_t>(2 * K_out + 1));
    for (int k = -K_out; k <= K_out; ++k) {
        cplx s{};
        for (int j = 0; j < M; ++j) {
            s += prod[static_cast<size_t>(j)] * std::exp(cplx(0.0, -k * 2.0 * std::numbers::pi * j / M));
        }
        out[static_cast<size_t>(k + K_out)] = s / static_cast<double>(M);
    }
    return out;
}

// Second-order finite differences on the nonuniform grid for the coupled
// vorticity / stream function problem of one nonzero mode:
//   w'' + (1-nu)/r w' - ((1-nu)/r^2 + k^2) w = -F
//   phi'' + phi'/r - phi/r^2 - k^2 phi = -w
// with phi(1) = i g_r / k, phi'(1) + phi(1) = g_z and decaying Robin conditions
// at R for both unknowns.  Returns v_z = phi' + phi/r on the nodes.
struct CoupledResult {
    std::vector<cplx> v_r, v_z;
};

inline CoupledResult coupled_fd(const asns::RadialGrid& g, int k, double nu, const std::function<cplx(double)>& F,
                                cplx g_r, cplx g_z) {
    const int n = g.size();
    const double kd = k;
    using T = Eigen::Triplet<cplx>;
    std::vector<T> trip;
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(2 * n);
    auto W = [](int i) { return 2 * i; };
    auto P = [](int i) { return 2 * i + 1; };
    const double R = g.r_max();
    const double robin = -kd - 0.5 / R;  // e^{-k r} r^{-1/2}
    for (int i = 0; i < n; ++i) {
        const double r = g.r(i);
        if (i == 0) {
            // w(1) is unknown: the extra stream condition closes the system
            const double h1 = g.r(1) - r, h2 = g.r(2) - r;
            // phi'(1) one-sided, second order
            const double c0 = -(h1 + h2) / (h1 * h2), c1 = h2 / (h1 * (h2 - h1)), c2 = -h1 / (h2 * (h2 - h1));
            trip.emplace_back(W(0), P(0), c0 + 1.0);
            trip.emplace_back(W(0), P(1), c1);
            trip.emplace_back(W(0), P(2), c2);
            rhs(W(0)) = g_z;
            trip.emplace_back(P(0), P(0), 1.0);
            rhs(P(0)) = cplx(0.0, 1.0) * g_r / kd;
            continue;
        }
        if (i == n - 1) {
            const double h1 = r - g.r(n - 2), h2 = r - g.r(n - 3);
            const double c0 = (h1 + h2) / (h1 * h2), c1 = -h2 / (h1 * (h2 - h1)), c2 = h1 / (h2 * (h2 - h1));
            for (int off : {0, 1}) {
                trip.emplace_back(2 * i + off, 2 * i + off, c0 - robin);
                trip.emplace_back(2 * i + off, 2 * (i - 1) + off, c1);
                trip.emplace_back(2 * i + off, 2 * (i - 2) + off, c2);
            }
            continue;
        }
        const double hm = r - g.r(i - 1), hp = g.r(i + 1) - r;
        const double d2m = 2.0 / (hm * (hm + hp)), d2p = 2.0 / (hp * (hm + hp)), d2c = -2.0 / (hm * hp);
        const double d1m = -hp / (hm * (hm + hp)), d1p = hm / (hp * (hm + hp)), d1c = (hp - hm) / (hm * hp);
        const double a1 = (1.0 - nu) / r, a0 = -((1.0 - nu) / (r * r) + kd * kd);
        trip.emplace_back(W(i), W(i - 1), d2m + a1 * d1m);
        trip.emplace_back(W(i), W(i + 1), d2p + a1 * d1p);
        trip.emplace_back(W(i), W(i), d2c + a1 * d1c + a0);
        rhs(W(i)) = -F(r);
        const double b1 = 1.0 / r, b0 = -(1.0 / (r * r) + kd * kd);
        trip.emplace_back(P(i), P(i - 1), d2m + b1 * d1m);
        trip.emplace_back(P(i), P(i + 1), d2p + b1 * d1p);
        trip.emplace_back(P(i), P(i), d2c + b1 * d1c + b0);
        trip.emplace_back(P(i), W(i), 1.0);
    }
    Eigen::SparseMatrix<cplx> A(2 * n, 2 * n);
    A.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<Eigen::SparseMatrix<cplx>> lu;
    lu.compute(A);
    const Eigen::VectorXcd x = lu.solve(rhs);
    CoupledResult out;
    out.v_r.resize(static_cast<size_t>(n));
    out.v_z.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double r = g.r(i);
        double dm, dc, dp;
        int im, ip;
        if (i == 0 || i == n - 1) {
            // one-sided three point
            const int s = i == 0 ? 1 : -1;
            im = i + s;
            ip = i + 2 * s;
            const double h1 = g.r(im) - r, h2 = g.r(ip) - r;
            dc = -(h1 + h2) / (h1 * h2);
            dm = h2 / (h1 * (h2 - h1));
            dp = -h1 / (h2 * (h2 - h1));
        } else {
            im = i - 1;
            ip = i + 1;
            const double hm = r - g.r(im), hp = g.r(ip) - r;
            dm = -hp / (hm * (hm + hp));
            dp = hm / (hp * (hm + hp));
            dc = (hp - hm) / (hm * hp);
        }
        const cplx phi = x(P(i));
        const cplx d1 = dc * phi + dm * x(P(im)) + dp * x(P(ip));
        out.v_r[static_cast<size_t>(i)] = cplx(0.0, -kd) * phi;
        out.v_z[static_cast<size_t>(i)] = d1 + phi / r;
    }
    return out;
}

inline double max_abs_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    double m = 0.0;
    for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace oracle
