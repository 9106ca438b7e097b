#include "asns/special_functions.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace asns {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kFpMin = std::numeric_limits<double>::min() / kEps;
constexpr double kPi = std::numbers::pi;

// Taylor coefficients of 1/Gamma(z) about 0 (Abramowitz & Stegun 6.1.34).
constexpr std::array<double, 26> kRecipGamma = {
    1.0,
    0.5772156649015329,
    -0.6558780715202538,
    -0.0420026350340952,
    0.1665386113822915,
    -0.0421977345555443,
    -0.0096219715278770,
    0.0072189432466630,
    -0.0011651675918591,
    -0.0002152416741149,
    0.0001280502823882,
    -0.0000201348547807,
    -0.0000012504934821,
    0.0000011330272320,
    -0.0000002056338417,
    0.0000000061160950,
    0.0000000050020075,
    -0.0000000011812746,
    0.0000000001043427,
    0.0000000000077823,
    -0.0000000000036968,
    0.0000000000005100,
    -0.0000000000000206,
    -0.0000000000000054,
    0.0000000000000014,
    0.0000000000000001,
};

// gam1 = (1/G(1-mu) - 1/G(1+mu)) / (2 mu), gam2 = (1/G(1-mu) + 1/G(1+mu)) / 2,
// both evaluated without cancellation for |mu| <= 1/2.
void temme_gammas(double mu, double& gam1, double& gam2, double& gampl, double& gammi) {
    // 1/G(1+z) = sum_k c_k z^{k-1}; split by parity and Horner in mu^2.
    const double mu2 = mu * mu;
    double odd = 0.0;   // sum over odd k of c_k mu^{k-1}
    double even = 0.0;  // sum over even k of c_k mu^{k-2}
    for (int k = 25; k >= 1; k -= 2) odd = odd * mu2 + kRecipGamma[k - 1];
    for (int k = 26; k >= 2; k -= 2) even = even * mu2 + kRecipGamma[k - 1];
    gam2 = odd;
    gam1 = -even;
    gampl = gam2 - mu * gam1;  // 1/G(1+mu)
    gammi = gam2 + mu * gam1;  // 1/G(1-mu)
}

void check_argument(double alpha, double x) {
    if (!std::isfinite(x) || !(x > 0.0)) {
        throw std::domain_error("modified Bessel: argument must be finite and positive, got " +
                                std::to_string(x));
    }
    if (!std::isfinite(alpha) || alpha < 0.0) {
        throw std::domain_error("modified Bessel: order must be finite and nonnegative");
    }
}

// K_mu, K_{mu+1} for |mu| <= 1/2, scaled by e^{x}.
void k_fractional_scaled(double mu, double x, double& kmu, double& k1) {
    const double xi = 1.0 / x;
    const double xi2 = 2.0 * xi;
    const double mu2 = mu * mu;
    if (x < 2.0) {
        // Temme's series
        const double x2 = 0.5 * x;
        const double pimu = kPi * mu;
        const double fact = (std::abs(pimu) < kEps ? 1.0 : pimu / std::sin(pimu));
        const double d = -std::log(x2);
        double e = mu * d;
        const double fact2 = (std::abs(e) < kEps ? 1.0 : std::sinh(e) / e);
        double gam1, gam2, gampl, gammi;
        temme_gammas(mu, gam1, gam2, gampl, gammi);
        double ff = fact * (gam1 * std::cosh(e) + gam2 * fact2 * d);
        double sum = ff;
        e = std::exp(e);
        double p = 0.5 * e / gampl;
        double q = 0.5 / (e * gammi);
        double c = 1.0;
        const double dd = x2 * x2;
        double sum1 = p;
        for (int i = 1; i <= 100000; ++i) {
            ff = (i * ff + p + q) / (i * static_cast<double>(i) - mu2);
            c *= dd / i;
            p /= (i - mu);
            q /= (i + mu);
            const double del = c * ff;
            sum += del;
            sum1 += c * (p - i * ff);
            if (std::abs(del) < std::abs(sum) * kEps) break;
        }
        const double scale = std::exp(x);
        kmu = sum * scale;
        k1 = sum1 * xi2 * scale;
        return;
    }
    // Steed's continued fraction
    double b = 2.0 * (1.0 + x);
    double d = 1.0 / b;
    double h = d;
    double delh = d;
    double q1 = 0.0;
    double q2 = 1.0;
    const double a1 = 0.25 - mu2;
    double q = a1;
    double c = a1;
    double a = -a1;
    double s = 1.0 + q * delh;
    int i = 1;
    for (; i < 100000; ++i) {
        a -= 2 * i;
        c = -a * c / (i + 1.0);
        const double qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        const double dels = q * delh;
        s += dels;
        if (std::abs(dels / s) <= kEps) break;
    }
    if (i >= 100000) throw std::runtime_error("modified Bessel: K continued fraction did not converge");
    h = a1 * h;
    kmu = std::sqrt(kPi / (2.0 * x)) / s;
    k1 = kmu * (mu + x + 0.5 - h) * xi;
}

// I'_a / I_a by the modified Lentz continued fraction.
double i_ratio_cf1(double alpha, double x) {
    const double xi = 1.0 / x;
    const double xi2 = 2.0 * xi;
    double h = alpha * xi;
    if (h < kFpMin) h = kFpMin;
    double b = xi2 * alpha;
    double d = 0.0;
    double c = h;
    const long maxit = 100000 + static_cast<long>(20.0 * x);
    long i = 0;
    for (; i < maxit; ++i) {
        b += xi2;
        d = 1.0 / (b + d);
        c = b + 1.0 / c;
        const double del = c * d;
        h = del * h;
        if (std::abs(del - 1.0) <= kEps) break;
    }
    if (i >= maxit) throw std::runtime_error("modified Bessel: I continued fraction did not converge");
    return h;
}

struct KUpward {
    double k;    // K_alpha e^x
    double k1;   // K_{alpha+1} e^x
};

KUpward k_scaled_with_next(double alpha, double x) {
    const int nl = static_cast<int>(alpha + 0.5);
    const double mu = alpha - nl;
    double kmu, k1;
    k_fractional_scaled(mu, x, kmu, k1);
    const double xi2 = 2.0 / x;
    for (int i = 1; i <= nl; ++i) {
        const double kt = (mu + i) * xi2 * k1 + kmu;
        kmu = k1;
        k1 = kt;
    }
    return {kmu, k1};
}

}  // namespace

BesselOrder::BesselOrder(double a) : alpha(a) {
    if (!std::isfinite(a) || a < 0.0) {
        throw std::domain_error("BesselOrder: alpha must be finite and >= 0");
    }
}

BesselOrder kernel_order(KernelFamily family, double nu) {
    switch (family) {
        case KernelFamily::swirl: return BesselOrder(std::abs(1.0 + 0.5 * nu));
        case KernelFamily::vorticity: return BesselOrder(std::abs(1.0 - 0.5 * nu));
        case KernelFamily::stream: return BesselOrder(1.0);
    }
    return BesselOrder(1.0);
}

double bessel_switch_point(double alpha) { return std::max(12.0, 2.0 * alpha * alpha); }

double bessel_i_series_scaled(double alpha, double x) {
    check_argument(alpha, x);
    const double hx = 0.5 * x;
    const double q = hx * hx;
    // log of leading term (x/2)^a / G(a+1), with the e^{-x} scaling folded in
    const double log_t0 = alpha * std::log(hx) - std::lgamma(alpha + 1.0) - x;
    double term = std::exp(log_t0);
    if (term == 0.0) return 0.0;
    double sum = term;
    for (int m = 1; m < 100000; ++m) {
        term *= q / (m * (m + alpha));
        sum += term;
        if (term < kEps * 0.25 * sum) break;
    }
    return sum;
}

double bessel_i_uniform_scaled(double alpha, double x) {
    check_argument(alpha, x);
    const int nl = static_cast<int>(alpha + 0.5);
    const double mu = alpha - nl;
    const double xi = 1.0 / x;
    const double f_alpha = i_ratio_cf1(alpha, x);
    double ril = kFpMin;
    double ripl = f_alpha * ril;
    const double ril1 = ril;
    double fact = alpha * xi;
    for (int l = nl; l >= 1; --l) {
        const double ritemp = fact * ril + ripl;
        fact -= xi;
        ripl = fact * ritemp + ril;
        ril = ritemp;
    }
    const double f = ripl / ril;
    double kmu, k1;
    k_fractional_scaled(mu, x, kmu, k1);
    const double kmup = mu * xi * kmu - k1;
    const double rimu = xi / (f * kmu - kmup);
    return rimu * ril1 / ril;
}

BesselIKScaled bessel_ik_scaled(BesselOrder order, double x) {
    const double alpha = order.alpha;
    check_argument(alpha, x);
    const KUpward ku = k_scaled_with_next(alpha, x);
    BesselIKScaled out;
    out.k = ku.k;
    out.kp = alpha / x * ku.k - ku.k1;
    if (x <= bessel_switch_point(alpha)) {
        const double ia = bessel_i_series_scaled(alpha, x);
        const double ia1 = bessel_i_series_scaled(alpha + 1.0, x);
        out.i = ia;
        out.ip = alpha / x * ia + ia1;
    } else {
        out.i = bessel_i_uniform_scaled(alpha, x);
        out.ip = out.i * i_ratio_cf1(alpha, x);
    }
    return out;
}

ScaledValue bessel_i(BesselOrder order, double x) {
    const auto v = bessel_ik_scaled(order, x);
    return {v.i, x};
}

ScaledValue bessel_k(BesselOrder order, double x) {
    const auto v = bessel_ik_scaled(order, x);
    return {v.k, -x};
}

ScaledValue bessel_i_prime(BesselOrder order, double x) {
    const auto v = bessel_ik_scaled(order, x);
    return {v.ip, x};
}

ScaledValue bessel_k_prime(BesselOrder order, double x) {
    const auto v = bessel_ik_scaled(order, x);
    return {v.kp, -x};
}

namespace {

KernelSample kernel_sample(int k, double nu, double r, KernelFamily family, bool decaying) {
    if (k == 0) {
        throw std::domain_error("Bessel kernel requested for k = 0; the zero mode uses Euler kernels");
    }
    if (!(r >= 1.0) || !std::isfinite(r)) {
        throw std::domain_error("Bessel kernel: r must be >= 1");
    }
    const BesselOrder order = kernel_order(family, nu);
    const double kappa = std::abs(static_cast<double>(k));
    const double x = kappa * r;
    const auto b = bessel_ik_scaled(order, x);
    const double a = (family == KernelFamily::stream) ? 0.0 : 0.5 * nu;

    const double y = decaying ? b.k : b.i;
    const double yp = (decaying ? b.kp : b.ip) * kappa;  // d/dr
    // Bessel ODE in r: y'' = -y'/r + (alpha^2/r^2 + kappa^2) y
    const double ypp = -yp / r + (order.alpha * order.alpha / (r * r) + kappa * kappa) * y;

    const double ra = std::pow(r, a);
    const double shift = decaying ? -x : x;
    KernelSample s;
    s.value = {ra * y, shift};
    s.d1 = {a * ra / r * y + ra * yp, shift};
    s.d2 = {a * (a - 1.0) * ra / (r * r) * y + 2.0 * a * ra / r * yp + ra * ypp, shift};
    return s;
}

}  // namespace

KernelSample kernel_K(int k, double nu, double r, KernelFamily family) {
    return kernel_sample(k, nu, r, family, true);
}

KernelSample kernel_I(int k, double nu, double r, KernelFamily family) {
    return kernel_sample(k, nu, r, family, false);
}

}  // namespace asns
