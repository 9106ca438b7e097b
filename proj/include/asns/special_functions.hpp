#pragma once

// Real-order modified Bessel functions I_a(x), K_a(x) and the radial
// kernels built from them.  Values are returned in scaled form so that
// e^{|k| r} growth never has to be materialised.

#include <cmath>

namespace asns {

// value = mantissa * exp(exp_shift)
struct ScaledValue {
    double mantissa = 0.0;
    double exp_shift = 0.0;

    double value() const { return mantissa * std::exp(exp_shift); }
};

struct BesselOrder {
    explicit BesselOrder(double a);
    double alpha;
};

// Kernel families: swirl uses |1 + nu/2|, vorticity |1 - nu/2|, stream 1.
enum class KernelFamily { swirl, vorticity, stream };

BesselOrder kernel_order(KernelFamily family, double nu);

// Series/uniform switch point for I_a.
double bessel_switch_point(double alpha);

// All four quantities at once.  i, ip carry a factor e^{-x}; k, kp carry e^{+x}.
struct BesselIKScaled {
    double i = 0.0;
    double ip = 0.0;
    double k = 0.0;
    double kp = 0.0;
};

BesselIKScaled bessel_ik_scaled(BesselOrder order, double x);

// I_a by its power series only (valid for any x that does not overflow the
// scaled terms); exposed for the overlap check against the uniform branch.
double bessel_i_series_scaled(double alpha, double x);
// I_a by continued fraction + Wronskian; scaled by e^{-x}.
double bessel_i_uniform_scaled(double alpha, double x);

ScaledValue bessel_i(BesselOrder order, double x);
ScaledValue bessel_k(BesselOrder order, double x);
ScaledValue bessel_i_prime(BesselOrder order, double x);
ScaledValue bessel_k_prime(BesselOrder order, double x);

// Kernel r^{nu/2} Z_a(|k| r) and its first two r-derivatives.  The stream
// family drops the r^{nu/2} prefactor (plain K_1, I_1).
struct KernelSample {
    ScaledValue value;
    ScaledValue d1;
    ScaledValue d2;
};

KernelSample kernel_K(int k, double nu, double r, KernelFamily family = KernelFamily::swirl);
KernelSample kernel_I(int k, double nu, double r, KernelFamily family = KernelFamily::swirl);

}  // namespace asns
