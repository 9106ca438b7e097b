#pragma once

// Fourier-in-z representation of axisymmetric fields: mode storage with
// conjugate symmetry, boundary and forcing data, mode convolution for the
// quadratic terms, synthesis in physical space and the data/solution norms.

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "asns/radial_numerics.hpp"

namespace asns {

enum class Component { r, theta, z };

const char* component_name(Component c);
// Accepts "r", "theta", "z" (also "th").
std::optional<Component> parse_component(const std::string& s);

constexpr std::array<Component, 3> kComponents{Component::r, Component::theta, Component::z};

struct ModeProfiles {
    RadialProfile r, theta, z;

    RadialProfile& operator[](Component c);
    const RadialProfile& operator[](Component c) const;
};

// Per-mode samples on one grid, indexed k + K for k in [-K, K].
using ModeSeries = std::vector<CVec>;

class FourierField {
public:
    FourierField() = default;
    FourierField(int k_max, size_t points);

    int k_max() const { return k_max_; }
    size_t points() const { return points_; }
    int mode_count() const { return 2 * k_max_ + 1; }

    ModeProfiles& mode(int k);
    const ModeProfiles& mode(int k) const;
    RadialProfile& at(Component c, int k) { return mode(k)[c]; }
    const RadialProfile& at(Component c, int k) const { return mode(k)[c]; }

    // Coefficient of 1/r in the zero-mode swirl; present only when -2 <= nu < 0.
    // The theta profile of mode 0 holds the o(1/r) remainder.
    std::optional<double> sigma;

    // Overwrite mode -k with the conjugate of mode k for k = 1..K.
    void fill_conjugates();
    // max |c_{-k} - conj(c_k)| over all components, nodes and derivative levels
    double symmetry_defect() const;

    // deriv 0, 1 or 2 of one component for every mode.  When a grid is passed
    // the zero-mode swirl gets sigma/r (and its derivatives) added.
    ModeSeries series(Component c, int deriv, const RadialGrid* grid_for_sigma = nullptr) const;

    // Zero-mode swirl including sigma/r.
    RadialProfile swirl_zero_total(const RadialGrid& grid) const;

private:
    int k_max_ = 0;
    size_t points_ = 0;
    std::vector<ModeProfiles> modes_;
};

// out_k = sum_{l} a_{k-l} b_l over |l| <= K, |k-l| <= K, truncated to |k| <= K.
// `discarded` receives the largest magnitude generated at |k| > K.
ModeSeries convolve_product(const ModeSeries& a, const ModeSeries& b, int k_max, double* discarded = nullptr);

// Multiply mode k by (i k)^order.
ModeSeries z_derivative(const ModeSeries& a, int order = 1);

struct Background {
    double nu = 0.0;
    double mu = 0.0;
};

struct Velocity {
    double r = 0.0, theta = 0.0, z = 0.0;
    double imag_residue = 0.0;  // largest imaginary part discarded
};

// Physical velocity at (r, z).  Off-node radii use cubic Lagrange interpolation
// of the mode values; at a node the stored value is used as is.
Velocity synthesize(const FourierField& field, const RadialGrid& grid, double r, double z,
                    std::optional<Background> background = std::nullopt);
Velocity synthesize_node(const FourierField& field, const RadialGrid& grid, int node, double z,
                         std::optional<Background> background = std::nullopt);

class BoundaryData {
public:
    // g_{r,0} must be zero.
    void set(Component c, int k, cplx value);
    // Sets mode k and, for k > 0, mode -k to the conjugate.  k = 0 values must be real.
    void set_real_field(Component c, int k, cplx value);
    cplx get(Component c, int k) const;
    const std::map<int, cplx>& entries(Component c) const;
    int max_mode() const;
    bool empty() const;

private:
    std::array<std::map<int, cplx>, 3> g_;
};

// sum_{j,k} (1 + k^2) |g_{j,k}|
double vnorm(const BoundaryData& g);

enum class ForcingFamily { power_decay, power_exp_decay };

struct ForcingTerm {
    ForcingFamily family = ForcingFamily::power_decay;
    cplx amplitude{};
    double exponent = 0.0;  // a r^{-p}
    double rate = 0.0;      // extra e^{-rate (r - 1)} for power_exp_decay

    cplx operator()(double r) const;
    std::string render() const;
};

class ForcingData {
public:
    void add(Component c, int k, const ForcingTerm& term);
    // Adds mode k and, for k > 0, the conjugate term at -k.
    void add_real_field(Component c, int k, const ForcingTerm& term);

    bool has(Component c, int k) const;
    cplx eval(Component c, int k, double r) const;
    CVec sample(const RadialGrid& grid, Component c, int k) const;
    // Slowest power among the terms of (c, k); nullopt when no term is present.
    std::optional<double> declared_decay(Component c, int k) const;
    const std::map<int, std::vector<ForcingTerm>>& terms(Component c) const;
    int max_mode() const;
    bool empty() const;

    // Checks lambda_theta > 3, lambda_z > 2, lambda > 3/2 and that every term
    // decays at least as fast as the exponent of its slot.  Throws
    // std::invalid_argument naming the violated condition.
    void validate(double lambda_theta, double lambda_z, double lambda) const;

private:
    std::array<std::map<int, std::vector<ForcingTerm>>, 3> f_;
};

// ||f_{theta,0}||_{lambda_theta} + ||f_{z,0}||_{lambda_z} + sum_{k != 0, j} ||f_{j,k}||_lambda,
// sup norms taken on the grid nodes.
double enorm(const ForcingData& f, const RadialGrid& grid, double lambda_theta, double lambda_z, double lambda);

struct BNormParts {
    double sigma = 0.0;
    double swirl_zero = 0.0;
    double vertical_zero = 0.0;
    double nonzero = 0.0;
    double total() const { return sigma + swirl_zero + vertical_zero + nonzero; }
};

// Weighted norm of the reduced solution space; needs d1 and d2 on every profile.
BNormParts bnorm_parts(const FourierField& v, const RadialGrid& grid, double tau);
double bnorm(const FourierField& v, const RadialGrid& grid, double tau);

// Elementwise a - b (sigma included).
FourierField difference(const FourierField& a, const FourierField& b);

}  // namespace asns
