#pragma once

// Graded radial grid on [1, R_max], cumulative quadrature for the one-sided
// Green's-function integrals, weighted sup norms, finite differences and a
// second-order finite-difference BVP oracle.

#include <complex>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace asns {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;
using RVec = std::vector<double>;

// r_i = 1 + (i/N)^gamma (R_max - 1), i = 0..N
class RadialGrid {
public:
    RadialGrid(int n_intervals, double r_max, double gamma = 2.0);

    int intervals() const { return n_; }
    int size() const { return n_ + 1; }
    double r_max() const { return r_max_; }
    double gamma() const { return gamma_; }
    double r(int i) const { return nodes_[static_cast<size_t>(i)]; }
    const RVec& nodes() const { return nodes_; }
    // dr/dxi at node i, xi = i/N
    double jacobian(int i) const { return jac_[static_cast<size_t>(i)]; }
    double xi_step() const { return 1.0 / n_; }

    double map(double xi) const;
    double map_jacobian(double xi) const;
    // cell index c with r(c) <= r <= r(c+1)
    int locate(double r) const;
    // first node index with r >= value
    int first_at_or_above(double value) const;

    bool same_as(const RadialGrid& other) const;

private:
    int n_;
    double r_max_;
    double gamma_;
    RVec nodes_;
    RVec jac_;
};

struct RadialProfile {
    CVec values;
    std::optional<CVec> d1;
    std::optional<CVec> d2;
    std::optional<double> decay_exponent;

    static RadialProfile zeros(size_t n, bool with_derivatives = true);
    size_t size() const { return values.size(); }
    bool has_derivatives() const { return d1.has_value() && d2.has_value(); }
};

struct WeightedNorm {
    double zeta = 0.0;
    double value = 0.0;
    int argmax = 0;
    double r_at_max = 1.0;
};

WeightedNorm weighted_sup(const RadialGrid& grid, const CVec& s, double zeta);
WeightedNorm weighted_sup(const RadialGrid& grid, const RadialProfile& s, double zeta);

class NonIntegrableTail : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Warning sink shared by the numerics; defaults to stderr.
void emit_warning(const std::string& message);
void set_warning_handler(std::function<void(const std::string&)> handler);

struct PowerFit {
    double exponent = 0.0;  // slope of log|s| against log r
    double r_squared = 0.0;
    int points = 0;
};

// Least squares on the nodes with r in [r_lo, r_hi]; zero samples are skipped.
PowerFit fit_power_law(const RadialGrid& grid, const CVec& s, double r_lo, double r_hi);

// Tail closure options for outer integrals.  With kappa = 0 the integrand is
// assumed to behave like A s^{-p}; p comes from `declared` when given, else
// from a log-log fit over the last decade.
struct TailSpec {
    std::optional<double> declared;
    double mismatch_warn = 0.25;
    std::string label;
};

// J_i = int_1^{r_i} a(s) e^{-kappa (r_i - s)} ds
CVec cumulative_inner(const RadialGrid& grid, const CVec& a, double kappa = 0.0);
// L_i = int_{r_i}^{inf} b(s) e^{-kappa (s - r_i)} ds, closed analytically beyond R_max
CVec cumulative_outer(const RadialGrid& grid, const CVec& b, double kappa = 0.0,
                      const TailSpec& tail = {});

// Tail contribution int_{R_max}^inf b(s) e^{-kappa (s - R_max)} ds alone.
cplx tail_closure(const RadialGrid& grid, const CVec& b, double kappa, const TailSpec& tail);

using RadialFunction = std::function<cplx(double)>;

cplx integrate_inner(const RadialGrid& grid, const RadialFunction& f, int node);
cplx integrate_outer(const RadialGrid& grid, const RadialFunction& f, int node,
                     std::optional<double> declared_decay = std::nullopt);

CVec sample(const RadialGrid& grid, const RadialFunction& f);

// Finite-difference weights (Fornberg) for derivatives 0..m at x0.
std::vector<RVec> fd_weights(double x0, const RVec& x, int m);

// Fourth-order derivatives on the grid.  Stencils are strided so that the
// effective spacing is at least min_spacing, which keeps round-off in check
// where the graded grid clusters at r = 1.
class FiniteDifference {
public:
    explicit FiniteDifference(const RadialGrid& grid, double min_spacing = 0.0);

    CVec d1(const CVec& v) const;
    CVec d2(const CVec& v) const;
    RVec d1(const RVec& v) const;
    RVec d2(const RVec& v) const;

private:
    struct Stencil {
        std::vector<int> idx;
        RVec w;
    };
    std::vector<Stencil> s1_;
    std::vector<Stencil> s2_;
};

// Asymptotic class used for the Robin closure of the FD oracle:
//   power:        v ~ r^{-p} (ln r)^m
//   exponential:  v ~ r^{-p} e^{-kappa r}
struct DecayClass {
    enum class Kind { power, exponential };
    Kind kind = Kind::power;
    double p = 1.0;
    double log_power = 0.0;
    double kappa = 0.0;

    static DecayClass power(double p, double log_power = 0.0) {
        return {Kind::power, p, log_power, 0.0};
    }
    static DecayClass exponential(double kappa, double p = 0.5) {
        return {Kind::exponential, p, 0.0, kappa};
    }
    // v'(R) / v(R)
    double robin_ratio(double R) const;
};

// Second-order FD solution of -(v'' + p1 v' + (p0 - k2) v) = f with v(1) = bc_left
// and v'(R) = robin * v(R).
RadialProfile fd_bvp_oracle(const RadialGrid& grid, const std::function<double(double)>& p1,
                            const std::function<double(double)>& p0, double k2,
                            const RadialFunction& rhs, cplx bc_left, const DecayClass& decay);

// Observed order log2(e_coarse / e_fine) for successive halvings.
double observed_order(double e_coarse, double e_fine);

}  // namespace asns
