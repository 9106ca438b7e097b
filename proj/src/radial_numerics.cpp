#include "asns/radial_numerics.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <iostream>
#include <mutex>

namespace asns {

namespace {

std::mutex& warning_mutex() {
    static std::mutex m;
    return m;
}

std::function<void(const std::string&)>& warning_handler() {
    static std::function<void(const std::string&)> h = [](const std::string& msg) {
        std::cerr << "warning: " << msg << '\n';
    };
    return h;
}

int stencil_start(int cell, int n) { return std::clamp(cell - 1, 0, n - 3); }

// m_j = int_0^H t^j e^{-kappa t} dt for j = 0..3
std::array<double, 4> exp_moments(double H, double kappa) {
    std::array<double, 4> m{};
    const double x = kappa * H;
    if (x < 2.0) {
        for (int j = 0; j < 4; ++j) {
            double term = 1.0, s = 0.0;
            for (int k = 0; k < 80; ++k) {
                s += term / (j + k + 1);
                term *= -x / (k + 1);
                if (std::abs(term) < 1e-18) break;
            }
            m[static_cast<size_t>(j)] = s * std::pow(H, j + 1);
        }
    } else {
        const double e = std::exp(-x);
        m[0] = (1.0 - e) / kappa;
        for (int j = 1; j < 4; ++j) {
            m[static_cast<size_t>(j)] = (j * m[static_cast<size_t>(j - 1)] - std::pow(H, j) * e) / kappa;
        }
    }
    return m;
}

// Weights w with sum_m w_m p(t_m) = int_0^H p(t) e^{-kappa t} dt for every cubic p.
std::array<double, 4> cell_weights(const std::array<double, 4>& t, double H, double kappa) {
    const std::array<double, 4> m = exp_moments(H, kappa);
    Eigen::Matrix4d V;
    Eigen::Vector4d rhs;
    for (int j = 0; j < 4; ++j) {
        for (int c = 0; c < 4; ++c) V(j, c) = std::pow(t[static_cast<size_t>(c)] / H, j);
        rhs(j) = m[static_cast<size_t>(j)] / std::pow(H, j);
    }
    const Eigen::Vector4d w = V.partialPivLu().solve(rhs);
    return {w(0), w(1), w(2), w(3)};
}

}  // namespace

void emit_warning(const std::string& message) {
    std::lock_guard<std::mutex> lock(warning_mutex());
    if (warning_handler()) warning_handler()(message);
}

void set_warning_handler(std::function<void(const std::string&)> handler) {
    std::lock_guard<std::mutex> lock(warning_mutex());
    warning_handler() = std::move(handler);
}

RadialGrid::RadialGrid(int n_intervals, double r_max, double gamma)
    : n_(n_intervals), r_max_(r_max), gamma_(gamma) {
    if (n_intervals < 8) throw std::invalid_argument("RadialGrid: need at least 8 intervals");
    if (!(r_max > 1.0)) throw std::invalid_argument("RadialGrid: r_max must exceed 1");
    if (!(gamma >= 1.0)) throw std::invalid_argument("RadialGrid: grid_gamma must be >= 1");
    nodes_.resize(static_cast<size_t>(n_) + 1);
    jac_.resize(static_cast<size_t>(n_) + 1);
    for (int i = 0; i <= n_; ++i) {
        const double xi = static_cast<double>(i) / n_;
        nodes_[static_cast<size_t>(i)] = map(xi);
        jac_[static_cast<size_t>(i)] = map_jacobian(xi);
    }
    nodes_.front() = 1.0;
    nodes_.back() = r_max_;
}

double RadialGrid::map(double xi) const { return 1.0 + std::pow(xi, gamma_) * (r_max_ - 1.0); }

double RadialGrid::map_jacobian(double xi) const {
    if (gamma_ == 1.0) return r_max_ - 1.0;
    return gamma_ * std::pow(xi, gamma_ - 1.0) * (r_max_ - 1.0);
}

int RadialGrid::locate(double r) const {
    if (r < 1.0 || r > r_max_) throw std::out_of_range("RadialGrid::locate: r outside [1, R_max]");
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), r);
    int c = static_cast<int>(it - nodes_.begin()) - 1;
    return std::clamp(c, 0, n_ - 1);
}

int RadialGrid::first_at_or_above(double value) const {
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), value);
    return static_cast<int>(it - nodes_.begin());
}

bool RadialGrid::same_as(const RadialGrid& o) const {
    return n_ == o.n_ && r_max_ == o.r_max_ && gamma_ == o.gamma_;
}

RadialProfile RadialProfile::zeros(size_t n, bool with_derivatives) {
    RadialProfile p;
    p.values.assign(n, cplx{});
    if (with_derivatives) {
        p.d1 = CVec(n, cplx{});
        p.d2 = CVec(n, cplx{});
    }
    return p;
}

WeightedNorm weighted_sup(const RadialGrid& grid, const CVec& s, double zeta) {
    WeightedNorm out;
    out.zeta = zeta;
    for (int i = 0; i < static_cast<int>(s.size()); ++i) {
        const double v = std::pow(grid.r(i), zeta) * std::abs(s[static_cast<size_t>(i)]);
        if (v > out.value) {
            out.value = v;
            out.argmax = i;
        }
    }
    out.r_at_max = grid.r(out.argmax);
    return out;
}

WeightedNorm weighted_sup(const RadialGrid& grid, const RadialProfile& s, double zeta) {
    return weighted_sup(grid, s.values, zeta);
}

PowerFit fit_power_law(const RadialGrid& grid, const CVec& s, double r_lo, double r_hi) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::vector<std::pair<double, double>> pts;
    for (int i = 0; i < grid.size(); ++i) {
        const double r = grid.r(i);
        if (r < r_lo || r > r_hi) continue;
        const double a = std::abs(s[static_cast<size_t>(i)]);
        if (!(a > 0.0) || !std::isfinite(a)) continue;
        pts.emplace_back(std::log(r), std::log(a));
    }
    PowerFit fit;
    fit.points = static_cast<int>(pts.size());
    if (pts.size() < 3) return fit;
    for (auto [x, y] : pts) {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = static_cast<double>(pts.size());
    const double den = n * sxx - sx * sx;
    if (den == 0.0) return fit;
    const double slope = (n * sxy - sx * sy) / den;
    const double icpt = (sy - slope * sx) / n;
    const double ybar = sy / n;
    double ss_tot = 0, ss_res = 0;
    for (auto [x, y] : pts) {
        ss_tot += (y - ybar) * (y - ybar);
        const double e = y - (icpt + slope * x);
        ss_res += e * e;
    }
    fit.exponent = slope;
    fit.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

cplx tail_closure(const RadialGrid& grid, const CVec& b, double kappa, const TailSpec& tail) {
    const int n = grid.intervals();
    const double R = grid.r_max();
    const cplx hR = b[static_cast<size_t>(n)];
    if (kappa > 0.0) {
        if (hR == cplx{}) return {};
        // b ~ b(R) e^{-rho (s - R)} beyond R with rho = -(ln|b|)'(R), taken from
        // a one-sided stencil on the last four nodes
        double rho = 0.0;
        RVec x, y;
        for (int i = n - 3; i <= n; ++i) {
            const double a = std::abs(b[static_cast<size_t>(i)]);
            if (a == 0.0) break;
            x.push_back(grid.r(i));
            y.push_back(std::log(a));
        }
        if (x.size() == 4) {
            const auto w = fd_weights(R, x, 1);
            for (size_t m = 0; m < 4; ++m) rho -= w[1][m] * y[m];
        } else {
            const double a0 = std::abs(b[static_cast<size_t>(n - 1)]);
            if (a0 > 0.0) rho = std::log(a0 / std::abs(hR)) / (R - grid.r(n - 1));
        }
        double denom = kappa + rho;
        if (denom < 0.5 * kappa) denom = 0.5 * kappa;
        return hR / denom;
    }
    const PowerFit fit = fit_power_law(grid, b, R / 10.0, R);
    double p;
    if (tail.declared) {
        p = *tail.declared;
        if (fit.points >= 3 && std::abs(-fit.exponent - p) > tail.mismatch_warn && hR != cplx{}) {
            emit_warning("tail closure" + (tail.label.empty() ? std::string() : " (" + tail.label + ")") +
                         ": fitted decay " + std::to_string(-fit.exponent) + " differs from declared " +
                         std::to_string(p));
        }
    } else {
        if (hR == cplx{}) return {};
        p = -fit.exponent;
        // A tail at round-off level relative to the integral carries no
        // information; its fitted slope is noise.
        double scale = 0.0;
        for (int i = 0; i <= n; ++i) scale = std::max(scale, std::abs(b[static_cast<size_t>(i)]) * grid.r(i));
        if (std::abs(hR) * R <= 1e-13 * scale) return {};
    }
    if (!(p > 1.0)) {
        if (hR == cplx{}) return {};
        throw NonIntegrableTail("outer integral" + (tail.label.empty() ? std::string() : " (" + tail.label + ")") +
                                ": integrand decay exponent " + std::to_string(p) +
                                " <= 1, tail not integrable");
    }
    return hR * R / (p - 1.0);
}

CVec cumulative_inner(const RadialGrid& grid, const CVec& a, double kappa) {
    const int n = grid.intervals();
    if (static_cast<int>(a.size()) != grid.size()) throw std::invalid_argument("cumulative_inner: size mismatch");
    CVec J(static_cast<size_t>(n) + 1);
    J[0] = 0.0;
    for (int c = 0; c < n; ++c) {
        const int j0 = stencil_start(c, n);
        const double rend = grid.r(c + 1);
        const double H = rend - grid.r(c);
        // reflected coordinate u = r_{c+1} - s turns the damping into e^{-kappa u}
        std::array<double, 4> u{};
        for (int m = 0; m < 4; ++m) u[static_cast<size_t>(m)] = rend - grid.r(j0 + m);
        const auto w = cell_weights(u, H, kappa);
        cplx cell{};
        for (int m = 0; m < 4; ++m) cell += w[static_cast<size_t>(m)] * a[static_cast<size_t>(j0 + m)];
        const double damp = kappa != 0.0 ? std::exp(-kappa * H) : 1.0;
        J[static_cast<size_t>(c) + 1] = J[static_cast<size_t>(c)] * damp + cell;
    }
    return J;
}

CVec cumulative_outer(const RadialGrid& grid, const CVec& b, double kappa, const TailSpec& tail) {
    const int n = grid.intervals();
    if (static_cast<int>(b.size()) != grid.size()) throw std::invalid_argument("cumulative_outer: size mismatch");
    CVec L(static_cast<size_t>(n) + 1);
    L[static_cast<size_t>(n)] = tail_closure(grid, b, kappa, tail);
    for (int c = n - 1; c >= 0; --c) {
        const int j0 = stencil_start(c, n);
        const double rbeg = grid.r(c);
        const double H = grid.r(c + 1) - rbeg;
        std::array<double, 4> t{};
        for (int m = 0; m < 4; ++m) t[static_cast<size_t>(m)] = grid.r(j0 + m) - rbeg;
        const auto w = cell_weights(t, H, kappa);
        cplx cell{};
        for (int m = 0; m < 4; ++m) cell += w[static_cast<size_t>(m)] * b[static_cast<size_t>(j0 + m)];
        const double damp = kappa != 0.0 ? std::exp(-kappa * H) : 1.0;
        L[static_cast<size_t>(c)] = L[static_cast<size_t>(c) + 1] * damp + cell;
    }
    return L;
}

CVec sample(const RadialGrid& grid, const RadialFunction& f) {
    CVec v(static_cast<size_t>(grid.size()));
    for (int i = 0; i < grid.size(); ++i) v[static_cast<size_t>(i)] = f(grid.r(i));
    return v;
}

cplx integrate_inner(const RadialGrid& grid, const RadialFunction& f, int node) {
    return cumulative_inner(grid, sample(grid, f))[static_cast<size_t>(node)];
}

cplx integrate_outer(const RadialGrid& grid, const RadialFunction& f, int node,
                     std::optional<double> declared_decay) {
    TailSpec t;
    t.declared = declared_decay;
    return cumulative_outer(grid, sample(grid, f), 0.0, t)[static_cast<size_t>(node)];
}

std::vector<RVec> fd_weights(double z, const RVec& x, int m) {
    const int n = static_cast<int>(x.size()) - 1;
    std::vector<RVec> c(static_cast<size_t>(n) + 1, RVec(static_cast<size_t>(m) + 1, 0.0));
    double c1 = 1.0;
    double c4 = x[0] - z;
    c[0][0] = 1.0;
    for (int i = 1; i <= n; ++i) {
        const int mn = std::min(i, m);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = x[static_cast<size_t>(i)] - z;
        for (int j = 0; j < i; ++j) {
            const double c3 = x[static_cast<size_t>(i)] - x[static_cast<size_t>(j)];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k) {
                    c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<RVec> w(static_cast<size_t>(m) + 1, RVec(static_cast<size_t>(n) + 1));
    for (int k = 0; k <= m; ++k)
        for (int i = 0; i <= n; ++i) w[k][i] = c[i][k];
    return w;
}

FiniteDifference::FiniteDifference(const RadialGrid& grid, double min_spacing) {
    const int n = grid.intervals();
    s1_.resize(static_cast<size_t>(grid.size()));
    s2_.resize(static_cast<size_t>(grid.size()));
    auto build = [&](int i, int s, int npts, int deriv) {
        // window of npts nodes i + s*m, m = m0..m0+npts-1, as centred as the ends allow
        int m0 = -(npts - 1) / 2;
        const int lo = -(i / s);
        const int hi = (n - i) / s;
        if (m0 < lo) m0 = lo;
        if (m0 + npts - 1 > hi) m0 = hi - (npts - 1);
        Stencil st;
        RVec x;
        for (int m = m0; m < m0 + npts; ++m) {
            st.idx.push_back(i + s * m);
            x.push_back(grid.r(i + s * m));
        }
        st.w = fd_weights(grid.r(i), x, deriv)[static_cast<size_t>(deriv)];
        return st;
    };
    for (int i = 0; i <= n; ++i) {
        int s = 1;
        if (min_spacing > 0.0) {
            while (s < n / 8) {
                const double span = grid.r(std::min(n, i + s)) - grid.r(std::max(0, i - s));
                const int cnt = std::min(n, i + s) - std::max(0, i - s);
                if (span / cnt * s >= min_spacing) break;
                ++s;
            }
        }
        const bool centred = (i - 2 * s >= 0) && (i + 2 * s <= n);
        s1_[static_cast<size_t>(i)] = build(i, s, 5, 1);
        s2_[static_cast<size_t>(i)] = build(i, s, centred ? 5 : 6, 2);
    }
}

namespace {
template <class T>
std::vector<T> apply_stencils(const std::vector<T>& v, const auto& stencils) {
    std::vector<T> out(v.size());
    for (size_t i = 0; i < v.size(); ++i) {
        T acc{};
        const auto& st = stencils[i];
        for (size_t m = 0; m < st.idx.size(); ++m) acc += st.w[m] * v[static_cast<size_t>(st.idx[m])];
        out[i] = acc;
    }
    return out;
}
}  // namespace

CVec FiniteDifference::d1(const CVec& v) const { return apply_stencils(v, s1_); }
CVec FiniteDifference::d2(const CVec& v) const { return apply_stencils(v, s2_); }
RVec FiniteDifference::d1(const RVec& v) const { return apply_stencils(v, s1_); }
RVec FiniteDifference::d2(const RVec& v) const { return apply_stencils(v, s2_); }

double DecayClass::robin_ratio(double R) const {
    if (kind == Kind::power) return (-p + log_power / std::log(R)) / R;
    return -kappa - p / R;
}

RadialProfile fd_bvp_oracle(const RadialGrid& grid, const std::function<double(double)>& p1,
                            const std::function<double(double)>& p0, double k2,
                            const RadialFunction& rhs, cplx bc_left, const DecayClass& decay) {
    const int n = grid.intervals();
    const int sz = grid.size();
    using SpMat = Eigen::SparseMatrix<cplx>;
    std::vector<Eigen::Triplet<cplx>> trip;
    trip.reserve(static_cast<size_t>(sz) * 3 + 4);
    Eigen::VectorXcd b(sz);
    trip.emplace_back(0, 0, 1.0);
    b(0) = bc_left;
    for (int i = 1; i < n; ++i) {
        const RVec x = {grid.r(i - 1), grid.r(i), grid.r(i + 1)};
        const auto w = fd_weights(grid.r(i), x, 2);
        const double r = grid.r(i);
        const double a1 = p1(r);
        const double a0 = p0(r) - k2;
        for (int m = 0; m < 3; ++m) {
            double coef = -(w[2][m] + a1 * w[1][m]);
            if (m == 1) coef -= a0;
            trip.emplace_back(i, i - 1 + m, coef);
        }
        b(i) = rhs(r);
    }
    {
        const RVec x = {grid.r(n - 2), grid.r(n - 1), grid.r(n)};
        const auto w = fd_weights(grid.r(n), x, 1);
        const double beta = decay.robin_ratio(grid.r_max());
        trip.emplace_back(n, n - 2, w[1][0]);
        trip.emplace_back(n, n - 1, w[1][1]);
        trip.emplace_back(n, n, w[1][2] - beta);
        b(n) = 0.0;
    }
    SpMat A(sz, sz);
    A.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<SpMat> lu;
    lu.analyzePattern(A);
    lu.factorize(A);
    if (lu.info() != Eigen::Success) {
        throw std::runtime_error("fd_bvp_oracle: singular linear system (ill-posed parameters)");
    }
    Eigen::VectorXcd v = lu.solve(b);
    RadialProfile out;
    out.values.resize(static_cast<size_t>(sz));
    for (int i = 0; i < sz; ++i) out.values[static_cast<size_t>(i)] = v(i);
    return out;
}

double observed_order(double e_coarse, double e_fine) { return std::log2(e_coarse / e_fine); }

}  // namespace asns
