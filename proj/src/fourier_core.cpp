#include "asns/fourier_core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace asns {

namespace {

size_t cidx(Component c) { return static_cast<size_t>(c); }

const CVec& level(const RadialProfile& p, int deriv) {
    if (deriv == 0) return p.values;
    const auto& d = deriv == 1 ? p.d1 : p.d2;
    if (!d) throw std::invalid_argument("profile is missing derivative " + std::to_string(deriv));
    return *d;
}

double sigma_term(double sigma, double r, int deriv) {
    switch (deriv) {
        case 0: return sigma / r;
        case 1: return -sigma / (r * r);
        default: return 2.0 * sigma / (r * r * r);
    }
}

std::string fmt_cplx(cplx a) {
    std::ostringstream os;
    os.precision(17);
    if (a.imag() == 0.0) os << a.real();
    else os << a.real() << ' ' << a.imag();
    return os.str();
}

}  // namespace

const char* component_name(Component c) {
    switch (c) {
        case Component::r: return "r";
        case Component::theta: return "theta";
        case Component::z: return "z";
    }
    return "?";
}

std::optional<Component> parse_component(const std::string& s) {
    if (s == "r") return Component::r;
    if (s == "theta" || s == "th") return Component::theta;
    if (s == "z") return Component::z;
    return std::nullopt;
}

RadialProfile& ModeProfiles::operator[](Component c) {
    return c == Component::r ? r : (c == Component::theta ? theta : z);
}

const RadialProfile& ModeProfiles::operator[](Component c) const {
    return c == Component::r ? r : (c == Component::theta ? theta : z);
}

FourierField::FourierField(int k_max, size_t points) : k_max_(k_max), points_(points) {
    if (k_max < 0) throw std::invalid_argument("FourierField: K must be nonnegative");
    modes_.resize(static_cast<size_t>(2 * k_max + 1));
    for (auto& m : modes_) {
        m.r = RadialProfile::zeros(points);
        m.theta = RadialProfile::zeros(points);
        m.z = RadialProfile::zeros(points);
    }
}

ModeProfiles& FourierField::mode(int k) {
    if (std::abs(k) > k_max_) throw std::out_of_range("FourierField: mode " + std::to_string(k) + " beyond K");
    return modes_[static_cast<size_t>(k + k_max_)];
}

const ModeProfiles& FourierField::mode(int k) const {
    if (std::abs(k) > k_max_) throw std::out_of_range("FourierField: mode " + std::to_string(k) + " beyond K");
    return modes_[static_cast<size_t>(k + k_max_)];
}

void FourierField::fill_conjugates() {
    for (int k = 1; k <= k_max_; ++k) {
        for (Component c : kComponents) {
            const RadialProfile& src = at(c, k);
            RadialProfile& dst = at(c, -k);
            dst = src;
            for (auto& x : dst.values) x = std::conj(x);
            if (dst.d1) for (auto& x : *dst.d1) x = std::conj(x);
            if (dst.d2) for (auto& x : *dst.d2) x = std::conj(x);
        }
    }
}

double FourierField::symmetry_defect() const {
    double m = 0.0;
    for (int k = 0; k <= k_max_; ++k) {
        for (Component c : kComponents) {
            const RadialProfile& a = at(c, k);
            const RadialProfile& b = at(c, -k);
            for (int d = 0; d < 3; ++d) {
                if (d > 0 && !(d == 1 ? a.d1 && b.d1 : a.d2 && b.d2)) continue;
                const CVec& x = level(a, d);
                const CVec& y = level(b, d);
                for (size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(y[i] - std::conj(x[i])));
            }
        }
    }
    return m;
}

ModeSeries FourierField::series(Component c, int deriv, const RadialGrid* grid) const {
    ModeSeries out(static_cast<size_t>(mode_count()));
    for (int k = -k_max_; k <= k_max_; ++k) out[static_cast<size_t>(k + k_max_)] = level(at(c, k), deriv);
    if (grid && c == Component::theta && sigma) {
        CVec& z0 = out[static_cast<size_t>(k_max_)];
        for (int i = 0; i < grid->size(); ++i) z0[static_cast<size_t>(i)] += sigma_term(*sigma, grid->r(i), deriv);
    }
    return out;
}

RadialProfile FourierField::swirl_zero_total(const RadialGrid& grid) const {
    RadialProfile p = at(Component::theta, 0);
    if (!sigma) return p;
    for (int i = 0; i < grid.size(); ++i) {
        const double r = grid.r(i);
        const auto u = static_cast<size_t>(i);
        p.values[u] += sigma_term(*sigma, r, 0);
        if (p.d1) (*p.d1)[u] += sigma_term(*sigma, r, 1);
        if (p.d2) (*p.d2)[u] += sigma_term(*sigma, r, 2);
    }
    return p;
}

ModeSeries convolve_product(const ModeSeries& a, const ModeSeries& b, int K, double* discarded) {
    const auto m = static_cast<size_t>(2 * K + 1);
    if (a.size() != m || b.size() != m) throw std::invalid_argument("convolve_product: truncation mismatch");
    const size_t n = a[0].size();
    for (size_t j = 0; j < m; ++j) {
        if (a[j].size() != n || b[j].size() != n) throw std::invalid_argument("convolve_product: grid mismatch");
    }
    ModeSeries out(m, CVec(n, cplx{}));
    double lost = 0.0;
    CVec acc(n);
    for (int k = -2 * K; k <= 2 * K; ++k) {
        std::fill(acc.begin(), acc.end(), cplx{});
        bool any = false;
        const int lo = std::max(-K, k - K);
        const int hi = std::min(K, k + K);
        for (int l = lo; l <= hi; ++l) {
            const CVec& x = a[static_cast<size_t>(k - l + K)];
            const CVec& y = b[static_cast<size_t>(l + K)];
            for (size_t i = 0; i < n; ++i) acc[i] += x[i] * y[i];
            any = true;
        }
        if (!any) continue;
        if (std::abs(k) <= K) {
            out[static_cast<size_t>(k + K)] = acc;
        } else if (discarded) {
            for (const auto& v : acc) lost = std::max(lost, std::abs(v));
        }
    }
    if (discarded) *discarded = lost;
    return out;
}

ModeSeries z_derivative(const ModeSeries& a, int order) {
    const int K = (static_cast<int>(a.size()) - 1) / 2;
    ModeSeries out = a;
    for (int k = -K; k <= K; ++k) {
        const cplx f = std::pow(cplx(0.0, static_cast<double>(k)), order);
        for (auto& x : out[static_cast<size_t>(k + K)]) x *= f;
    }
    return out;
}

namespace {

template <class ValueAt>
Velocity synthesize_impl(const FourierField& field, double r, double z, std::optional<Background> bg,
                         ValueAt&& value_at) {
    std::array<cplx, 3> s{};
    const int K = field.k_max();
    for (int k = -K; k <= K; ++k) {
        const cplx e = std::exp(cplx(0.0, k * z));
        for (size_t c = 0; c < 3; ++c) s[c] += value_at(kComponents[c], k) * e;
    }
    Velocity v;
    v.r = s[0].real();
    v.theta = s[1].real();
    v.z = s[2].real();
    v.imag_residue = std::max({std::abs(s[0].imag()), std::abs(s[1].imag()), std::abs(s[2].imag())});
    if (field.sigma) v.theta += *field.sigma / r;
    if (bg) {
        v.r += bg->nu / r;
        v.theta += bg->mu / r;
    }
    return v;
}

}  // namespace

Velocity synthesize_node(const FourierField& field, const RadialGrid& grid, int node, double z,
                         std::optional<Background> bg) {
    if (node < 0 || node >= grid.size()) throw std::out_of_range("synthesize_node: node outside the grid");
    if (field.points() != static_cast<size_t>(grid.size())) throw std::invalid_argument("synthesize: grid mismatch");
    const auto u = static_cast<size_t>(node);
    return synthesize_impl(field, grid.r(node), z, bg,
                           [&](Component c, int k) { return field.at(c, k).values[u]; });
}

Velocity synthesize(const FourierField& field, const RadialGrid& grid, double r, double z,
                    std::optional<Background> bg) {
    if (!(r >= 1.0 && r <= grid.r_max())) throw std::out_of_range("synthesize: r outside [1, R_max]");
    if (field.points() != static_cast<size_t>(grid.size())) throw std::invalid_argument("synthesize: grid mismatch");
    const int c = grid.locate(r);
    if (grid.r(c) == r) return synthesize_node(field, grid, c, z, bg);
    if (c + 1 < grid.size() && grid.r(c + 1) == r) return synthesize_node(field, grid, c + 1, z, bg);
    const int j0 = std::clamp(c - 1, 0, grid.size() - 4);
    RVec x(4);
    for (int m = 0; m < 4; ++m) x[static_cast<size_t>(m)] = grid.r(j0 + m);
    const auto w = fd_weights(r, x, 0);
    return synthesize_impl(field, r, z, bg, [&](Component comp, int k) {
        const CVec& v = field.at(comp, k).values;
        cplx s{};
        for (int m = 0; m < 4; ++m) s += w[0][static_cast<size_t>(m)] * v[static_cast<size_t>(j0 + m)];
        return s;
    });
}

void BoundaryData::set(Component c, int k, cplx value) {
    if (c == Component::r && k == 0 && value != cplx{}) {
        throw std::invalid_argument("boundary data: g_{r,0} must vanish (normalization g_{r,0} = 0)");
    }
    g_[cidx(c)][k] = value;
}

void BoundaryData::set_real_field(Component c, int k, cplx value) {
    if (k < 0) throw std::invalid_argument("boundary data: give k >= 0; the conjugate mode is added automatically");
    if (k == 0 && value.imag() != 0.0) {
        throw std::invalid_argument("boundary data: the zero mode of a real field must be real");
    }
    set(c, k, value);
    if (k > 0) set(c, -k, std::conj(value));
}

cplx BoundaryData::get(Component c, int k) const {
    const auto& m = g_[cidx(c)];
    const auto it = m.find(k);
    return it == m.end() ? cplx{} : it->second;
}

const std::map<int, cplx>& BoundaryData::entries(Component c) const { return g_[cidx(c)]; }

int BoundaryData::max_mode() const {
    int m = 0;
    for (const auto& comp : g_)
        for (const auto& [k, v] : comp)
            if (v != cplx{}) m = std::max(m, std::abs(k));
    return m;
}

bool BoundaryData::empty() const {
    for (const auto& comp : g_)
        for (const auto& [k, v] : comp)
            if (v != cplx{}) return false;
    return true;
}

double vnorm(const BoundaryData& g) {
    double s = 0.0;
    for (Component c : kComponents)
        for (const auto& [k, v] : g.entries(c)) s += (1.0 + static_cast<double>(k) * k) * std::abs(v);
    return s;
}

cplx ForcingTerm::operator()(double r) const {
    cplx v = amplitude * std::pow(r, -exponent);
    if (family == ForcingFamily::power_exp_decay) v *= std::exp(-rate * (r - 1.0));
    return v;
}

std::string ForcingTerm::render() const {
    std::ostringstream os;
    os.precision(17);
    os << (family == ForcingFamily::power_decay ? "power_decay(" : "power_exp_decay(") << fmt_cplx(amplitude)
       << ", " << exponent;
    if (family == ForcingFamily::power_exp_decay) os << ", " << rate;
    os << ')';
    return os.str();
}

void ForcingData::add(Component c, int k, const ForcingTerm& term) { f_[cidx(c)][k].push_back(term); }

void ForcingData::add_real_field(Component c, int k, const ForcingTerm& term) {
    if (k < 0) throw std::invalid_argument("forcing: give k >= 0; the conjugate mode is added automatically");
    if (k == 0 && term.amplitude.imag() != 0.0) {
        throw std::invalid_argument("forcing: the zero mode of a real field must have a real amplitude");
    }
    add(c, k, term);
    if (k > 0) {
        ForcingTerm t = term;
        t.amplitude = std::conj(t.amplitude);
        add(c, -k, t);
    }
}

bool ForcingData::has(Component c, int k) const {
    const auto& m = f_[cidx(c)];
    const auto it = m.find(k);
    return it != m.end() && !it->second.empty();
}

cplx ForcingData::eval(Component c, int k, double r) const {
    const auto& m = f_[cidx(c)];
    const auto it = m.find(k);
    if (it == m.end()) return {};
    cplx s{};
    for (const auto& t : it->second) s += t(r);
    return s;
}

CVec ForcingData::sample(const RadialGrid& grid, Component c, int k) const {
    CVec v(static_cast<size_t>(grid.size()), cplx{});
    if (!has(c, k)) return v;
    for (int i = 0; i < grid.size(); ++i) v[static_cast<size_t>(i)] = eval(c, k, grid.r(i));
    return v;
}

std::optional<double> ForcingData::declared_decay(Component c, int k) const {
    const auto& m = f_[cidx(c)];
    const auto it = m.find(k);
    if (it == m.end() || it->second.empty()) return std::nullopt;
    double p = it->second.front().exponent;
    for (const auto& t : it->second) p = std::min(p, t.exponent);
    return p;
}

const std::map<int, std::vector<ForcingTerm>>& ForcingData::terms(Component c) const { return f_[cidx(c)]; }

int ForcingData::max_mode() const {
    int m = 0;
    for (const auto& comp : f_)
        for (const auto& [k, v] : comp)
            if (!v.empty()) m = std::max(m, std::abs(k));
    return m;
}

bool ForcingData::empty() const {
    for (const auto& comp : f_)
        for (const auto& [k, v] : comp)
            if (!v.empty()) return false;
    return true;
}

void ForcingData::validate(double lambda_theta, double lambda_z, double lambda) const {
    if (!(lambda_theta > 3.0)) throw std::invalid_argument("lambda_theta > 3 required");
    if (!(lambda_z > 2.0)) throw std::invalid_argument("lambda_z > 2 required");
    if (!(lambda > 1.5)) throw std::invalid_argument("lambda > 3/2 required");
    for (Component c : kComponents) {
        for (const auto& [k, list] : f_[cidx(c)]) {
            if (k == 0 && c == Component::r) continue;  // absorbed into the zero-mode pressure
            const double need = k != 0 ? lambda : (c == Component::theta ? lambda_theta : lambda_z);
            const char* name = k != 0 ? "lambda" : (c == Component::theta ? "lambda_theta" : "lambda_z");
            for (const auto& t : list) {
                if (t.family == ForcingFamily::power_exp_decay && t.rate > 0.0) continue;
                if (t.exponent < need) {
                    std::ostringstream os;
                    os << "forcing f_{" << component_name(c) << "," << k << "} decays like r^-" << t.exponent
                       << ", slower than " << name << " = " << need;
                    throw std::invalid_argument(os.str());
                }
            }
        }
    }
}

double enorm(const ForcingData& f, const RadialGrid& grid, double lambda_theta, double lambda_z, double lambda) {
    double s = 0.0;
    for (Component c : kComponents) {
        for (const auto& [k, list] : f.terms(c)) {
            if (list.empty()) continue;
            if (k == 0 && c == Component::r) continue;
            const double zeta = k != 0 ? lambda : (c == Component::theta ? lambda_theta : lambda_z);
            s += weighted_sup(grid, f.sample(grid, c, k), zeta).value;
        }
    }
    return s;
}

BNormParts bnorm_parts(const FourierField& v, const RadialGrid& grid, double tau) {
    if (v.points() != static_cast<size_t>(grid.size())) throw std::invalid_argument("bnorm: grid mismatch");
    BNormParts p;
    if (v.sigma) p.sigma = std::abs(*v.sigma);
    for (int l = 0; l <= 2; ++l) {
        p.swirl_zero += weighted_sup(grid, level(v.at(Component::theta, 0), 2 - l), 3.0 + tau - l).value;
        p.vertical_zero += weighted_sup(grid, level(v.at(Component::z, 0), 2 - l), 2.0 + tau - l).value;
    }
    const int K = v.k_max();
    for (int k = -K; k <= K; ++k) {
        if (k == 0) continue;
        for (Component c : kComponents) {
            for (int l = 0; l <= 2; ++l) {
                p.nonzero += std::pow(std::abs(static_cast<double>(k)), 2 - l) *
                             weighted_sup(grid, level(v.at(c, k), l), 1.5 + tau).value;
            }
        }
    }
    return p;
}

double bnorm(const FourierField& v, const RadialGrid& grid, double tau) { return bnorm_parts(v, grid, tau).total(); }

FourierField difference(const FourierField& a, const FourierField& b) {
    if (a.k_max() != b.k_max() || a.points() != b.points()) throw std::invalid_argument("difference: shape mismatch");
    FourierField d = a;
    const int K = a.k_max();
    for (int k = -K; k <= K; ++k) {
        for (Component c : kComponents) {
            RadialProfile& x = d.at(c, k);
            const RadialProfile& y = b.at(c, k);
            for (size_t i = 0; i < x.values.size(); ++i) x.values[i] -= y.values[i];
            if (x.d1 && y.d1) for (size_t i = 0; i < x.d1->size(); ++i) (*x.d1)[i] -= (*y.d1)[i];
            if (x.d2 && y.d2) for (size_t i = 0; i < x.d2->size(); ++i) (*x.d2)[i] -= (*y.d2)[i];
        }
    }
    if (a.sigma || b.sigma) d.sigma = a.sigma.value_or(0.0) - b.sigma.value_or(0.0);
    return d;
}

}  // namespace asns
