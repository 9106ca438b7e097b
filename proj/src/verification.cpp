#include "asns/verification.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace asns {

DecayFit decay_fit(const RadialGrid& grid, const CVec& s) {
    if (static_cast<int>(s.size()) != grid.size()) throw std::invalid_argument("decay_fit: size mismatch");
    const PowerFit f = fit_power_law(grid, s, grid.r_max() / 10.0, grid.r_max());
    if (f.points < 2) throw std::domain_error("decay_fit: no nonzero samples in the last decade");
    return {f.exponent, f.r_squared, f.points};
}

DecayFit decay_fit(const RadialGrid& grid, const RadialProfile& p) { return decay_fit(grid, p.values); }

double RegionResidual::max_momentum() const {
    // with a pressure the curl form is only a diagnostic
    if (momentum_r && momentum_z) return std::max({momentum_theta, *momentum_r, *momentum_z});
    return std::max(momentum_theta, curl_rz);
}

namespace {

using Table = std::vector<RVec>;  // [z sample][node]

// Real trigonometric differentiation matrices on M equispaced points (M odd).
struct SpectralZ {
    int m = 1;
    std::vector<RVec> d1, d2;

    explicit SpectralZ(int points) : m(points) {
        d1.assign(static_cast<size_t>(m), RVec(static_cast<size_t>(m), 0.0));
        d2 = d1;
        const int kmax = (m - 1) / 2;
        for (int j = 0; j < m; ++j) {
            for (int l = 0; l < m; ++l) {
                const double dz = 2.0 * std::numbers::pi * (j - l) / m;
                double a = 0.0, b = 0.0;
                for (int k = 1; k <= kmax; ++k) {
                    a += -2.0 * k * std::sin(k * dz);
                    b += -2.0 * k * k * std::cos(k * dz);
                }
                d1[static_cast<size_t>(j)][static_cast<size_t>(l)] = a / m;
                d2[static_cast<size_t>(j)][static_cast<size_t>(l)] = b / m;
            }
        }
    }

    Table apply(const std::vector<RVec>& mat, const Table& t) const {
        const size_t n = t[0].size();
        Table out(static_cast<size_t>(m), RVec(n, 0.0));
        for (int j = 0; j < m; ++j) {
            RVec& o = out[static_cast<size_t>(j)];
            for (int l = 0; l < m; ++l) {
                const double w = mat[static_cast<size_t>(j)][static_cast<size_t>(l)];
                if (w == 0.0) continue;
                const RVec& x = t[static_cast<size_t>(l)];
                for (size_t i = 0; i < n; ++i) o[i] += w * x[i];
            }
        }
        return out;
    }
};

class TrigSup {
public:
    explicit TrigSup(int points) : m_(points), kmax_((points - 1) / 2), fine_(8 * points) {
        cos_.resize(static_cast<size_t>(fine_) * static_cast<size_t>(kmax_ + 1));
        sin_ = cos_;
        for (int l = 0; l < fine_; ++l) {
            for (int k = 0; k <= kmax_; ++k) {
                const double t = 2.0 * std::numbers::pi * static_cast<double>((k * l) % fine_) / fine_;
                cos_[idx(l, k)] = std::cos(t);
                sin_[idx(l, k)] = std::sin(t);
            }
        }
    }

    double operator()(const Table& t, size_t node) const {
        // p(s) = sum_k a_k cos(ks) + b_k sin(ks), s measured from the first sample
        RVec a(static_cast<size_t>(kmax_) + 1, 0.0), b = a;
        for (int j = 0; j < m_; ++j) {
            const double y = t[static_cast<size_t>(j)][node];
            for (int k = 0; k <= kmax_; ++k) {
                const int l = (8 * k * j) % fine_;
                a[static_cast<size_t>(k)] += y * cos_[idx(l, 1)];
                b[static_cast<size_t>(k)] += y * sin_[idx(l, 1)];
            }
        }
        a[0] /= m_;
        b[0] = 0.0;
        for (size_t k = 1; k < a.size(); ++k) {
            a[k] *= 2.0 / m_;
            b[k] *= 2.0 / m_;
        }
        auto eval = [&](double s) {
            double y = a[0];
            for (int k = 1; k <= kmax_; ++k) y += a[static_cast<size_t>(k)] * std::cos(k * s) + b[static_cast<size_t>(k)] * std::sin(k * s);
            return y;
        };
        int best = 0;
        double best_val = -1.0;
        for (int l = 0; l < fine_; ++l) {
            double y = 0.0;
            for (int k = 0; k <= kmax_; ++k) y += a[static_cast<size_t>(k)] * cos_[idx(l, k)] + b[static_cast<size_t>(k)] * sin_[idx(l, k)];
            if (std::abs(y) > best_val) {
                best_val = std::abs(y);
                best = l;
            }
        }
        // Newton on p' = 0 from the best fine sample
        const double h = 2.0 * std::numbers::pi / fine_;
        const double s0 = best * h;
        double s = s0;
        for (int it = 0; it < 6; ++it) {
            double d1 = 0.0, d2 = 0.0;
            for (int k = 1; k <= kmax_; ++k) {
                const double c = std::cos(k * s), sn = std::sin(k * s);
                const double ak = a[static_cast<size_t>(k)], bk = b[static_cast<size_t>(k)];
                d1 += k * (bk * c - ak * sn);
                d2 -= static_cast<double>(k) * k * (ak * c + bk * sn);
            }
            if (d2 == 0.0) break;
            const double step = -d1 / d2;
            if (!std::isfinite(step) || std::abs(s + step - s0) > h) break;
            s += step;
            if (std::abs(step) < 1e-15) break;
        }
        return std::max(best_val, std::abs(eval(s)));
    }

private:
    size_t idx(int l, int k) const { return static_cast<size_t>(l) * static_cast<size_t>(kmax_ + 1) + static_cast<size_t>(k); }
    int m_, kmax_, fine_;
    RVec cos_, sin_;
};

Table synthesize_table(const ModeSeries& modes, const RVec& zs, size_t n, double* imag) {
    const int K = (static_cast<int>(modes.size()) - 1) / 2;
    Table out(zs.size(), RVec(n, 0.0));
    for (size_t j = 0; j < zs.size(); ++j) {
        for (size_t i = 0; i < n; ++i) {
            cplx s{};
            for (int k = -K; k <= K; ++k) s += modes[static_cast<size_t>(k + K)][i] * std::exp(cplx(0.0, k * zs[j]));
            out[j][i] = s.real();
            if (imag) *imag = std::max(*imag, std::abs(s.imag()));
        }
    }
    return out;
}

// Inverse of synthesize_table for M samples of a real trigonometric polynomial
// of degree (M - 1) / 2.
ModeSeries analyze_table(const Table& t, const RVec& zs) {
    const int M = static_cast<int>(zs.size());
    const int K = (M - 1) / 2;
    const size_t n = t[0].size();
    ModeSeries out(static_cast<size_t>(2 * K + 1), CVec(n, cplx{}));
    for (int k = -K; k <= K; ++k) {
        CVec& c = out[static_cast<size_t>(k + K)];
        for (size_t j = 0; j < zs.size(); ++j) {
            const cplx e = std::exp(cplx(0.0, -k * zs[j])) / static_cast<double>(M);
            for (size_t i = 0; i < n; ++i) c[i] += t[j][i] * e;
        }
    }
    return out;
}

}  // namespace

ResidualReport residual_asns(const FourierField& v, const RadialGrid& grid, const Background& bg,
                             const ForcingData& f, const BoundaryData* g, const ModeSeries* pressure,
                             const ResidualOptions& opts) {
    if (v.points() != static_cast<size_t>(grid.size())) throw std::invalid_argument("residual_asns: grid mismatch");
    const int K = v.k_max();
    int M = opts.z_samples > 0 ? opts.z_samples : 4 * K + 1;
    if (M % 2 == 0) ++M;
    const size_t n = static_cast<size_t>(grid.size());
    if (pressure && pressure->size() != static_cast<size_t>(2 * K + 1)) {
        throw std::invalid_argument("residual_asns: pressure truncation mismatch");
    }

    ResidualReport rep;
    rep.n_radial = grid.intervals();
    rep.k_max = K;
    rep.z_samples = M;
    rep.r_max = grid.r_max();
    rep.r_split = opts.split_fraction * grid.r_max();

    RVec zs(static_cast<size_t>(M));
    for (int j = 0; j < M; ++j) zs[static_cast<size_t>(j)] = opts.z_shift + 2.0 * std::numbers::pi * j / M;

    // physical samples of the perturbation (sigma/r included) and of the forcing
    double imag = 0.0;
    const ModeSeries mr = v.series(Component::r, 0);
    const ModeSeries mt = v.series(Component::theta, 0, &grid);
    const ModeSeries mz = v.series(Component::z, 0);
    const Table vr = synthesize_table(mr, zs, n, &imag);
    const Table vt = synthesize_table(mt, zs, n, &imag);
    const Table vz = synthesize_table(mz, zs, n, &imag);
    auto forcing_series = [&](Component c) {
        ModeSeries s(static_cast<size_t>(2 * K + 1), CVec(n, cplx{}));
        for (int k = -K; k <= K; ++k) s[static_cast<size_t>(k + K)] = f.sample(grid, c, k);
        return s;
    };
    const Table fr = synthesize_table(forcing_series(Component::r), zs, n, nullptr);
    const Table ft = synthesize_table(forcing_series(Component::theta), zs, n, nullptr);
    const Table fz = synthesize_table(forcing_series(Component::z), zs, n, nullptr);
    rep.imag_residue = imag;

    const SpectralZ sz(M);
    const FiniteDifference fd(grid, opts.min_spacing);
    // Radial derivatives act on the mode profiles before synthesis, so their
    // round-off does not depend on where the z samples sit.
    auto radial = [&](const ModeSeries& m, int order, const FiniteDifference& d) {
        ModeSeries out(m.size());
        for (size_t k = 0; k < m.size(); ++k) out[k] = order == 1 ? d.d1(m[k]) : d.d2(m[k]);
        return synthesize_table(out, zs, n, nullptr);
    };
    const Table vr_r = radial(mr, 1, fd), vr_rr = radial(mr, 2, fd);
    const Table vt_r = radial(mt, 1, fd), vt_rr = radial(mt, 2, fd);
    const Table vz_r = radial(mz, 1, fd), vz_rr = radial(mz, 2, fd);
    const Table vr_z = sz.apply(sz.d1, vr), vr_zz = sz.apply(sz.d2, vr);
    const Table vt_z = sz.apply(sz.d1, vt), vt_zz = sz.apply(sz.d2, vt);
    const Table vz_z = sz.apply(sz.d1, vz), vz_zz = sz.apply(sz.d2, vz);

    Table Rr(static_cast<size_t>(M), RVec(n)), Rt = Rr, Rz = Rr, Dv = Rr;
    for (size_t j = 0; j < static_cast<size_t>(M); ++j) {
        for (size_t i = 0; i < n; ++i) {
            const double r = grid.r(static_cast<int>(i));
            const double r2 = r * r, r3 = r2 * r;
            // background derivatives are exact
            const double ur = bg.nu / r + vr[j][i];
            const double ut = bg.mu / r + vt[j][i];
            const double uz = vz[j][i];
            const double ur_r = -bg.nu / r2 + vr_r[j][i];
            const double ut_r = -bg.mu / r2 + vt_r[j][i];
            const double uz_r = vz_r[j][i];
            const double ur_rr = 2.0 * bg.nu / r3 + vr_rr[j][i];
            const double ut_rr = 2.0 * bg.mu / r3 + vt_rr[j][i];
            const double uz_rr = vz_rr[j][i];
            Rr[j][i] = ur * ur_r + uz * vr_z[j][i] - ut * ut / r -
                       (ur_rr + ur_r / r + vr_zz[j][i] - ur / r2) - fr[j][i];
            Rt[j][i] = ur * ut_r + uz * vt_z[j][i] + ur * ut / r -
                       (ut_rr + ut_r / r + vt_zz[j][i] - ut / r2) - ft[j][i];
            Rz[j][i] = ur * uz_r + uz * vz_z[j][i] - (uz_rr + uz_r / r + vz_zz[j][i]) - fz[j][i];
            Dv[j][i] = ur_r + ur / r + vz_z[j][i];
        }
    }
    const Table Rr_z = sz.apply(sz.d1, Rr);
    const FiniteDifference fd_curl(grid, opts.curl_spacing);
    const Table Rz_r = radial(analyze_table(Rz, zs), 1, fd_curl);

    std::optional<Table> Pr, Pz;
    if (pressure) {
        const Table p = synthesize_table(*pressure, zs, n, nullptr);
        Pr = radial(*pressure, 1, fd);
        Pz = sz.apply(sz.d1, p);
    }

    rep.curve.resize(n);
    const TrigSup sup(M);
    Table Curl(static_cast<size_t>(M), RVec(n)), Mr, Mz;
    for (size_t j = 0; j < static_cast<size_t>(M); ++j)
        for (size_t i = 0; i < n; ++i) Curl[j][i] = Rr_z[j][i] - Rz_r[j][i];
    if (pressure) {
        Mr = Rr;
        Mz = Rz;
        for (size_t j = 0; j < static_cast<size_t>(M); ++j) {
            for (size_t i = 0; i < n; ++i) {
                const double r = grid.r(static_cast<int>(i));
                Mr[j][i] += (bg.nu * bg.nu + bg.mu * bg.mu) / (r * r * r) + (*Pr)[j][i];
                Mz[j][i] += (*Pz)[j][i];
            }
        }
    }
    // primitive r and z maxima for the inner and outer regions
    double mom_r[2] = {0.0, 0.0}, mom_z[2] = {0.0, 0.0};
    for (size_t i = 0; i < n; ++i) {
        const double r = grid.r(static_cast<int>(i));
        ResidualRow row;
        row.r = r;
        row.momentum_theta = sup(Rt, i);
        row.curl_rz = sup(Curl, i);
        row.divergence = sup(Dv, i);
        if (pressure) {
            row.momentum_r = sup(Mr, i);
            row.momentum_z = sup(Mz, i);
        }
        rep.curve[i] = row;
        RegionResidual& reg = r <= rep.r_split ? rep.inner : rep.outer;
        reg.momentum_theta = std::max(reg.momentum_theta, row.momentum_theta);
        reg.curl_rz = std::max(reg.curl_rz, row.curl_rz);
        reg.divergence = std::max(reg.divergence, row.divergence);
        const int side = r <= rep.r_split ? 0 : 1;
        mom_r[side] = std::max(mom_r[side], row.momentum_r);
        mom_z[side] = std::max(mom_z[side], row.momentum_z);
    }
    if (pressure) {
        rep.inner.momentum_r = mom_r[0];
        rep.inner.momentum_z = mom_z[0];
        rep.outer.momentum_r = mom_r[1];
        rep.outer.momentum_z = mom_z[1];
    }

    if (g) {
        for (Component c : kComponents) {
            for (int k = -K; k <= K; ++k) {
                cplx at1 = v.at(c, k).values[0];
                if (c == Component::theta && k == 0 && v.sigma) at1 += *v.sigma;
                rep.max_boundary_mismatch = std::max(rep.max_boundary_mismatch, std::abs(at1 - g->get(c, k)));
            }
            for (const auto& [k, val] : g->entries(c)) {
                if (std::abs(k) > K) rep.max_boundary_mismatch = std::max(rep.max_boundary_mismatch, std::abs(val));
            }
        }
    }

    const int lo = grid.first_at_or_above(grid.r_max() / 10.0);
    for (Component c : kComponents) {
        for (int k = 0; k <= K; ++k) {
            if (c == Component::r && k == 0) continue;
            const CVec& s = v.at(c, k).values;
            bool nonzero = false;
            for (int i = lo; i < grid.size() && !nonzero; ++i) nonzero = s[static_cast<size_t>(i)] != cplx{};
            if (!nonzero) continue;
            rep.decay_fits[std::string(component_name(c)) + "_" + std::to_string(k)] = decay_fit(grid, s);
        }
    }
    return rep;
}

}  // namespace asns
