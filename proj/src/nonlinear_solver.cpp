#include "asns/nonlinear_solver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace asns {

TauInfo compute_tau_info(double nu, double lambda_theta, double lambda_z, double lambda) {
    if (!(nu < 0.0)) throw std::invalid_argument("nu < 0 required");
    if (!(lambda_theta > 3.0)) throw std::invalid_argument("lambda_theta > 3 required");
    if (!(lambda_z > 2.0)) throw std::invalid_argument("lambda_z > 2 required");
    if (!(lambda > 1.5)) throw std::invalid_argument("lambda > 3/2 required");
    TauInfo t;
    const double cap = 2.0 - nu / 2.0;
    t.lambda_bar_theta = nu < -2.0 ? std::min(lambda_theta, cap) : lambda_theta;
    t.lambda_bar_z = std::min(lambda_z, cap);
    t.tau = std::min({t.lambda_bar_theta - 3.0, t.lambda_bar_z - 2.0, lambda - 1.5});
    if (!(t.tau > 0.0)) throw std::invalid_argument("tau > 0 required, got " + std::to_string(t.tau));
    return t;
}

double compute_tau(double nu, double lambda_theta, double lambda_z, double lambda) {
    return compute_tau_info(nu, lambda_theta, lambda_z, lambda).tau;
}

void SolverConfig::validate() const {
    if (!(nu < 0.0)) throw std::invalid_argument("nu < 0 required");
    if (!std::isfinite(mu)) throw std::invalid_argument("mu must be finite");
    if (k_max < 0) throw std::invalid_argument("k_max >= 0 required");
    if (!(r_max > 2.0)) throw std::invalid_argument("r_max > 2 required");
    if (n_radial < 16) throw std::invalid_argument("n_radial >= 16 required");
    if (!(grid_gamma >= 1.0)) throw std::invalid_argument("grid_gamma >= 1 required");
    if (!(tol_picard > 0.0)) throw std::invalid_argument("tol_picard > 0 required");
    if (max_iters < 1) throw std::invalid_argument("max_iters >= 1 required");
    if (!(relaxation > 0.0 && relaxation <= 1.0)) throw std::invalid_argument("relaxation in (0, 1] required");
    if (linear_only) {
        if (!(lambda_theta > 3.0)) throw std::invalid_argument("lambda_theta > 3 required");
        if (!(lambda_z > 2.0)) throw std::invalid_argument("lambda_z > 2 required");
        if (!(lambda > 1.0)) throw std::invalid_argument("lambda > 1 required in linear-only mode");
    } else {
        compute_tau_info(nu, lambda_theta, lambda_z, lambda);
    }
}

int resolve_thread_count(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("ASNS_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
    if (count <= 0) return;
    threads = std::min(threads, count);
    if (threads <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_lock;
    auto worker = [&] {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_lock);
                if (!error) error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

namespace {

void add_to(ModeSeries& acc, const ModeSeries& x, double scale = 1.0) {
    for (size_t k = 0; k < acc.size(); ++k)
        for (size_t i = 0; i < acc[k].size(); ++i) acc[k][i] += scale * x[k][i];
}

void divide_by_r(ModeSeries& s, const RadialGrid& grid) {
    for (auto& m : s)
        for (size_t i = 0; i < m.size(); ++i) m[i] /= grid.r(static_cast<int>(i));
}

void check_real_data(const ForcingData& f, const BoundaryData& g, const RadialGrid& grid) {
    const int K = std::max(f.max_mode(), g.max_mode());
    for (Component c : kComponents) {
        for (int k = 0; k <= K; ++k) {
            const cplx a = g.get(c, k), b = g.get(c, -k);
            const double tol = 1e-14 * std::max(1.0, std::abs(a));
            if (std::abs(b - std::conj(a)) > tol) {
                throw std::invalid_argument(std::string("boundary data g_") + component_name(c) +
                                            " is not the coefficient set of a real field at k = " + std::to_string(k));
            }
            if (!f.has(c, k) && !f.has(c, -k)) continue;
            for (double r : {1.0, 2.0, 0.5 * (1.0 + grid.r_max()), grid.r_max()}) {
                const cplx x = f.eval(c, k, r), y = f.eval(c, -k, r);
                if (std::abs(y - std::conj(x)) > 1e-14 * std::max(1e-300, std::abs(x)) + 1e-300) {
                    throw std::invalid_argument(std::string("forcing f_") + component_name(c) +
                                                " is not the coefficient set of a real field at k = " +
                                                std::to_string(k));
                }
            }
        }
    }
}

}  // namespace

ModeForcingSet assemble_rhs(const FourierField& vbar, const ForcingData& f, const RadialGrid& grid) {
    if (vbar.points() != static_cast<size_t>(grid.size())) throw std::invalid_argument("assemble_rhs: grid mismatch");
    const int K = vbar.k_max();
    const ModeSeries vr = vbar.series(Component::r, 0);
    const ModeSeries vr1 = vbar.series(Component::r, 1);
    const ModeSeries vt = vbar.series(Component::theta, 0, &grid);
    const ModeSeries vt1 = vbar.series(Component::theta, 1, &grid);
    const ModeSeries vz = vbar.series(Component::z, 0);
    const ModeSeries vz1 = vbar.series(Component::z, 1);

    ModeForcingSet out;
    double lost = 0.0, l = 0.0;
    auto conv = [&](const ModeSeries& a, const ModeSeries& b) {
        ModeSeries c = convolve_product(a, b, K, &l);
        lost = std::max(lost, l);
        return c;
    };

    // theta: -(v_r d_r + v_z d_z) v_theta - v_r v_theta / r
    out.f_theta = conv(vr, vt1);
    add_to(out.f_theta, conv(vz, z_derivative(vt)));
    {
        ModeSeries t = conv(vr, vt);
        divide_by_r(t, grid);
        add_to(out.f_theta, t);
    }
    // r: -(v_r d_r + v_z d_z) v_r + v_theta^2 / r
    out.f_r = conv(vr, vr1);
    add_to(out.f_r, conv(vz, z_derivative(vr)));
    ModeSeries tt = conv(vt, vt);
    divide_by_r(tt, grid);
    // z: -(v_r d_r + v_z d_z) v_z
    out.f_z = conv(vr, vz1);
    add_to(out.f_z, conv(vz, z_derivative(vz)));

    for (auto* s : {&out.f_theta, &out.f_r, &out.f_z})
        for (auto& m : *s)
            for (auto& x : m) x = -x;
    add_to(out.f_r, tt);

    for (int k = -K; k <= K; ++k) {
        const auto u = static_cast<size_t>(k + K);
        const CVec fr = f.sample(grid, Component::r, k);
        const CVec ft = f.sample(grid, Component::theta, k);
        const CVec fz = f.sample(grid, Component::z, k);
        for (size_t i = 0; i < fr.size(); ++i) {
            out.f_r[u][i] += fr[i];
            out.f_theta[u][i] += ft[i];
            out.f_z[u][i] += fz[i];
        }
    }

    CVec& fr0 = out.f_r[static_cast<size_t>(K)];
    out.audit.discarded_fr0 = fr0;
    for (auto& x : fr0) {
        out.audit.discarded_fr0_max = std::max(out.audit.discarded_fr0_max, std::abs(x));
        x = cplx{};
    }
    out.audit.truncation_tail = lost;
    return out;
}

KernelCache::KernelCache(const RadialGrid& grid, int k_max, double nu, int threads) {
    kernels_.resize(static_cast<size_t>(std::max(k_max, 0)));
    parallel_for(k_max, threads,
                 [&](int i) { kernels_[static_cast<size_t>(i)] = ModeKernels::build(grid, i + 1, nu); });
}

FourierField solve_linear_step(const RadialGrid& grid, const SolverConfig& cfg, const ModeForcingSet& rhs,
                               const BoundaryData& g, const KernelCache& kernels, StreamFields* aux) {
    const int K = cfg.k_max;
    const size_t n = static_cast<size_t>(grid.size());
    FourierField v(K, n);
    if (aux) {
        aux->w.assign(static_cast<size_t>(K) + 1, CVec(n, cplx{}));
        aux->phi.assign(static_cast<size_t>(K) + 1, CVec(n, cplx{}));
    }
    std::vector<ModeProfiles> slots(static_cast<size_t>(K) + 1);
    std::optional<double> sigma;
    const int threads = resolve_thread_count(cfg.threads);

    parallel_for(K + 1, threads, [&](int k) {
        const auto u = static_cast<size_t>(k + K);
        ModeProfiles& out = slots[static_cast<size_t>(k)];
        if (k == 0) {
            const ZeroModeSwirlSolution zs =
                solve_zero_swirl(grid, cfg.nu, rhs.f_theta[u], std::nullopt, g.get(Component::theta, 0));
            out.theta = zs.v_regular;
            if (zs.sigma) sigma = zs.sigma->real();
            const ZeroMeridionalSolution zm =
                solve_zero_meridional(grid, cfg.nu, rhs.f_z[u], std::nullopt, g.get(Component::z, 0));
            out.r = RadialProfile::zeros(n);
            out.z = zm.v_z;
            if (aux && out.z.d1) {
                for (size_t i = 0; i < n; ++i) aux->w[0][i] = -(*out.z.d1)[i];
            }
            return;
        }
        const ModeKernels& ker = kernels.at(k);
        out.theta = solve_swirl_mode(grid, k, cfg.nu, rhs.f_theta[u], g.get(Component::theta, k), &ker);
        MeridionalForcing mf;
        mf.f_r = rhs.f_r[u];
        for (size_t i = 0; i < n; ++i) {
            const double r = grid.r(static_cast<int>(i));
            mf.f_r[i] += 2.0 * cfg.mu * out.theta.values[i] / (r * r);
        }
        mf.f_z = rhs.f_z[u];
        const MeridionalModeSolution ms =
            solve_meridional_mode(grid, k, cfg.nu, mf, g.get(Component::r, k), g.get(Component::z, k), &ker);
        out.r = ms.v_r;
        out.z = ms.v_z;
        if (aux) {
            aux->w[static_cast<size_t>(k)] = ms.w.values;
            aux->phi[static_cast<size_t>(k)] = ms.phi.values;
        }
    });

    for (int k = 0; k <= K; ++k) v.mode(k) = std::move(slots[static_cast<size_t>(k)]);
    v.sigma = sigma;
    v.fill_conjugates();
    return v;
}

const char* status_name(PicardStatus s) {
    switch (s) {
        case PicardStatus::converged: return "converged";
        case PicardStatus::max_iterations: return "max_iterations";
        case PicardStatus::diverged: return "diverged";
    }
    return "?";
}

double contraction_from_history(const std::vector<double>& h) {
    std::vector<double> ratios;
    for (size_t i = h.size(); i >= 2 && ratios.size() < 3; --i) {
        if (h[i - 2] > 0.0) ratios.push_back(h[i - 1] / h[i - 2]);
    }
    if (ratios.empty()) return 0.0;
    double s = 0.0;
    for (double q : ratios) {
        if (q <= 0.0) return 0.0;
        s += std::log(q);
    }
    return std::exp(s / static_cast<double>(ratios.size()));
}

namespace {

void blend(FourierField& target, const FourierField& previous, double omega) {
    const int K = target.k_max();
    for (int k = -K; k <= K; ++k) {
        for (Component c : kComponents) {
            RadialProfile& x = target.at(c, k);
            const RadialProfile& y = previous.at(c, k);
            auto mix = [&](CVec& a, const CVec& b) {
                for (size_t i = 0; i < a.size(); ++i) a[i] = omega * a[i] + (1.0 - omega) * b[i];
            };
            mix(x.values, y.values);
            if (x.d1 && y.d1) mix(*x.d1, *y.d1);
            if (x.d2 && y.d2) mix(*x.d2, *y.d2);
        }
    }
    if (target.sigma && previous.sigma) target.sigma = omega * *target.sigma + (1.0 - omega) * *previous.sigma;
}

}  // namespace

SolutionBundle picard_solve(const SolverConfig& cfg, const ForcingData& f, const BoundaryData& g) {
    cfg.validate();
    if (cfg.linear_only) {
        f.validate(cfg.lambda_theta, cfg.lambda_z, std::max(cfg.lambda, 1.5 + 1e-12));
    } else {
        f.validate(cfg.lambda_theta, cfg.lambda_z, cfg.lambda);
    }
    const RadialGrid grid = cfg.make_grid();
    if (std::max(f.max_mode(), g.max_mode()) > cfg.k_max) {
        emit_warning("data modes beyond k_max = " + std::to_string(cfg.k_max) + " are ignored");
    }
    check_real_data(f, g, grid);

    SolutionBundle b;
    b.nu = cfg.nu;
    b.mu = cfg.mu;
    if (cfg.linear_only) {
        b.tau.lambda_bar_theta = cfg.nu < -2.0 ? std::min(cfg.lambda_theta, 2.0 - cfg.nu / 2.0) : cfg.lambda_theta;
        b.tau.lambda_bar_z = std::min(cfg.lambda_z, 2.0 - cfg.nu / 2.0);
        b.tau.tau = std::max(1e-3, std::min({b.tau.lambda_bar_theta - 3.0, b.tau.lambda_bar_z - 2.0,
                                             cfg.lambda - 1.5}));
    } else {
        b.tau = compute_tau_info(cfg.nu, cfg.lambda_theta, cfg.lambda_z, cfg.lambda);
    }
    const double tau = b.tau.tau;
    b.vnorm = vnorm(g);
    b.enorm = enorm(f, grid, cfg.lambda_theta, cfg.lambda_z, cfg.lambda);
    if (b.vnorm + b.enorm > cfg.smallness) {
        b.smallness_exceeded = true;
        std::ostringstream os;
        os << "data size enorm + vnorm = " << b.vnorm + b.enorm << " exceeds the smallness threshold "
           << cfg.smallness << "; convergence is not guaranteed";
        emit_warning(os.str());
    }

    const int threads = resolve_thread_count(cfg.threads);
    const KernelCache kernels(grid, cfg.k_max, cfg.nu, threads);
    FourierField v(cfg.k_max, static_cast<size_t>(grid.size()));
    if (cfg.nu >= -2.0) v.sigma = 0.0;

    IterationState& st = b.state;
    int increases = 0;
    for (int it = 1; it <= cfg.max_iters; ++it) {
        const ModeForcingSet rhs = assemble_rhs(v, f, grid);
        FourierField next = solve_linear_step(grid, cfg, rhs, g, kernels, &b.stream);
        if (cfg.relaxation < 1.0) blend(next, v, cfg.relaxation);
        const double d = bnorm(difference(next, v), grid, tau);
        st.iter = it;
        st.diff_norm_history.push_back(d);
        b.audit = rhs.audit;
        v = std::move(next);
        st.iterate_norms.push_back(bnorm(v, grid, tau));
        if (!std::isfinite(d)) {
            st.status = PicardStatus::diverged;
            st.diagnostic = "non-finite iterate difference at iteration " + std::to_string(it);
            break;
        }
        if (d <= cfg.tol_picard || cfg.linear_only) {
            st.status = PicardStatus::converged;
            break;
        }
        const size_t h = st.diff_norm_history.size();
        increases = (h >= 2 && st.diff_norm_history[h - 1] > st.diff_norm_history[h - 2]) ? increases + 1 : 0;
        if (increases >= 3) {
            st.status = PicardStatus::diverged;
            std::ostringstream os;
            os << "iterate differences grew for 3 consecutive steps (last " << d << ") at iteration " << it;
            st.diagnostic = os.str();
            break;
        }
    }
    if (st.status == PicardStatus::max_iterations) {
        st.diagnostic = "tol_picard not reached after " + std::to_string(cfg.max_iters) + " iterations";
    }
    st.contraction_estimate = contraction_from_history(st.diff_norm_history);
    b.v = std::move(v);
    b.bnorm = bnorm(b.v, grid, tau);
    const double data = b.vnorm + b.enorm;
    b.c_emp = data > 0.0 ? b.bnorm / data : 0.0;
    return b;
}

ModeSeries recover_pressure_field(const SolutionBundle& b, const ForcingData& f, const RadialGrid& grid) {
    const FourierField& v = b.v;
    const int K = v.k_max();
    const size_t n = static_cast<size_t>(grid.size());
    const ModeForcingSet rhs = assemble_rhs(v, f, grid);
    ModeSeries p(static_cast<size_t>(2 * K + 1), CVec(n, cplx{}));
    {
        const RadialProfile vt = v.swirl_zero_total(grid);
        CVec src = rhs.audit.discarded_fr0;
        for (size_t i = 0; i < n; ++i) {
            const double r = grid.r(static_cast<int>(i));
            src[i] += 2.0 * b.mu * vt.values[i] / (r * r);
        }
        p[static_cast<size_t>(K)] = recover_pressure(grid, 0, b.nu, v.at(Component::z, 0), src, {}).values;
    }
    for (int k = 1; k <= K; ++k) {
        const auto u = static_cast<size_t>(k + K);
        p[u] = recover_pressure(grid, k, b.nu, v.at(Component::z, k), {}, rhs.f_z[u]).values;
        CVec c = p[u];
        for (auto& x : c) x = std::conj(x);
        p[static_cast<size_t>(K - k)] = c;
    }
    return p;
}

namespace {

cplx interpolate(const RadialGrid& grid, const CVec& s, double r) {
    const int c = grid.locate(r);
    const int j0 = std::clamp(c - 1, 0, grid.size() - 4);
    RVec x(4);
    for (int m = 0; m < 4; ++m) x[static_cast<size_t>(m)] = grid.r(j0 + m);
    const auto w = fd_weights(r, x, 0);
    cplx out{};
    for (int m = 0; m < 4; ++m) out += w[0][static_cast<size_t>(m)] * s[static_cast<size_t>(j0 + m)];
    return out;
}

}  // namespace

NonuniquenessResult nonuniqueness_pair(const SolverConfig& cfg, const ForcingData& f, const BoundaryData& g,
                                       double delta_mu) {
    if (!(cfg.nu < -2.0)) {
        throw std::invalid_argument(
            "the two-solution construction needs nu < -2; for nu >= -2 non-uniqueness is an open question");
    }
    NonuniquenessResult res;
    res.delta_mu = delta_mu;
    res.first = picard_solve(cfg, f, g);
    SolverConfig cfg2 = cfg;
    cfg2.mu = cfg.mu + delta_mu;
    BoundaryData g2 = g;
    g2.set(Component::theta, 0, g.get(Component::theta, 0) - delta_mu);
    res.second = picard_solve(cfg2, f, g2);

    const RadialGrid grid = cfg.make_grid();
    const RadialProfile a = res.first.v.swirl_zero_total(grid);
    const RadialProfile b = res.second.v.swirl_zero_total(grid);
    CVec sep(static_cast<size_t>(grid.size()));
    for (int i = 0; i < grid.size(); ++i) {
        const auto u = static_cast<size_t>(i);
        const double r = grid.r(i);
        sep[u] = (cfg.mu - cfg2.mu) + r * (a.values[u] - b.values[u]);
    }
    const int lo = grid.first_at_or_above(grid.r_max() / 10.0);
    double s00 = 0, s01 = 0, s11 = 0, t0 = 0, t1 = 0;
    for (int i = lo; i < grid.size(); ++i) {
        const double r = grid.r(i);
        const double y = sep[static_cast<size_t>(i)].real();
        res.separation.push_back({r, y});
        const double phi = std::pow(r, cfg.nu + 2.0);
        s00 += 1.0;
        s01 += phi;
        s11 += phi * phi;
        t0 += y;
        t1 += phi * y;
    }
    const double det = s00 * s11 - s01 * s01;
    res.limit_estimate = std::abs(det) > 0.0 ? (t0 * s11 - t1 * s01) / det : t0 / std::max(s00, 1.0);
    res.at_half = interpolate(grid, sep, grid.r_max() / 2.0).real();
    res.bnorm_distance = bnorm(difference(res.first.v, res.second.v), grid, res.first.tau.tau);
    return res;
}

}  // namespace asns
