#pragma once

// The three headline experiments (contraction, Lyapunov drift, propagation
// of chaos), exponential rate fitting, and the time-series container they
// all record into.

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "kmv/constants.hpp"
#include "kmv/dynamics.hpp"
#include "kmv/profile.hpp"
#include "kmv/semimetric.hpp"
#include "kmv/threading.hpp"
#include "kmv/wasserstein.hpp"

namespace kmv {

struct TimeSeries {
    std::vector<double> times;
    std::vector<std::string> names;
    std::vector<std::vector<double>> cols;
    long replica_count = 0;
    long excluded_count = 0;

    std::vector<double>& col(const std::string& name) {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == name) return cols[i];
        names.push_back(name);
        cols.emplace_back();
        return cols.back();
    }
    const std::vector<double>& col(const std::string& name) const {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == name) return cols[i];
        throw std::out_of_range("TimeSeries: no column " + name);
    }
    bool has(const std::string& name) const {
        for (const auto& n : names)
            if (n == name) return true;
        return false;
    }
};

struct RateFit {
    double rate = 0;      // fitted exponential decay rate (= -slope of log y)
    double intercept = 0; // at t = 0
    double r_squared = 0;
    double rate_se = 0;
    double t_lo = 0, t_hi = 0;
    int n_points = 0;
};

// OLS on (t, log y) over the window; non-positive values are dropped
// (window auto-shrink); fewer than 8 surviving points rejects the fit.
inline RateFit fit_exponential_rate(const TimeSeries& ts, const std::string& column, double t_lo,
                                    double t_hi) {
    const auto& y = ts.col(column);
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < ts.times.size(); ++i) {
        double t = ts.times[i];
        if (t < t_lo || t > t_hi) continue;
        if (!(y[i] > 0)) continue;
        xs.push_back(t);
        ys.push_back(std::log(y[i]));
    }
    if (xs.size() < 8) throw std::runtime_error("fit_exponential_rate: fewer than 8 usable points");
    const std::size_t n = xs.size();
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    double slope = sxy / sxx;
    RateFit fit;
    fit.rate = -slope;
    fit.intercept = my - slope * mx;
    double rss = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double e = ys[i] - (fit.intercept + slope * xs[i]);
        rss += e * e;
    }
    fit.r_squared = syy > 0 ? 1.0 - rss / syy : 1.0;
    fit.rate_se = n > 2 ? std::sqrt(rss / (n - 2) / sxx) : 0.0;
    fit.t_lo = t_lo;
    fit.t_hi = t_hi;
    fit.n_points = static_cast<int>(n);
    return fit;
}

struct InitSpec {
    enum class Kind { gaussian, point };
    Kind kind = Kind::gaussian;
    Vec mean_x, mean_v; // resized to d on use
    double sigma_x = 0.5, sigma_v = 0.5;

    bool same_as(const InitSpec& o) const {
        return kind == o.kind && mean_x == o.mean_x && mean_v == o.mean_v &&
               sigma_x == o.sigma_x && sigma_v == o.sigma_v;
    }
};

namespace detail {

inline void draw_init(const InitSpec& spec, int d, const RngStream& rng, double* x, double* v) {
    double gx[8] = {0}, gv[8] = {0};
    if (spec.kind == InitSpec::Kind::gaussian) {
        rng.fill_gauss(0, 0, gx, d);
        rng.fill_gauss(0, 1, gv, d);
    }
    for (int k = 0; k < d; ++k) {
        double mx = k < static_cast<int>(spec.mean_x.size()) ? spec.mean_x[k] : 0.0;
        double mv = k < static_cast<int>(spec.mean_v.size()) ? spec.mean_v[k] : 0.0;
        x[k] = mx + spec.sigma_x * gx[k];
        v[k] = mv + spec.sigma_v * gv[k];
    }
}

inline double mean_H_flat(const std::vector<double>& x, const std::vector<double>& v,
                          const std::vector<char>& excluded, int n, int d,
                          const ConfiningPotential& pot, double gamma, double lambda,
                          std::vector<double>* per_row = nullptr) {
    if (per_row) per_row->assign(n, 0.0);
    long active = 0;
    for (int i = 0; i < n; ++i) active += excluded[i] ? 0 : 1;
    double s = pairwise_sum(0, static_cast<std::size_t>(n), [&](std::size_t i) {
        if (excluded[i]) return 0.0;
        PhasePoint p(Vec(x.begin() + i * d, x.begin() + (i + 1) * d),
                     Vec(v.begin() + i * d, v.begin() + (i + 1) * d));
        double h = lyapunov_H(p, pot, gamma, lambda);
        if (per_row) (*per_row)[i] = h;
        return h;
    });
    return active ? s / active : 0.0;
}

inline EmpiricalMeasure side_measure(const std::vector<double>& x, const std::vector<double>& v,
                                     const std::vector<char>& excluded, int n, int d) {
    EmpiricalMeasure m;
    m.points.reserve(n);
    for (int i = 0; i < n; ++i) {
        if (excluded[i]) continue;
        m.points.emplace_back(Vec(x.begin() + i * d, x.begin() + (i + 1) * d),
                              Vec(v.begin() + i * d, v.begin() + (i + 1) * d));
    }
    return m;
}

} // namespace detail

struct ContractionOptions {
    double window_frac = 0.5;  // fit window = tail [w*T, T]
    std::size_t w_max_exact = 4096;
};

struct ContractionResult {
    TimeSeries ts;
    RateFit fit;
    double xi_used = 0;
    double tau_double = 0; // saturating view of tau = c - L_W C_K
    bool ok = false;
    std::string error;
};

// Two-process coupling experiment: M coupled pairs from the product coupling
// of the two initial laws (common draws when the laws coincide, so equal
// inits stay bitwise merged). Records E rho, exact W1/W2 between the two
// marginal clouds, and mean H per side.
inline ContractionResult run_contraction(const ModelParams& mp, const DerivedConstants& dc,
                                         const ConfiningPotential& pot_U,
                                         const InteractionPotential& pot_W, SimConfig cfg,
                                         const InitSpec& init_1, const InitSpec& init_2,
                                         ContractionOptions opt = {}) {
    ContractionResult res;
    if (mp.L_W > 0 && !(dc.tau.sign() > 0)) {
        res.error = "tau <= 0: L_W exceeds the admissible interaction bound (log10 bound = " +
                    std::to_string(dc.L_W_max.is_zero() ? -1e9 : dc.L_W_max.log10()) + ")";
        return res;
    }
    cfg.validate();
    if (cfg.xi <= 0) cfg.xi = 1e-2 * dc.R1;
    res.xi_used = cfg.xi;
    res.tau_double = dc.tau.to_double();

    DistanceProfile profile = build_profile(mp, dc);
    const int d = mp.d, M = cfg.n_replicas;
    CoupledCloud cloud;
    cloud.mode = CoupledMode::pair_nonlinear;
    cloud.resize(M, d);
    const bool same = init_1.same_as(init_2);
    for (int i = 0; i < M; ++i) {
        RngStream r1(cfg.seed, RngStream::stream_id(detail::kStreamInit, 2 * i));
        RngStream r2(cfg.seed, RngStream::stream_id(detail::kStreamInit, 2 * i + 1));
        detail::draw_init(init_1, d, r1, &cloud.x1[i * d], &cloud.v1[i * d]);
        detail::draw_init(init_2, d, same ? r1 : r2, &cloud.x2[i * d], &cloud.v2[i * d]);
    }

    StepContext ctx;
    ctx.pot_U = &pot_U;
    ctx.pot_W = &pot_W;
    ctx.alpha = dc.alpha;
    ctx.R1 = dc.R1;
    ctx.stream_kind = detail::kStreamPair;

    const long S = cfg.n_steps();
    TimeSeries& ts = res.ts;
    ts.replica_count = M;
    WassersteinOptions wopt;
    wopt.max_exact = opt.w_max_exact;
    wopt.seed = cfg.seed;

    auto record = [&](long step) {
        double t = step * cfg.dt;
        const int n = cloud.n;
        std::vector<double> rho_i(n, 0.0), l1_i(n, 0.0);
        long active = cloud.active_count();
        for (int i = 0; i < n; ++i) {
            if (cloud.excluded[i]) continue;
            PhasePoint p(Vec(cloud.x1.begin() + i * d, cloud.x1.begin() + (i + 1) * d),
                         Vec(cloud.v1.begin() + i * d, cloud.v1.begin() + (i + 1) * d));
            PhasePoint q(Vec(cloud.x2.begin() + i * d, cloud.x2.begin() + (i + 1) * d),
                         Vec(cloud.v2.begin() + i * d, cloud.v2.begin() + (i + 1) * d));
            rho_i[i] = rho_eval(p, q, profile, pot_U, dc.gamma, mp.lambda);
            double dx = 0, dv = 0;
            for (int k = 0; k < d; ++k) {
                dx += (p.x[k] - q.x[k]) * (p.x[k] - q.x[k]);
                dv += (p.v[k] - q.v[k]) * (p.v[k] - q.v[k]);
            }
            l1_i[i] = std::sqrt(dx) + std::sqrt(dv);
        }
        double m_rho = pairwise_sum(0, rho_i.size(), [&](std::size_t i) { return rho_i[i]; }) /
                       std::max<long>(active, 1);
        double var = pairwise_sum(0, rho_i.size(), [&](std::size_t i) {
                         return cloud.excluded[i] ? 0.0 : (rho_i[i] - m_rho) * (rho_i[i] - m_rho);
                     }) /
                     std::max<long>(active - 1, 1);
        double m_l1 = pairwise_sum(0, l1_i.size(), [&](std::size_t i) { return l1_i[i]; }) /
                      std::max<long>(active, 1);

        auto mu = detail::side_measure(cloud.x1, cloud.v1, cloud.excluded, n, d);
        auto nu = detail::side_measure(cloud.x2, cloud.v2, cloud.excluded, n, d);
        double w1 = wasserstein_exact(mu, nu, TransportCost::L1, wopt);
        double w2 = wasserstein_exact(mu, nu, TransportCost::L2_squared, wopt);
        double eh1 = detail::mean_H_flat(cloud.x1, cloud.v1, cloud.excluded, n, d, pot_U, dc.gamma,
                                         mp.lambda);
        double eh2 = detail::mean_H_flat(cloud.x2, cloud.v2, cloud.excluded, n, d, pot_U, dc.gamma,
                                         mp.lambda);
        ts.times.push_back(t);
        ts.col("E_rho").push_back(m_rho);
        ts.col("SE_rho").push_back(std::sqrt(var / std::max<long>(active, 1)));
        ts.col("W1").push_back(w1);
        ts.col("W2").push_back(w2);
        ts.col("E_H_1").push_back(eh1);
        ts.col("E_H_2").push_back(eh2);
        ts.col("E_l1").push_back(m_l1); // coupled upper bound for W1 (not in the CSV schema)
    };

    record(0);
    for (long s = 0; s < S; ++s) {
        step_pair_coupled(cloud, ctx, cfg, s);
        if ((s + 1) % cfg.record_every == 0 || s + 1 == S) record(s + 1);
    }
    ts.excluded_count = cloud.excluded_count;
    if (cloud.excluded_count * 100 > cloud.n) {
        res.error = "more than 1% of replicas diverged";
        return res;
    }
    try {
        res.fit = fit_exponential_rate(ts, "E_rho", opt.window_frac * cfg.t_final, cfg.t_final);
    } catch (const std::exception& e) {
        res.error = e.what();
        return res;
    }
    res.ok = true;
    return res;
}

struct DriftResult {
    TimeSeries ts;
    bool drift_ok = false;    // margin >= -3 SE at every record
    bool terminal_ok = false; // E H(T) <= B/gamma + E H(0) e^{-gamma T} + 3 SE
    double min_margin_se = 0;
    bool ok = false;
    std::string error;
};

// Nonlinear ensemble (M replicas interacting through the ensemble mean
// field); audits dE H/dt <= B - gamma E H along the trajectory.
inline DriftResult run_lyapunov_drift(const ModelParams& mp, const DerivedConstants& dc,
                                      const ConfiningPotential& pot_U,
                                      const InteractionPotential& pot_W, SimConfig cfg,
                                      const InitSpec& init) {
    DriftResult res;
    cfg.validate();
    if (cfg.xi <= 0) cfg.xi = 1e-2 * dc.R1;
    const int d = mp.d, M = cfg.n_replicas;
    ParticleCloud cloud;
    cloud.resize(M, d);
    for (int i = 0; i < M; ++i) {
        RngStream r(cfg.seed, RngStream::stream_id(detail::kStreamInit, i));
        detail::draw_init(init, d, r, &cloud.x[i * d], &cloud.v[i * d]);
    }
    StepContext ctx;
    ctx.pot_U = &pot_U;
    ctx.pot_W = &pot_W;
    ctx.alpha = dc.alpha;
    ctx.R1 = dc.R1;
    ctx.stream_kind = detail::kStreamParticle;

    const long S = cfg.n_steps();
    TimeSeries& ts = res.ts;
    ts.replica_count = M;
    std::vector<double> h_prev, h_cur;
    double t_prev = 0;
    res.min_margin_se = std::numeric_limits<double>::infinity();

    auto record = [&](long step) {
        double t = step * cfg.dt;
        double eh = detail::mean_H_flat(cloud.x, cloud.v, cloud.excluded, M, d, pot_U, dc.gamma,
                                        mp.lambda, &h_cur);
        long active = cloud.active_count();
        double var = pairwise_sum(0, h_cur.size(), [&](std::size_t i) {
                         return cloud.excluded[i] ? 0.0 : (h_cur[i] - eh) * (h_cur[i] - eh);
                     }) /
                     std::max<long>(active - 1, 1);
        double se = std::sqrt(var / std::max<long>(active, 1));
        double slope = 0, margin_se = 1e9, bound = dc.B - dc.gamma * eh;
        if (!h_prev.empty()) {
            double dt_rec = t - t_prev;
            double ms = pairwise_sum(0, h_cur.size(), [&](std::size_t i) {
                            return cloud.excluded[i] ? 0.0 : (h_cur[i] - h_prev[i]) / dt_rec;
                        }) /
                        std::max<long>(active, 1);
            double vs = pairwise_sum(0, h_cur.size(), [&](std::size_t i) {
                            if (cloud.excluded[i]) return 0.0;
                            double u = (h_cur[i] - h_prev[i]) / dt_rec - ms;
                            return u * u;
                        }) /
                        std::max<long>(active - 1, 1);
            double se_slope = std::sqrt(vs / std::max<long>(active, 1));
            slope = ms;
            double eh_prev = ts.col("E_H").back();
            bound = dc.B - dc.gamma * std::max(eh, eh_prev);
            margin_se = se_slope > 0 ? (bound - slope) / se_slope : (bound >= slope ? 1e9 : -1e9);
            res.min_margin_se = std::min(res.min_margin_se, margin_se);
        }
        ts.times.push_back(t);
        ts.col("E_H").push_back(eh);
        ts.col("SE").push_back(se);
        ts.col("slope_est").push_back(slope);
        ts.col("bound").push_back(bound);
        ts.col("margin_SE").push_back(margin_se);
        h_prev = h_cur;
        t_prev = t;
    };

    record(0);
    for (long s = 0; s < S; ++s) {
        step_particle_system(cloud, ctx, cfg, s);
        if ((s + 1) % cfg.record_every == 0 || s + 1 == S) record(s + 1);
    }
    ts.excluded_count = cloud.excluded_count;
    if (cloud.excluded_count * 100 > cloud.n) {
        res.error = "more than 1% of replicas diverged";
        return res;
    }
    res.drift_ok = res.min_margin_se >= -3.0;
    const auto& eh = ts.col("E_H");
    const auto& se = ts.col("SE");
    double limit = dc.B / dc.gamma + eh.front() * std::exp(-dc.gamma * cfg.t_final) +
                   3.0 * se.back();
    res.terminal_ok = eh.back() <= limit;
    res.ok = true;
    return res;
}

struct ChaosOptions {
    std::size_t pool = 2048;    // pooled cloud size per side for the W1 solves
    int m_reference = 4096;     // disjoint nonlinear reference ensemble size
};

struct ChaosRecord {
    int N = 0;
    double t = 0;
    double w1 = 0;
    double se = 0;
    double w1_sqrtN = 0;
    double coupled_bound = 0; // mean(|Z|+|W|), an upper bound for W1
};

struct ChaosScalingResult {
    std::vector<int> n_values;
    std::vector<ChaosRecord> records;
    double slope_w1 = 0;          // log-log slope vs N, averaged over t_eval
    double uniformity_ratio = 0;  // max_t / min_t of mean_N W1 sqrt(N), minus 1
    bool ok = false;
    std::string error;
};

// Propagation-of-chaos sweep. For each N, R = pool/N replicas of the
// N-particle-vs-nonlinear coupling run in lockstep; the nonlinear side is
// driven by a disjoint reference ensemble (fixed size across the sweep) so
// its law does not depend on N. W1 is the exact assignment between the
// pooled particle-side and nonlinear-side clouds.
inline ChaosScalingResult run_chaos(const ModelParams& mp, const DerivedConstants& dc,
                                    const ConfiningPotential& pot_U,
                                    const InteractionPotential& pot_W, SimConfig cfg,
                                    const InitSpec& init, const std::vector<int>& n_sweep,
                                    const std::vector<double>& t_eval, ChaosOptions opt = {}) {
    ChaosScalingResult res;
    cfg.validate();
    if (cfg.xi <= 0) cfg.xi = 1e-2 * dc.R1;
    if (n_sweep.size() < 2) {
        res.error = "n_sweep needs at least 2 values";
        return res;
    }
    if (pot_W.kind == InteractionKind::mollified_coulomb) {
        res.error = "chaos sweep supports zero/harmonic interactions only";
        return res;
    }
    const int d = mp.d;

    // exponential-moment precondition, Monte Carlo on the init spec
    {
        double acc = 0;
        for (int i = 0; i < 4096; ++i) {
            RngStream r(cfg.seed ^ 0xABCDu, RngStream::stream_id(detail::kStreamInit, i));
            double x[8], v[8];
            detail::draw_init(init, d, r, x, v);
            double nx = 0, nv = 0;
            for (int k = 0; k < d; ++k) {
                nx += x[k] * x[k];
                nv += v[k] * v[k];
            }
            acc += std::exp(mp.a * (std::sqrt(nx) + std::sqrt(nv)));
        }
        if (!std::isfinite(acc)) {
            res.error = "initial law fails the exponential moment check";
            return res;
        }
    }

    const long S = cfg.n_steps();
    std::vector<long> eval_steps;
    for (double t : t_eval) {
        long s = std::lround(t / cfg.dt);
        if (s < 1 || s > S) {
            res.error = "t_eval outside the simulated horizon";
            return res;
        }
        eval_steps.push_back(s);
    }

    // Pass 1: reference ensemble once; keep its x-mean per step (harmonic
    // mean-field needs only the mean).
    std::vector<double> ref_mean(static_cast<std::size_t>(S + 1) * d, 0.0);
    {
        ParticleCloud ref;
        ref.resize(opt.m_reference, d);
        for (int i = 0; i < opt.m_reference; ++i) {
            RngStream r(cfg.seed, RngStream::stream_id(detail::kStreamReference, 0x1000000ull + i));
            detail::draw_init(init, d, r, &ref.x[i * d], &ref.v[i * d]);
        }
        StepContext rctx;
        rctx.pot_U = &pot_U;
        rctx.pot_W = &pot_W;
        rctx.alpha = dc.alpha;
        rctx.R1 = dc.R1;
        rctx.stream_kind = detail::kStreamReference;
        for (long s = 0; s <= S; ++s) {
            Vec m = detail::masked_mean(ref.x, ref.excluded, ref.n, d);
            for (int k = 0; k < d; ++k) ref_mean[s * d + k] = m[k];
            if (s < S) step_particle_system(ref, rctx, cfg, s);
        }
        if (ref.excluded_count * 100 > ref.n) {
            res.error = "reference ensemble diverged";
            return res;
        }
    }

    WassersteinOptions wopt;
    wopt.max_exact = opt.pool;
    wopt.seed = cfg.seed;

    std::vector<double> mean_log_w1_per_N;
    std::map<double, std::vector<double>> w1s_by_t; // for the uniformity ratio

    for (int N : n_sweep) {
        int R = std::max<int>(1, static_cast<int>((opt.pool + N - 1) / N));
        std::vector<CoupledCloud> reps(R);
        for (int r = 0; r < R; ++r) {
            reps[r].mode = CoupledMode::particle_vs_nonlinear;
            reps[r].resize(N, d);
            for (int i = 0; i < N; ++i) {
                RngStream rs(cfg.seed, RngStream::stream_id(
                                           detail::kStreamInit,
                                           0x2000000ull + static_cast<std::uint64_t>(N) * 65536 +
                                               r * 4096 + i));
                detail::draw_init(init, d, rs, &reps[r].x1[i * d], &reps[r].v1[i * d]);
                for (int k = 0; k < d; ++k) {
                    reps[r].x2[i * d + k] = reps[r].x1[i * d + k];
                    reps[r].v2[i * d + k] = reps[r].v1[i * d + k];
                }
            }
        }
        std::size_t next_eval = 0;
        for (long s = 0; s <= S; ++s) {
            if (next_eval < eval_steps.size() && s == eval_steps[next_eval]) {
                // pooled clouds across replicas
                EmpiricalMeasure part, nonlin;
                double bound_acc = 0;
                long bound_cnt = 0;
                for (const auto& rep : reps) {
                    auto a = detail::side_measure(rep.x2, rep.v2, rep.excluded, rep.n, d);
                    auto b = detail::side_measure(rep.x1, rep.v1, rep.excluded, rep.n, d);
                    for (auto& pt : a.points) part.points.push_back(std::move(pt));
                    for (auto& pt : b.points) nonlin.points.push_back(std::move(pt));
                    for (int i = 0; i < rep.n; ++i) {
                        if (rep.excluded[i]) continue;
                        double nz = 0, nw = 0;
                        for (int k = 0; k < d; ++k) {
                            double z = rep.x1[i * d + k] - rep.x2[i * d + k];
                            double w = rep.v1[i * d + k] - rep.v2[i * d + k];
                            nz += z * z;
                            nw += w * w;
                        }
                        bound_acc += std::sqrt(nz) + std::sqrt(nw);
                        ++bound_cnt;
                    }
                }
                std::size_t P = std::min(part.points.size(), nonlin.points.size());
                part.points.resize(P);
                nonlin.points.resize(P);
                double w1 = wasserstein_exact(part, nonlin, TransportCost::L1, wopt);
                // SE from disjoint half-pools
                double se = 0;
                if (P >= 64) {
                    EmpiricalMeasure pa, pb, na, nb;
                    for (std::size_t i = 0; i < P / 2; ++i) {
                        pa.points.push_back(part.points[i]);
                        na.points.push_back(nonlin.points[i]);
                    }
                    for (std::size_t i = P / 2; i < 2 * (P / 2); ++i) {
                        pb.points.push_back(part.points[i]);
                        nb.points.push_back(nonlin.points[i]);
                    }
                    double wa = wasserstein_exact(pa, na, TransportCost::L1, wopt);
                    double wb = wasserstein_exact(pb, nb, TransportCost::L1, wopt);
                    se = 0.5 * std::abs(wa - wb);
                }
                ChaosRecord rec;
                rec.N = N;
                rec.t = s * cfg.dt;
                rec.w1 = w1;
                rec.se = se;
                rec.w1_sqrtN = w1 * std::sqrt(static_cast<double>(N));
                rec.coupled_bound = bound_cnt ? bound_acc / bound_cnt : 0.0;
                res.records.push_back(rec);
                w1s_by_t[rec.t].push_back(rec.w1_sqrtN);
                ++next_eval;
            }
            if (s == S) break;
            MeanFieldDrift law;
            Vec m(ref_mean.begin() + s * d, ref_mean.begin() + (s + 1) * d);
            law = MeanFieldDrift::from_mean(pot_W, m);
            for (int r = 0; r < R; ++r) {
                StepContext cctx;
                cctx.pot_U = &pot_U;
                cctx.pot_W = &pot_W;
                cctx.alpha = dc.alpha;
                cctx.R1 = dc.R1;
                cctx.stream_kind = detail::kStreamChaos;
                cctx.stream_offset = static_cast<std::uint64_t>(N) * 65536 + r * 4096;
                step_coupled_chaos(reps[r], cctx, cfg, s, &law);
            }
        }
        // mean over t_eval of log W1 for this N
        double acc = 0;
        int cnt = 0;
        for (const auto& rec : res.records) {
            if (rec.N == N && rec.w1 > 0) {
                acc += std::log(rec.w1);
                ++cnt;
            }
        }
        mean_log_w1_per_N.push_back(cnt ? acc / cnt : -std::numeric_limits<double>::infinity());
        res.n_values.push_back(N);
    }

    // slope of mean log W1 vs log N
    {
        std::vector<double> xs, ys;
        for (std::size_t i = 0; i < res.n_values.size(); ++i) {
            if (std::isfinite(mean_log_w1_per_N[i])) {
                xs.push_back(std::log(static_cast<double>(res.n_values[i])));
                ys.push_back(mean_log_w1_per_N[i]);
            }
        }
        if (xs.size() >= 2) {
            double mx = 0, my = 0;
            for (std::size_t i = 0; i < xs.size(); ++i) {
                mx += xs[i];
                my += ys[i];
            }
            mx /= xs.size();
            my /= xs.size();
            double sxx = 0, sxy = 0;
            for (std::size_t i = 0; i < xs.size(); ++i) {
                sxx += (xs[i] - mx) * (xs[i] - mx);
                sxy += (xs[i] - mx) * (ys[i] - my);
            }
            res.slope_w1 = sxy / sxx;
        }
    }
    // time-uniformity of W1 sqrt(N)
    {
        double lo = std::numeric_limits<double>::infinity(), hi = 0;
        for (const auto& [t, vals] : w1s_by_t) {
            double m = 0;
            for (double v : vals) m += v;
            m /= vals.size();
            lo = std::min(lo, m);
            hi = std::max(hi, m);
        }
        res.uniformity_ratio = lo > 0 ? hi / lo - 1.0 : std::numeric_limits<double>::infinity();
    }
    res.ok = true;
    return res;
}

} // namespace kmv
