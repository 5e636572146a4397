#pragma once

// The invariant battery behind the `check` subcommand: structural
// assumptions on the potentials, the distance-profile properties, the
// pairwise metric-equivalence inequalities, and the coupling mechanics.

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "kmv/constants.hpp"
#include "kmv/dynamics.hpp"
#include "kmv/potentials.hpp"
#include "kmv/profile.hpp"
#include "kmv/semimetric.hpp"
#include "kmv/wasserstein.hpp"

namespace kmv {

struct CheckResult {
    std::string name;
    bool pass = false;
    double worst = 0; // signed slack or residual, check-specific
    std::string detail;
};

namespace checks_detail {

inline PhasePoint random_point(const RngStream& rng, std::uint64_t draw, int d, double scale) {
    Vec x(d), v(d);
    rng.fill_gauss(draw, 0, x.data(), d);
    rng.fill_gauss(draw, 1, v.data(), d);
    for (auto& c : x) c *= scale;
    for (auto& c : v) c *= scale;
    return PhasePoint(std::move(x), std::move(v));
}

inline CheckResult make(const std::string& name, bool pass, double worst,
                        const std::string& detail = "") {
    return CheckResult{name, pass, worst, detail};
}

} // namespace checks_detail

inline std::vector<CheckResult> run_invariant_battery(const ModelParams& mp,
                                                      const DerivedConstants& dc,
                                                      const ConfiningPotential& pot_U,
                                                      const InteractionPotential& pot_W,
                                                      std::uint64_t seed) {
    using checks_detail::make;
    using checks_detail::random_point;
    std::vector<CheckResult> out;
    const int d = mp.d;
    RngStream rng(seed, RngStream::stream_id(0xC4u, 0));
    DistanceProfile profile = build_profile(mp, dc);

    { // evenness of grad W
        double worst = 0;
        for (int i = 0; i < 2000; ++i) {
            auto p = random_point(rng, i, d, 2.0);
            auto g1 = eval_grad_W(pot_W, p.x);
            Vec mz = -1.0 * p.x;
            auto g2 = eval_grad_W(pot_W, mz);
            worst = std::max(worst, norm(g1.gradient + g2.gradient));
        }
        out.push_back(make("W_evenness", worst <= 1e-12, worst));
    }
    { // Lipschitz audit for grad U and grad W
        double worstU = 0, worstW = 0;
        for (int i = 0; i < 10000; ++i) {
            auto p = random_point(rng, 4000 + i, d, 3.0);
            auto q = random_point(rng, 20000 + i, d, 3.0);
            double dxy = norm(p.x - q.x);
            if (dxy == 0) continue;
            auto gu = eval_grad_U(pot_U, p.x), gv = eval_grad_U(pot_U, q.x);
            worstU = std::max(worstU, norm(gu.gradient - gv.gradient) - (pot_U.L_U + 1e-9) * dxy);
            auto wu = eval_grad_W(pot_W, p.x), wv = eval_grad_W(pot_W, q.x);
            worstW = std::max(worstW, norm(wu.gradient - wv.gradient) - (pot_W.L_W + 1e-9) * dxy);
        }
        out.push_back(make("U_lipschitz", worstU <= 0, worstU));
        out.push_back(make("W_lipschitz", worstW <= 0, worstW));
    }
    { // mean-field drift bound vs exact position-W1
        double worst = -std::numeric_limits<double>::infinity();
        bool pass = true;
        for (int trial = 0; trial < 50; ++trial) {
            const int n = 16;
            EmpiricalMeasure mu, nu;
            for (int i = 0; i < n; ++i) {
                auto p = random_point(rng, 40000 + trial * 64 + i, d, 2.0);
                auto q = random_point(rng, 48000 + trial * 64 + i, d, 2.0);
                mu.points.emplace_back(p.x, Vec(d, 0.0));
                nu.points.emplace_back(q.x, Vec(d, 0.0));
            }
            auto x = random_point(rng, 56000 + trial, d, 2.0);
            auto xt = random_point(rng, 57000 + trial, d, 2.0);
            Vec cu(d, 0.0), cv(d, 0.0);
            for (int i = 0; i < n; ++i) {
                cu = cu + eval_grad_W(pot_W, x.x - mu.points[i].x).gradient;
                cv = cv + eval_grad_W(pot_W, xt.x - nu.points[i].x).gradient;
            }
            double lhs = norm((1.0 / n) * cu - (1.0 / n) * cv);
            double w1 = wasserstein_exact(mu, nu, TransportCost::L1);
            double rhs = pot_W.L_W * norm(x.x - xt.x) + pot_W.L_W * w1 + 1e-9;
            worst = std::max(worst, lhs - rhs);
            pass = pass && lhs <= rhs;
        }
        out.push_back(make("W_meanfield_bound", pass, worst));
    }
    { // confinement drift inequality and the quadratic lower bound
        auto rep = verify_confinement(pot_U);
        out.push_back(make("U_confinement", rep.pass, rep.hyp_u_margin, rep.grid_spec));
        double r_max = 3.0 * std::sqrt(4.0 * pot_U.A / pot_U.lambda) + 10.0;
        double worst = 0;
        for (int i = 0; i < 2000; ++i) {
            double r = 1e-3 + (r_max - 1e-3) * i / 1999.0;
            Vec x(d, 0.0);
            x[0] = r;
            double u = eval_grad_U(pot_U, x).value;
            worst = std::min(worst, u + mp.tilde_A - mp.lambda / 6.0 * r * r);
        }
        out.push_back(make("U_lower_bound", worst >= -1e-9, worst));
    }
    { // finite differences vs analytic gradients
        auto skipU = [&](const Vec& x) {
            return pot_U.kind == ConfiningKind::double_well && near_double_well_kink(x);
        };
        double eu = fd_gradient_check([&](const Vec& x) { return eval_grad_U(pot_U, x); }, d, 400,
                                      1e-5, skipU);
        out.push_back(make("U_fd_gradient", eu <= 1e-6, eu));
        if (pot_W.kind != InteractionKind::zero) {
            double ew = fd_gradient_check([&](const Vec& x) { return eval_grad_W(pot_W, x); }, d,
                                          400, 1e-5, [](const Vec&) { return false; });
            out.push_back(make("W_fd_gradient", ew <= 1e-6, ew));
        }
    }
    { // symmetry of r and rho
        double worst = 0;
        for (int i = 0; i < 2000; ++i) {
            auto p = random_point(rng, 60000 + i, d, 2.0);
            auto q = random_point(rng, 70000 + i, d, 2.0);
            double r1 = r_metric(p, q, dc.alpha), r2 = r_metric(q, p, dc.alpha);
            double a = rho_eval(p, q, profile, pot_U, dc.gamma, mp.lambda);
            double b = rho_eval(q, p, profile, pot_U, dc.gamma, mp.lambda);
            worst = std::max(worst, std::abs(r1 - r2));
            worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(a)));
        }
        out.push_back(make("rho_symmetry", worst <= 1e-12, worst));
    }
    { // concavity of f on grid triples
        double worst = 0;
        const auto& s = profile.grid_s;
        const auto& f = profile.grid_f;
        for (std::size_t i = 0; i + 2 < s.size(); i += 1) {
            double mid = f[i + 1];
            worst = std::min(worst, mid - 0.5 * (f[i] + f[i + 2]));
        }
        out.push_back(make("f_concavity", worst >= -1e-10, worst));
    }
    { // sandwich bounds on f
        double fpR1 = profile.grid_fp.back();
        double worst = 0;
        for (int i = 0; i < 1000; ++i) {
            double s = 2.0 * dc.R1 * i / 999.0;
            double f = profile.f(s);
            double lo = std::min(s, dc.R1) * fpR1;
            double hi = std::min(s, dc.R1);
            worst = std::min(worst, f - lo + 1e-12);
            worst = std::min(worst, hi - f + 1e-12);
        }
        out.push_back(make("f_sandwich", worst >= -1e-9, worst));
    }
    { // g within [1/2, 1]
        double lo = 2, hi = 0;
        for (double g : profile.grid_g) {
            lo = std::min(lo, g);
            hi = std::max(hi, g);
        }
        out.push_back(make("g_bounds", lo >= 0.5 && hi <= 1.0 + 1e-15, lo));
    }
    { // quadratic control: r^2 <= 2 kap / min(lambda/3,3) (H + H')
        double kap = (1 + dc.alpha) * (1 + dc.alpha) + dc.alpha * dc.alpha;
        double cmin = std::min(mp.lambda / 3.0, 3.0);
        double worst = 0;
        for (int i = 0; i < 10000; ++i) {
            auto p = random_point(rng, 80000 + i, d, 2.0);
            auto q = random_point(rng, 100000 + i, d, 2.0);
            double r = r_metric(p, q, dc.alpha);
            double h = lyapunov_H(p, pot_U, dc.gamma, mp.lambda) +
                       lyapunov_H(q, pot_U, dc.gamma, mp.lambda);
            worst = std::max(worst, r * r - 2.0 * kap / cmin * h - 1e-9);
        }
        out.push_back(make("prop_H_quadratic", worst <= 0, worst));
    }
    { // W1 triangle inequality on random triples
        double worst = 0;
        for (int trial = 0; trial < 20; ++trial) {
            const int n = 8;
            EmpiricalMeasure a, b, c;
            for (int i = 0; i < n; ++i) {
                a.points.push_back(random_point(rng, 120000 + trial * 64 + i, d, 2.0));
                b.points.push_back(random_point(rng, 130000 + trial * 64 + i, d, 2.0));
                c.points.push_back(random_point(rng, 140000 + trial * 64 + i, d, 2.0));
            }
            double ab = wasserstein_exact(a, b, TransportCost::L1);
            double bc = wasserstein_exact(b, c, TransportCost::L1);
            double ac = wasserstein_exact(a, c, TransportCost::L1);
            worst = std::max(worst, ac - ab - bc);
        }
        out.push_back(make("W1_triangle", worst <= 1e-12, worst));
    }
    { // H-tilde >= H
        double worst = 0;
        for (int i = 0; i < 10000; ++i) {
            auto p = random_point(rng, 150000 + i, d, 2.0);
            double h = lyapunov_H(p, pot_U, dc.gamma, mp.lambda);
            auto ht = lyapunov_H_tilde_of_H(h, mp.a);
            if (!ht.overflow) worst = std::min(worst, ht.value - h);
        }
        out.push_back(make("H_tilde_ge_H", worst >= -1e-9 * std::max(1.0, std::abs(worst)), worst));
    }
    { // pairwise metric equivalence
        std::vector<std::pair<PhasePoint, PhasePoint>> samples;
        for (int i = 0; i < 10000; ++i)
            samples.emplace_back(random_point(rng, 170000 + i, d, 2.0),
                                 random_point(rng, 190000 + i, d, 2.0));
        auto rep = metric_equivalence_check(samples, mp, dc, profile, pot_U);
        out.push_back(
            make("metric_equivalence", rep.worst_slack >= -1e-9, rep.worst_slack, rep.worst_name));
    }
    { // rho-Wasserstein dominates W1 and W2^2 (compared in log space)
        WassersteinOptions wopt;
        wopt.profile = &profile;
        wopt.pot = &pot_U;
        wopt.gamma = dc.gamma;
        wopt.lambda = mp.lambda;
        bool pass = true;
        double worst = std::numeric_limits<double>::infinity();
        for (int trial = 0; trial < 5; ++trial) {
            const int n = 32;
            EmpiricalMeasure a, b;
            for (int i = 0; i < n; ++i) {
                a.points.push_back(random_point(rng, 210000 + trial * 64 + i, d, 2.0));
                b.points.push_back(random_point(rng, 220000 + trial * 64 + i, d, 2.0));
            }
            double wrho = wasserstein_exact(a, b, TransportCost::rho, wopt);
            double w1 = wasserstein_exact(a, b, TransportCost::L1);
            double w2 = wasserstein_exact(a, b, TransportCost::L2_squared);
            if (wrho <= 0) continue;
            double s1 = dc.C1.log_abs() + std::log(wrho) - std::log(w1);
            double s2 = dc.C2.log_abs() + std::log(wrho) - 2.0 * std::log(w2);
            pass = pass && s1 >= 0 && s2 >= 0;
            worst = std::min(worst, std::min(s1, s2));
        }
        out.push_back(make("rho_dominates_W1_W2", pass, worst));
    }
    { // reflection preserves the increment norm
        double worst = 0;
        for (int i = 0; i < 100000; ++i) {
            Vec e(d, 0.0), db(d);
            rng.fill_gauss(230000 + i, 0, e.data(), d);
            rng.fill_gauss(230000 + i, 1, db.data(), d);
            double ne = norm(e);
            for (auto& c : e) c /= ne;
            auto r = reflect_increment(e, db);
            worst = std::max(worst, std::abs(norm(r) - norm(db)));
        }
        out.push_back(make("reflection_norm", worst <= 1e-12, worst));
    }
    { // reflected Gaussian increments keep covariance 2 dt I
        const double dt = 1e-3;
        const int n = 40000;
        std::vector<double> cov(static_cast<std::size_t>(d) * d, 0.0);
        Vec e(d, 0.0);
        e[0] = 1.0;
        for (int i = 0; i < n; ++i) {
            Vec g(d);
            rng.fill_gauss(400000 + i, 0, g.data(), d);
            auto r = reflect_increment(e, g);
            for (int a = 0; a < d; ++a)
                for (int b = 0; b < d; ++b) cov[a * d + b] += 2.0 * dt * r[a] * r[b];
        }
        double worst = 0;
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b) {
                double want = a == b ? 2.0 * dt : 0.0;
                worst = std::max(worst, std::abs(cov[a * d + b] / n - want) / (2.0 * dt));
            }
        double tol = 4.0 / std::sqrt(static_cast<double>(n));
        out.push_back(make("reflection_covariance", worst <= tol, worst));
    }
    { // coupling weight constraints
        double worst = 0;
        bool regions = true;
        double xi = 1e-2 * dc.R1;
        for (int i = 0; i < 5000; ++i) {
            Vec z(d), w(d);
            rng.fill_gauss(500000 + i, 0, z.data(), d);
            rng.fill_gauss(500000 + i, 1, w.data(), d);
            double scale = (i % 7 + 1) * 0.2 * dc.R1 / 4.0;
            for (auto& c : z) c *= scale;
            for (auto& c : w) c *= scale;
            auto cw = coupling_weights(z, w, xi, dc.alpha, dc.R1);
            worst = std::max(worst, std::abs(cw.rc * cw.rc + cw.sc * cw.sc - 1.0));
            double q = norm(z + w), r = dc.alpha * norm(z) + q;
            if (q <= xi / 2 || r >= dc.R1 + xi) regions = regions && cw.rc == 0.0;
            if (q >= xi && r <= dc.R1) regions = regions && cw.rc == 1.0;
        }
        out.push_back(make("coupling_weights", worst <= 1e-12 && regions, worst));
    }
    { // identical synchronous pairs stay merged bitwise
        SimConfig cfg;
        cfg.dt = 1e-3;
        cfg.t_final = 1.0;
        cfg.n_replicas = 8;
        cfg.seed = seed;
        cfg.xi = 1e-2 * dc.R1;
        CoupledCloud cloud;
        cloud.resize(8, d);
        RngStream ir(seed, RngStream::stream_id(0xC5u, 0));
        for (int i = 0; i < 8; ++i) {
            Vec x(d), v(d);
            ir.fill_gauss(i, 0, x.data(), d);
            ir.fill_gauss(i, 1, v.data(), d);
            for (int k = 0; k < d; ++k) {
                cloud.x1[i * d + k] = cloud.x2[i * d + k] = x[k];
                cloud.v1[i * d + k] = cloud.v2[i * d + k] = v[k];
            }
        }
        StepContext ctx;
        ctx.pot_U = &pot_U;
        ctx.pot_W = &pot_W;
        ctx.alpha = dc.alpha;
        ctx.R1 = dc.R1;
        bool merged = true;
        for (long s = 0; s < 1000; ++s) {
            step_pair_coupled(cloud, ctx, cfg, s);
            for (std::size_t k = 0; k < cloud.x1.size(); ++k)
                merged = merged && cloud.x1[k] == cloud.x2[k] && cloud.v1[k] == cloud.v2[k];
            if (!merged) break;
        }
        out.push_back(make("synchronous_identity", merged, merged ? 0.0 : 1.0));
    }
    return out;
}

} // namespace kmv
