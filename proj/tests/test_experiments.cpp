#include <catch_amalgamated.hpp>

#include <cmath>

#include "kmv/experiments.hpp"

using namespace kmv;

namespace {

ModelParams fixture() {
    ModelParams p;
    p.lambda = 0.5;
    p.A = 0.75;
    p.tilde_A = 1.0 / 11.0;
    p.L_U = 2.0;
    p.L_W = 0.0;
    p.d = 1;
    p.a = 0.1;
    p.C0 = 50.0;
    return p;
}

TimeSeries series_from(const std::vector<double>& t, const std::vector<double>& y) {
    TimeSeries ts;
    ts.times = t;
    ts.col("y") = y;
    return ts;
}

} // namespace

TEST_CASE("exponential rate fit on noiseless data") {
    std::vector<double> t, y1, y2;
    for (int i = 0; i < 40; ++i) {
        double tt = 0.25 * i;
        t.push_back(tt);
        y1.push_back(std::exp(-2.0 * tt));
        y2.push_back(5.0 * std::exp(-0.3 * tt));
    }
    auto f1 = fit_exponential_rate(series_from(t, y1), "y", 0.0, 10.0);
    CHECK(f1.rate == Catch::Approx(2.0).margin(1e-9));
    CHECK(f1.r_squared == Catch::Approx(1.0).margin(1e-12));
    auto f2 = fit_exponential_rate(series_from(t, y2), "y", 0.0, 10.0);
    CHECK(f2.rate == Catch::Approx(0.3).margin(1e-9));
    CHECK(f2.intercept == Catch::Approx(std::log(5.0)).margin(1e-9));
}

TEST_CASE("exponential rate fit with 1% multiplicative noise") {
    RngStream rng(4, RngStream::stream_id(0x11, 0));
    std::vector<double> t, y;
    for (int i = 0; i < 60; ++i) {
        double tt = 0.2 * i;
        t.push_back(tt);
        double noise = 1.0 + 0.01 * (2.0 * rng.uniform01(i, 0, 0) - 1.0);
        y.push_back(std::exp(-0.8 * tt) * noise);
    }
    auto f = fit_exponential_rate(series_from(t, y), "y", 0.0, 12.0);
    CHECK(f.rate == Catch::Approx(0.8).margin(0.01));
}

TEST_CASE("rate fit auto-shrinks on non-positive values and rejects tiny windows") {
    std::vector<double> t, y;
    for (int i = 0; i < 20; ++i) {
        t.push_back(i * 1.0);
        y.push_back(i < 5 ? 0.0 : std::exp(-0.5 * i));
    }
    auto f = fit_exponential_rate(series_from(t, y), "y", 0.0, 19.0);
    CHECK(f.rate == Catch::Approx(0.5).margin(1e-9));
    CHECK(f.n_points == 15);
    CHECK_THROWS(fit_exponential_rate(series_from(t, y), "y", 0.0, 11.0)); // 7 usable points
}

TEST_CASE("drift experiment: stationary quadratic start stays flat and passes") {
    // U = |x|^2/2 with the critical lambda; stationary law is N(0,1) x N(0,1)
    ModelParams p;
    p.lambda = 2.0 / 3.0;
    p.A = 0.0;
    p.tilde_A = 0.0;
    p.L_U = 1.0;
    p.L_W = 0.0;
    p.d = 1;
    p.a = 0.1;
    p.C0 = 60.0;
    auto dc = derive_base_constants(p);
    auto pot = ConfiningPotential::quadratic_d(1, p.lambda, 0.0);
    auto w = InteractionPotential::none();
    SimConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_final = 4.0;
    cfg.n_replicas = 1024;
    cfg.seed = 2024;
    cfg.record_every = 500;
    InitSpec init;
    init.mean_x = {0.0};
    init.mean_v = {0.0};
    init.sigma_x = 1.0;
    init.sigma_v = 1.0;
    auto res = run_lyapunov_drift(p, dc, pot, w, cfg, init);
    REQUIRE(res.ok);
    CHECK(res.drift_ok);
    CHECK(res.terminal_ok);
    // closed-form stationary mean of H: 24 E U + (6(1-gamma)+lambda) E x^2 + 12 E v^2
    double want = 12.0 + (6.0 * (1 - dc.gamma) + p.lambda) + 12.0;
    const auto& eh = res.ts.col("E_H");
    const auto& se = res.ts.col("SE");
    for (std::size_t i = 0; i < eh.size(); ++i) {
        CAPTURE(i);
        CHECK(std::abs(eh[i] - want) <= 4.0 * se[i] + 0.06 * want); // 4 SE + EM bias allowance
    }
    // bound stays strictly positive throughout
    for (double b : res.ts.col("bound")) CHECK(b > 0);
}

TEST_CASE("drift experiment: far start decays toward B/gamma") {
    auto p = fixture();
    auto dc = derive_base_constants(p);
    auto pot = ConfiningPotential::double_well_1d(p.lambda, p.A);
    auto w = InteractionPotential::none();
    SimConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_final = 3.0;
    cfg.n_replicas = 512;
    cfg.seed = 9;
    cfg.record_every = 300;
    InitSpec init;
    init.mean_x = {6.0};
    init.mean_v = {0.0};
    init.sigma_x = 0.3;
    init.sigma_v = 0.3;
    auto res = run_lyapunov_drift(p, dc, pot, w, cfg, init);
    REQUIRE(res.ok);
    const auto& eh = res.ts.col("E_H");
    CHECK(eh.front() > dc.B / dc.gamma); // genuinely far-started
    CHECK(res.ts.col("slope_est")[1] < 0.0);
    CHECK(eh.back() < eh.front());
    CHECK(res.drift_ok);
}

TEST_CASE("contraction experiment: smoke run and gates") {
    auto p = fixture();
    auto dc = derive_base_constants(p);
    auto pot = ConfiningPotential::double_well_1d(p.lambda, p.A);
    auto w = InteractionPotential::none();
    SimConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_final = 8.0;
    cfg.n_replicas = 128;
    cfg.seed = 7;
    cfg.record_every = 400;
    InitSpec i1, i2;
    i1.mean_x = {-1.0};
    i1.mean_v = {0.0};
    i2.mean_x = {1.0};
    i2.mean_v = {0.0};
    i1.sigma_x = i2.sigma_x = 0.5;
    i1.sigma_v = i2.sigma_v = 0.5;
    auto res = run_contraction(p, dc, pot, w, cfg, i1, i2);
    REQUIRE(res.ok);
    const auto& rho = res.ts.col("E_rho");
    const auto& w1 = res.ts.col("W1");
    const auto& w2 = res.ts.col("W2");
    const auto& el1 = res.ts.col("E_l1");
    for (std::size_t i = 0; i < rho.size(); ++i) {
        CHECK(rho[i] > 0.0);
        // any coupling upper-bounds the optimal transport
        CHECK(w1[i] <= el1[i] + 1e-12);
        // Cauchy-Schwarz direction on the recorded pair
        CHECK(w1[i] <= std::sqrt(2.0) * w2[i] + 1e-12);
    }
    CHECK(rho.back() < 0.85 * rho.front()); // visible contraction over 8 time units
    // identical inits with common draws stay at rho = 0
    auto res0 = run_contraction(p, dc, pot, w, cfg, i1, i1);
    CHECK_FALSE(res0.ok); // all-zero series: the rate fit has nothing to use
    for (double v : res0.ts.col("E_rho")) CHECK(v == 0.0);
    // tau gate: any representable positive L_W exceeds the admissible bound
    auto q = p;
    q.L_W = 1e-12;
    auto dq = derive_base_constants(q);
    auto harm = InteractionPotential::harmonic(q.L_W, true);
    auto bad = run_contraction(q, dq, pot, harm, cfg, i1, i2);
    CHECK_FALSE(bad.ok);
    CHECK(bad.error.find("admissible") != std::string::npos);
}

TEST_CASE("contraction with identical inits keeps E rho exactly zero") {
    auto p = fixture();
    auto dc = derive_base_constants(p);
    auto pot = ConfiningPotential::double_well_1d(p.lambda, p.A);
    auto w = InteractionPotential::none();
    SimConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_final = 1.0;
    cfg.n_replicas = 64;
    cfg.seed = 3;
    cfg.record_every = 200;
    InitSpec i1;
    i1.mean_x = {0.5};
    i1.mean_v = {0.0};
    // drive the cloud directly to observe the zero series without the fit
    DistanceProfile profile = build_profile(p, dc);
    (void)profile;
    CoupledCloud cloud;
    cloud.resize(64, 1);
    RngStream rng(3, RngStream::stream_id(detail::kStreamInit, 0));
    for (int i = 0; i < 64; ++i) {
        RngStream r(cfg.seed, RngStream::stream_id(detail::kStreamInit, 2 * i));
        double x, v;
        detail::draw_init(i1, 1, r, &x, &v);
        cloud.x1[i] = cloud.x2[i] = x;
        cloud.v1[i] = cloud.v2[i] = v;
    }
    (void)rng;
    StepContext ctx;
    ctx.pot_U = &pot;
    ctx.pot_W = &w;
    ctx.alpha = dc.alpha;
    ctx.R1 = dc.R1;
    cfg.xi = 1e-2 * dc.R1;
    for (long s = 0; s < cfg.n_steps(); ++s) step_pair_coupled(cloud, ctx, cfg, s);
    for (int i = 0; i < 64; ++i) {
        REQUIRE(cloud.x1[i] == cloud.x2[i]);
        REQUIRE(cloud.v1[i] == cloud.v2[i]);
    }
}

TEST_CASE("chaos experiment: degenerate and small harmonic runs") {
    auto p = fixture();
    auto dc = derive_base_constants(p);
    auto pot = ConfiningPotential::double_well_1d(p.lambda, p.A);
    SimConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_final = 2.0;
    cfg.seed = 11;
    ChaosOptions opt;
    opt.pool = 64;
    opt.m_reference = 128;
    InitSpec init;
    init.mean_x = {0.0};
    init.mean_v = {0.0};
    std::vector<int> sweep{8, 32};
    std::vector<double> t_eval{1.0, 2.0};

    SECTION("W = 0 keeps both sides identical, W1 = 0") {
        auto none = InteractionPotential::none();
        auto res = run_chaos(p, dc, pot, none, cfg, init, sweep, t_eval, opt);
        REQUIRE(res.ok);
        for (const auto& r : res.records) CHECK(r.w1 == 0.0);
    }
    SECTION("small harmonic interaction produces a positive, bounded gap") {
        auto q = p;
        q.L_W = 1e-3;
        auto dq = derive_base_constants(q);
        auto harm = InteractionPotential::harmonic(q.L_W, true);
        auto res = run_chaos(q, dq, pot, harm, cfg, init, sweep, t_eval, opt);
        REQUIRE(res.ok);
        for (const auto& r : res.records) {
            CHECK(r.w1 > 0.0);
            CHECK(r.w1 <= r.coupled_bound + 1e-12);
        }
        // larger N gives a smaller distance on average
        double m8 = 0, m32 = 0;
        for (const auto& r : res.records) (r.N == 8 ? m8 : m32) += r.w1;
        CHECK(m32 < m8);
    }
    SECTION("coulomb interaction is rejected") {
        auto q = p;
        q.L_W = 1e-3;
        auto dq = derive_base_constants(q);
        auto cou = InteractionPotential::coulomb(1, 1, 2, q.L_W);
        auto res = run_chaos(q, dq, pot, cou, cfg, init, sweep, t_eval, opt);
        CHECK_FALSE(res.ok);
    }
}

TEST_CASE("chaos second moments obey the discrete Lyapunov recursion") {
    auto p = fixture();
    p.L_W = 1e-3;
    auto dc = derive_base_constants(p);
    auto pot = ConfiningPotential::double_well_1d(p.lambda, p.A);
    auto harm = InteractionPotential::harmonic(p.L_W, true);
    SimConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_final = 2.0;
    cfg.seed = 21;
    cfg.xi = 1e-2 * dc.R1;
    const int N = 256;
    CoupledCloud cloud;
    cloud.mode = CoupledMode::particle_vs_nonlinear;
    cloud.resize(N, 1);
    InitSpec init;
    init.mean_x = {2.0};
    init.mean_v = {0.0};
    for (int i = 0; i < N; ++i) {
        RngStream r(cfg.seed, RngStream::stream_id(detail::kStreamInit, i));
        detail::draw_init(init, 1, r, &cloud.x1[i], &cloud.v1[i]);
        cloud.x2[i] = cloud.x1[i];
        cloud.v2[i] = cloud.v1[i];
    }
    StepContext ctx;
    ctx.pot_U = &pot;
    ctx.pot_W = &harm;
    ctx.alpha = dc.alpha;
    ctx.R1 = dc.R1;
    ctx.stream_kind = detail::kStreamChaos;
    // E H along the particle side must respect dE H <= (B - gamma E H) dt + 3 SE
    std::vector<double> h(N);
    auto mean_H = [&](std::vector<double>& out) {
        return detail::mean_H_flat(cloud.x2, cloud.v2, cloud.excluded, N, 1, pot, dc.gamma,
                                   p.lambda, &out);
    };
    double prev = mean_H(h);
    const int stride = 200;
    for (long s = 0; s < cfg.n_steps(); ++s) {
        step_coupled_chaos(cloud, ctx, cfg, s);
        if ((s + 1) % stride == 0) {
            std::vector<double> hn(N);
            double cur = mean_H(hn);
            double dt_rec = stride * cfg.dt;
            double var = 0;
            for (int i = 0; i < N; ++i) {
                double u = (hn[i] - h[i]) / dt_rec;
                var += u * u;
            }
            double mslope = (cur - prev) / dt_rec;
            var = var / N - mslope * mslope;
            double se = std::sqrt(std::max(var, 0.0) / N);
            double bound = dc.B - dc.gamma * std::max(cur, prev);
            CHECK(mslope <= bound + 3.0 * se + 1e-9);
            prev = cur;
            h = hn;
        }
    }
}
