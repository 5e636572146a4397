#include <catch_amalgamated.hpp>

#include <cmath>

#include "kmv/constants.hpp"
#include "kmv/dynamics.hpp"

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

} // namespace

TEST_CASE("reflect_increment") {
    CHECK(reflect_increment({1.0, 0.0}, {3.0, 4.0}) == Vec{-3.0, 4.0});
    CHECK(reflect_increment({0.0, 0.0}, {3.0, 4.0}) == Vec{3.0, 4.0});
    RngStream rng(3, RngStream::stream_id(7, 0));
    for (int i = 0; i < 1000; ++i) {
        Vec e(3), db(3);
        rng.fill_gauss(i, 0, e.data(), 3);
        rng.fill_gauss(i, 1, db.data(), 3);
        double ne = norm(e);
        for (auto& c : e) c /= ne;
        auto r = reflect_increment(e, db);
        REQUIRE(std::abs(norm(r) - norm(db)) <= 1e-12);
        // involution
        auto rr = reflect_increment(e, r);
        for (int k = 0; k < 3; ++k) REQUIRE(rr[k] == Catch::Approx(db[k]).margin(1e-12));
    }
    CHECK_THROWS(reflect_increment({0.5, 0.0}, {1.0, 0.0}));
}

TEST_CASE("coupling weights: regions and the unit-circle identity") {
    double xi = 0.4, alpha = 2.0, R1 = 10.0;
    { // |z+w| = xi/4 -> synchronous
        auto w = coupling_weights({1.0}, {-0.9}, xi, alpha, R1);
        CHECK(w.rc == 0.0);
        CHECK(w.sc == 1.0);
    }
    { // |z+w| = 2 xi and r <= R1 -> reflection
        auto w = coupling_weights({0.4}, {0.4}, xi, alpha, R1);
        CHECK(w.rc == 1.0);
        CHECK(w.sc == 0.0);
    }
    { // far out: r >= R1 + xi -> synchronous again
        auto w = coupling_weights({20.0}, {1.0}, xi, alpha, R1);
        CHECK(w.rc == 0.0);
    }
    RngStream rng(5, RngStream::stream_id(7, 1));
    for (int i = 0; i < 5000; ++i) {
        Vec z(2), w(2);
        rng.fill_gauss(i, 0, z.data(), 2);
        rng.fill_gauss(i, 1, w.data(), 2);
        for (auto& c : z) c *= 4.0;
        auto cw = coupling_weights(z, w, xi, alpha, R1);
        REQUIRE(std::abs(cw.rc * cw.rc + cw.sc * cw.sc - 1.0) <= 1e-12);
        REQUIRE(cw.rc >= 0.0);
        REQUIRE(cw.rc <= 1.0);
    }
    CHECK_THROWS(coupling_weights({1.0}, {1.0}, 0.0, alpha, R1));
}

TEST_CASE("noise-free damped oscillator matches the closed form") {
    // U = |x|^2/2, no interaction, no noise: (x,v)' = [[0,1],[-1,-1]](x,v)
    auto pot = ConfiningPotential::quadratic_d(1, 2.0 / 3.0, 0.0);
    auto w0 = InteractionPotential::none();
    SimConfig cfg;
    cfg.dt = 1e-4;
    cfg.t_final = 1.0;
    cfg.noise_scale = 0.0;
    cfg.seed = 1;
    cfg.xi = 0.1;
    ParticleCloud cloud;
    cloud.resize(1, 1);
    double x0 = 1.3, v0 = -0.4;
    cloud.x[0] = x0;
    cloud.v[0] = v0;
    StepContext ctx;
    ctx.pot_U = &pot;
    ctx.pot_W = &w0;
    ctx.alpha = 1.0;
    ctx.R1 = 10.0;
    for (long s = 0; s < cfg.n_steps(); ++s) step_particle_system(cloud, ctx, cfg, s);
    double t = 1.0, om = std::sqrt(3.0) / 2.0;
    double decay = std::exp(-t / 2.0);
    double xt = decay * (std::cos(om * t) * x0 + std::sin(om * t) / om * (x0 / 2.0 + v0));
    double vt = decay * (std::cos(om * t) * v0 + std::sin(om * t) / om * (-x0 - v0 / 2.0));
    CHECK(cloud.x[0] == Catch::Approx(xt).margin(1e-3));
    CHECK(cloud.v[0] == Catch::Approx(vt).margin(1e-3));
}

TEST_CASE("harmonic interaction: O(N) mean path vs O(N^2) sum") {
    auto p = fixture();
    auto pot = ConfiningPotential::double_well_1d(p.lambda, p.A);
    auto w = InteractionPotential::harmonic(0.05, true);
    const int N = 64;
    // drift-level identity
    RngStream rng(9, RngStream::stream_id(7, 2));
    std::vector<double> xs(N);
    std::vector<char> ex(N, 0);
    for (int i = 0; i < N; ++i) xs[i] = 3.0 * rng.uniform01(i, 0, 0) - 1.5;
    MeanFieldDrift fast(w, xs, ex, N, 1);
    MeanFieldDrift full(w, xs, ex, N, 1, true);
    for (int i = 0; i < N; ++i) {
        double a, b;
        fast.eval(&xs[i], &a);
        full.eval(&xs[i], &b);
        REQUIRE(a == Catch::Approx(b).margin(1e-13));
    }
    // trajectory-level agreement over 200 steps
    SimConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_final = 0.2;
    cfg.seed = 77;
    cfg.xi = 0.1;
    ParticleCloud c1, c2;
    c1.resize(N, 1);
    for (int i = 0; i < N; ++i) {
        c1.x[i] = xs[i];
        c1.v[i] = 0.1 * i - 3.0;
    }
    c2 = c1;
    StepContext ctx;
    ctx.pot_U = &pot;
    ctx.pot_W = &w;
    ctx.alpha = 1.0;
    ctx.R1 = 10.0;
    StepContext ctx_full = ctx;
    ctx_full.force_full_interaction = true;
    for (long s = 0; s < cfg.n_steps(); ++s) {
        step_particle_system(c1, ctx, cfg, s);
        step_particle_system(c2, ctx_full, cfg, s);
    }
    for (int i = 0; i < N; ++i) {
        REQUIRE(c1.x[i] == Catch::Approx(c2.x[i]).margin(1e-10));
        REQUIRE(c1.v[i] == Catch::Approx(c2.v[i]).margin(1e-10));
    }
}

TEST_CASE("particle updates decompose row-wise over the ensemble mean") {
    // Exchangeability in implementation terms: each row update depends only
    // on its own state, its own stream, and the (permutation-invariant)
    // ensemble mean. One full-cloud step must equal the manual per-row
    // Euler-Maruyama update, bitwise.
    auto p = fixture();
    auto pot = ConfiningPotential::double_well_1d(p.lambda, p.A);
    auto w = InteractionPotential::harmonic(0.05, true);
    SimConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_final = 0.001;
    cfg.seed = 5;
    cfg.xi = 0.1;
    const int N = 4;
    ParticleCloud cloud;
    cloud.resize(N, 1);
    cloud.x = {0.4, -1.0, 0.9, 0.1};
    cloud.v = {0.0, 0.3, -0.2, 0.5};
    ParticleCloud before = cloud;
    StepContext ctx;
    ctx.pot_U = &pot;
    ctx.pot_W = &w;
    ctx.alpha = 1.0;
    ctx.R1 = 10.0;
    step_particle_system(cloud, ctx, cfg, 0);

    // manual per-row update with the frozen start-of-step mean
    // pairwise_sum falls back to serial left-to-right accumulation for n <= 8
    double mean = (((before.x[0] + before.x[1]) + before.x[2]) + before.x[3]) / 4.0;
    double sdt = std::sqrt(2.0 * cfg.dt);
    for (int i = 0; i < N; ++i) {
        RngStream rng(cfg.seed, RngStream::stream_id(detail::kStreamParticle, i));
        double g;
        rng.fill_gauss(0, 0, &g, 1);
        double gu = 0;
        grad_U_raw(pot, &before.x[i], 1, &gu);
        double mf = w.L_W * (before.x[i] - mean);
        double xv = before.x[i] + before.v[i] * cfg.dt;
        double vv = before.v[i] + (-before.v[i] - gu - mf) * cfg.dt + sdt * g;
        REQUIRE(cloud.x[i] == xv);
        REQUIRE(cloud.v[i] == vv);
    }
    // the two-term pairwise mean is permutation invariant bitwise
    CHECK((before.x[0] + before.x[1]) == (before.x[1] + before.x[0]));
}

TEST_CASE("N=1 particle system reduces to a single Langevin particle") {
    auto p = fixture();
    auto pot = ConfiningPotential::double_well_1d(p.lambda, p.A);
    auto harm = InteractionPotential::harmonic(0.05, true);
    auto none = InteractionPotential::none();
    SimConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_final = 0.5;
    cfg.seed = 31;
    cfg.xi = 0.1;
    ParticleCloud a, b;
    a.resize(1, 1);
    a.x = {0.7};
    a.v = {-0.2};
    b = a;
    StepContext ctx;
    ctx.pot_U = &pot;
    ctx.alpha = 1.0;
    ctx.R1 = 10.0;
    StepContext ca = ctx, cb = ctx;
    ca.pot_W = &harm;
    cb.pot_W = &none;
    for (long s = 0; s < cfg.n_steps(); ++s) {
        step_particle_system(a, ca, cfg, s);
        step_particle_system(b, cb, cfg, s);
    }
    CHECK(a.x[0] == b.x[0]); // interaction term is exactly zero for N=1
    CHECK(a.v[0] == b.v[0]);
}

TEST_CASE("identical synchronous pairs stay merged bitwise") {
    auto p = fixture();
    auto dc = derive_base_constants(p);
    auto pot = ConfiningPotential::double_well_1d(p.lambda, p.A);
    auto w = InteractionPotential::harmonic(0.03, true);
    SimConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_final = 1.0;
    cfg.seed = 8;
    cfg.xi = 1e-2 * dc.R1;
    CoupledCloud cloud;
    cloud.resize(32, 1);
    RngStream rng(8, RngStream::stream_id(7, 5));
    for (int i = 0; i < 32; ++i) {
        cloud.x1[i] = cloud.x2[i] = 2.0 * rng.uniform01(i, 0, 0) - 1.0;
        cloud.v1[i] = cloud.v2[i] = rng.uniform01(i, 1, 0);
    }
    StepContext ctx;
    ctx.pot_U = &pot;
    ctx.pot_W = &w;
    ctx.alpha = dc.alpha;
    ctx.R1 = dc.R1;
    for (long s = 0; s < cfg.n_steps(); ++s) {
        step_pair_coupled(cloud, ctx, cfg, s);
        for (int i = 0; i < 32; ++i) {
            REQUIRE(cloud.x1[i] == cloud.x2[i]);
            REQUIRE(cloud.v1[i] == cloud.v2[i]);
        }
    }
}

TEST_CASE("chaos coupling degenerates correctly") {
    auto p = fixture();
    auto dc = derive_base_constants(p);
    auto pot = ConfiningPotential::double_well_1d(p.lambda, p.A);
    auto none = InteractionPotential::none();
    SimConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_final = 0.5;
    cfg.seed = 13;
    cfg.xi = 1e-2 * dc.R1;
    // W = 0, identical initial points: Z = W = 0 forever
    CoupledCloud cloud;
    cloud.mode = CoupledMode::particle_vs_nonlinear;
    cloud.resize(16, 1);
    RngStream rng(13, RngStream::stream_id(7, 6));
    for (int i = 0; i < 16; ++i) {
        cloud.x1[i] = cloud.x2[i] = rng.uniform01(i, 0, 0);
        cloud.v1[i] = cloud.v2[i] = rng.uniform01(i, 1, 0) - 0.5;
    }
    StepContext ctx;
    ctx.pot_U = &pot;
    ctx.pot_W = &none;
    ctx.alpha = dc.alpha;
    ctx.R1 = dc.R1;
    ctx.stream_kind = 0x30;
    for (long s = 0; s < cfg.n_steps(); ++s) {
        step_coupled_chaos(cloud, ctx, cfg, s);
        for (int i = 0; i < 16; ++i) {
            REQUIRE(cloud.x1[i] == cloud.x2[i]);
            REQUIRE(cloud.v1[i] == cloud.v2[i]);
        }
    }
    // wrong mode is rejected
    CoupledCloud pairc;
    pairc.resize(2, 1);
    pairc.mode = CoupledMode::pair_nonlinear;
    CHECK_THROWS(step_coupled_chaos(pairc, ctx, cfg, 0));
}

TEST_CASE("thread count does not change trajectories") {
    auto p = fixture();
    auto dc = derive_base_constants(p);
    auto pot = ConfiningPotential::double_well_1d(p.lambda, p.A);
    auto w = InteractionPotential::harmonic(0.03, true);
    auto run = [&](int threads) {
        SimConfig cfg;
        cfg.dt = 1e-3;
        cfg.t_final = 0.3;
        cfg.seed = 99;
        cfg.xi = 1e-2 * dc.R1;
        cfg.threads = threads;
        ParticleCloud cloud;
        cloud.resize(257, 1);
        RngStream rng(99, RngStream::stream_id(7, 7));
        for (int i = 0; i < 257; ++i) {
            cloud.x[i] = 2.0 * rng.uniform01(i, 0, 0) - 1.0;
            cloud.v[i] = rng.uniform01(i, 1, 0);
        }
        StepContext ctx;
        ctx.pot_U = &pot;
        ctx.pot_W = &w;
        ctx.alpha = dc.alpha;
        ctx.R1 = dc.R1;
        for (long s = 0; s < cfg.n_steps(); ++s) step_particle_system(cloud, ctx, cfg, s);
        return cloud;
    };
    auto c1 = run(1);
    auto c8 = run(8);
    for (int i = 0; i < 257; ++i) {
        REQUIRE(c1.x[i] == c8.x[i]);
        REQUIRE(c1.v[i] == c8.v[i]);
    }
}

TEST_CASE("divergence is flagged and excluded") {
    auto pot = ConfiningPotential::quadratic_d(1, 2.0 / 3.0, 0.0);
    auto none = InteractionPotential::none();
    SimConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_final = 0.01;
    cfg.seed = 1;
    cfg.xi = 0.1;
    ParticleCloud cloud;
    cloud.resize(4, 1);
    cloud.x = {0.0, 1e308, 0.5, -0.5};
    cloud.v = {0.0, 1e308, 0.0, 0.0};
    StepContext ctx;
    ctx.pot_U = &pot;
    ctx.pot_W = &none;
    ctx.alpha = 1.0;
    ctx.R1 = 10.0;
    for (long s = 0; s < cfg.n_steps(); ++s) step_particle_system(cloud, ctx, cfg, s);
    CHECK(cloud.excluded_count == 1);
    CHECK(cloud.excluded[1] == 1);
    CHECK(std::isfinite(cloud.x[0]));
}
