#include <catch_amalgamated.hpp>

#include <cmath>

#include "kmv/constants.hpp"
#include "kmv/rng.hpp"

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

TEST_CASE("base constants match hand computations") {
    ModelParams p;
    p.lambda = 1.0;
    p.A = 0.0;
    p.tilde_A = 0.0;
    p.L_U = 2.0;
    p.L_W = 0.0;
    p.d = 1;
    auto dc = derive_base_constants(p);
    CHECK(dc.gamma == Catch::Approx(0.25));        // lambda/(2(lambda+1))
    CHECK(dc.B == Catch::Approx(24.0));            // 24(0 + 0.75*0 + 1)
    CHECK(dc.alpha == Catch::Approx(2.25));        // L_U + lambda/4
    CHECK(dc.R0 == Catch::Approx(37.180599).epsilon(1e-6)); // sqrt(24*24/(5*0.25*(1/3)))
    double kap = 3.25 * 3.25 + 2.25 * 2.25;
    CHECK(dc.R1 == Catch::Approx(std::sqrt(kap) * dc.R0));
    CHECK(dc.gamma <= 0.5);
    CHECK(dc.B >= 24.0 * p.d);
}

TEST_CASE("rejects invalid model parameters") {
    ModelParams p = fixture();
    p.lambda = 0.0;
    CHECK_THROWS(derive_base_constants(p));
    p = fixture();
    p.d = 0;
    CHECK_THROWS(derive_base_constants(p));
    p = fixture();
    p.L_W = p.lambda / 8.0; // not strictly below
    CHECK_THROWS(derive_base_constants(p));
}

TEST_CASE("c sits on the exponential branch and epsilon follows it") {
    auto p = fixture();
    auto dc = derive_base_constants(p);
    // the exponential branch is far below gamma/36 and B/3
    CHECK(dc.c.log() < std::log(dc.gamma / 36.0));
    // epsilon = 3c/B exactly in log arithmetic
    CHECK((dc.epsilon * lr(dc.B) / lr(3.0)).log() == Catch::Approx(dc.c.log()));
    // C_bold = c + 2 eps B = 7c
    CHECK(dc.C_bold.log() == Catch::Approx(dc.c.log() + std::log(7.0)).margin(1e-12));
    // the known closed form of the exponent branch
    double m1 = 0.5 - p.L_U / (2 * dc.alpha);
    double coef = p.L_U / dc.alpha + dc.alpha + 96.0;
    double expect = std::log(m1 / 7.0) - coef / 8.0 * dc.R1 * dc.R1;
    CHECK(dc.c.log() == Catch::Approx(expect).epsilon(1e-12));
}

TEST_CASE("constraint ledger passes on the fixture with positive slack") {
    auto p = fixture();
    auto dc = derive_base_constants(p);
    auto led = verify_constraint_ledger(p, dc);
    CAPTURE(led.entries.size());
    for (const auto& e : led.entries) {
        CAPTURE(e.name, e.slack);
        CHECK(e.satisfied);
    }
    CHECK(led.all_pass);
    CHECK(led.min_slack > 0);
    // every named inequality appears exactly once
    std::vector<std::string> names{"cond_region_3",  "cond_alpha",       "cond_region_2_prop",
                                   "cond_g_demi_prop", "def_phi",        "cond_c_2",
                                   "cond_c_3",       "part_cond_c",      "part_epsilon_le_1",
                                   "part_cond_g_demi", "part_cond_region_2", "part_def_phi"};
    for (const auto& n : names) {
        int cnt = 0;
        for (const auto& e : led.entries) cnt += e.name == n ? 1 : 0;
        CAPTURE(n);
        CHECK(cnt == 1);
    }
    CHECK(led.entries.size() == names.size());
}

TEST_CASE("mutated constants are caught by the ledger") {
    auto p = fixture();
    auto dc = derive_base_constants(p);
    auto led = verify_constraint_ledger(p, dc);

    // multiplying c alone by 100 breaks the region-3 inequality (its slack is
    // a fixed ratio ~6/5 once epsilon is frozen)
    auto bad = dc;
    bad.c = dc.c * lr(100.0);
    auto led2 = verify_constraint_ledger(p, bad);
    CHECK_FALSE(led2.all_pass);
    CHECK_FALSE(led2.find("cond_region_3")->satisfied);

    // scaling c and epsilon together past the recorded slack must break the
    // region-2 inequality
    double slack_decades = led.find("cond_region_2_prop")->slack;
    auto bad2 = dc;
    LogReal scale = LogReal::from_log((slack_decades + 1.0) * std::log(10.0));
    bad2.c = dc.c * scale;
    bad2.epsilon = dc.epsilon * scale;
    auto led3 = verify_constraint_ledger(p, bad2);
    CHECK_FALSE(led3.find("cond_region_2_prop")->satisfied);
}

TEST_CASE("ledger passes for random admissible parameter sets") {
    RngStream rng(99, RngStream::stream_id(0xEE, 0));
    for (int trial = 0; trial < 10; ++trial) {
        auto u = [&](int slot, double lo, double hi) {
            return lo + (hi - lo) * rng.uniform01(trial, slot, 0);
        };
        ModelParams p;
        p.lambda = u(0, 0.2, 5.0);
        p.A = u(1, 0.0, 5.0);
        p.tilde_A = u(2, 0.0, 5.0);
        p.L_U = u(3, 0.2, 10.0);
        p.L_W = u(4, 0.0, 0.99) * p.lambda / 8.0;
        p.d = 1 + static_cast<int>(u(5, 0.0, 2.999));
        p.a = u(6, 0.02, 0.3);
        p.C0 = u(7, 0.0, 50.0);
        auto dc = derive_base_constants(p);
        auto led = verify_constraint_ledger(p, dc);
        CAPTURE(trial, p.lambda, p.L_U, p.L_W, p.a);
        for (const auto& e : led.entries) {
            CAPTURE(e.name, e.slack);
            CHECK(e.satisfied);
        }
        REQUIRE(led.all_pass);
    }
}

TEST_CASE("particle constants: identities and hand values") {
    auto p = fixture();
    auto dc = derive_base_constants(p);
    auto pc = derive_particle_constants(p, dc);

    // eps_part * 2 B~ / 5 = c_part exactly in log arithmetic
    CHECK((pc.epsilon_part * lr(2.0) * pc.B_tilde / lr(5.0)).log() ==
          Catch::Approx(pc.c_part.log()));
    // R1_part = sqrt((1+alpha)^2 + alpha^2) R0_part
    double kap = (1 + dc.alpha) * (1 + dc.alpha) + dc.alpha * dc.alpha;
    CHECK((pc.R1_part / pc.R0_part).to_double() == Catch::Approx(std::sqrt(kap)));
    // the gamma lambda / (16(3+4lambda)) term for lambda = 1
    ModelParams q = fixture();
    q.lambda = 1.0;
    auto dq = derive_base_constants(q);
    (void)dq;
    CHECK(dq.gamma * q.lambda / (16.0 * (3.0 + 4.0 * q.lambda)) ==
          Catch::Approx(0.25 / 112.0));
    // with everything else astronomically small, the admissible particle
    // bound is far below that first term
    CHECK(pc.L_W_max_part <
          lr(dc.gamma * p.lambda / (16.0 * (3.0 + 4.0 * p.lambda))));

    // C_f2 against an independent one-line recomputation
    double mh = std::max(1.0, 1.0 / (2 * dc.alpha));
    double want = 8.0 * (24.0 * mh + 4.0 * std::sqrt(3.0) * dc.C_dH1 * p.a +
                         8.0 * std::sqrt(3.0) * dc.C_dH2 * p.a * p.a);
    CHECK(pc.C_f1 > 0);
    CHECK(pc.C_f2 == Catch::Approx(want));
    CHECK_THROWS(derive_particle_constants([&] {
        auto bad = p;
        bad.a = 0.0;
        return bad;
    }(), dc));
}

TEST_CASE("B-tilde maximization matches a brute-force scan") {
    auto p = fixture();
    auto dc = derive_base_constants(p);
    auto pc = derive_particle_constants(p, dc);
    double D = dc.B + 288.0 * p.a * p.a / dc.gamma +
               p.L_W * (6 + 8 * p.lambda) * (dc.B / dc.gamma + p.C0) / p.lambda;
    double best = std::log(D);
    for (int i = 1; i < 2000000; ++i) {
        double h = 4.0 * D / dc.gamma * i / 2000000.0;
        double rest = D - dc.gamma * h / 4.0;
        if (rest <= 0) break;
        best = std::max(best, p.a * std::sqrt(h) + std::log(rest));
    }
    CHECK(pc.B_tilde.log() == Catch::Approx(best).margin(1e-6));
    CHECK(pc.B_tilde.log() >= std::log(D)); // at least the h=0 value
}

TEST_CASE("admissible interaction bound and tau") {
    auto p = fixture();
    auto dc = derive_base_constants(p);
    // L_W = 0: tau = c exactly
    CHECK(dc.tau.log() == Catch::Approx(dc.c.log()));
    CHECK(dc.tau.sign() > 0);
    CHECK(admissible_interaction_bound(p, dc) == dc.L_W_max);
    // bound stays at or below lambda/8 and is positive
    CHECK(dc.L_W_max <= lr(p.lambda / 8.0));
    CHECK(dc.L_W_max.sign() > 0);
    // any double-representable positive L_W exceeds the bound -> tau < 0
    ModelParams q = fixture();
    q.L_W = 1e-300;
    auto dq = derive_base_constants(q);
    CHECK(dq.tau.sign() < 0);
    // |tau| at the bound is zero to double precision
    CHECK(std::abs(dq.L_W_max.to_double() * dq.C_K.to_double()) <= 1e-12);
}

TEST_CASE("tau is monotone non-increasing in L_W (L_U >= lambda branch)") {
    auto p = fixture();
    LogReal prev_tau;
    bool first = true;
    for (double frac : {0.0, 0.25, 0.5, 0.75, 0.99}) {
        auto q = p;
        q.L_W = frac * p.lambda / 8.0;
        auto dq = derive_base_constants(q);
        if (!first) CHECK(dq.tau <= prev_tau);
        prev_tau = dq.tau;
        first = false;
    }
}

TEST_CASE("scale audit: doubling A") {
    auto p = fixture();
    auto dc1 = derive_base_constants(p);
    auto q = p;
    q.A *= 2.0;
    auto dc2 = derive_base_constants(q);
    CHECK(dc2.gamma == dc1.gamma);
    CHECK(dc2.alpha == dc1.alpha);
    CHECK(dc2.B > dc1.B);
    CHECK(dc2.R1 > dc1.R1);
    CHECK(dc2.B - dc1.B == Catch::Approx(24.0 * p.A)); // B is linear in A
}

TEST_CASE("c_psi stays below L_U gamma a / 64") {
    for (double a : {0.05, 0.1, 0.3}) {
        auto p = fixture();
        p.a = a;
        auto dc = derive_base_constants(p);
        CHECK(dc.c_psi <= lr(p.L_U * dc.gamma * p.a / 64.0));
        CHECK(dc.c_psi.sign() > 0);
    }
}
