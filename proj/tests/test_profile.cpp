#include <catch_amalgamated.hpp>

#include <cmath>

#include "kmv/profile.hpp"

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

// independent oracle: composite 64-point Gauss-Legendre of phi*g
double gauss64(const DistanceProfile& pr, double a, double b) {
    // nodes/weights for 64-pt Gauss-Legendre on [-1,1], generated by Newton
    static std::vector<double> xs, ws;
    if (xs.empty()) {
        const int n = 64;
        for (int i = 0; i < n; ++i) {
            double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
            for (int it = 0; it < 100; ++it) {
                double p0 = 1, p1 = 0;
                for (int j = 0; j < n; ++j) {
                    double p2 = p1;
                    p1 = p0;
                    p0 = ((2 * j + 1) * x * p1 - j * p2) / (j + 1);
                }
                double dp = n * (x * p0 - p1) / (x * x - 1);
                double dx = p0 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-16) break;
            }
            double p0 = 1, p1 = 0;
            for (int j = 0; j < n; ++j) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) * x * p1 - j * p2) / (j + 1);
            }
            double dp = n * (x * p0 - p1) / (x * x - 1);
            xs.push_back(x);
            ws.push_back(2.0 / ((1 - x * x) * dp * dp));
        }
    }
    // split into 32 panels for safety at moderate beta
    const int panels = 32;
    double total = 0;
    for (int p = 0; p < panels; ++p) {
        double lo = a + (b - a) * p / panels, hi = a + (b - a) * (p + 1) / panels;
        double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
        double s = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            double u = mid + half * xs[i];
            s += ws[i] * pr.phi(u) * pr.g(u);
        }
        total += s * half;
    }
    return total;
}

} // namespace

TEST_CASE("distance profile: core properties on the fixture") {
    auto p = fixture();
    auto dc = derive_base_constants(p);
    auto pr = build_profile(p, dc);

    SECTION("f'(0+) = 1") {
        auto [f0, fp0] = pr.f_eval(0.0);
        CHECK(f0 == 0.0);
        CHECK(fp0 == Catch::Approx(1.0).margin(1e-8));
    }
    SECTION("constant past R1") {
        auto [f, fp] = pr.f_eval(2.0 * dc.R1);
        CHECK(f == pr.f_R1);
        CHECK(fp == 0.0);
        CHECK(pr.f(dc.R1 + 1.0) == pr.f_R1);
    }
    SECTION("quadrature vs independent Gauss oracle") {
        for (double s : {0.5, 1.0, dc.R1 / 8.0, dc.R1 / 2.0}) {
            double want = gauss64(pr, 0.0, s);
            CHECK(pr.f(s) == Catch::Approx(want).margin(1e-9));
        }
    }
    SECTION("concavity on grid triples") {
        for (std::size_t i = 0; i + 2 < pr.grid_s.size(); ++i) {
            double lhs = pr.grid_f[i + 1];
            double rhs = 0.5 * (pr.grid_f[i] + pr.grid_f[i + 2]);
            REQUIRE(lhs >= rhs - 1e-10);
        }
    }
    SECTION("sandwich min(s,R1) f'(R1-) <= f(s) <= min(s,R1)") {
        double fpR1 = pr.grid_fp.back();
        for (int i = 0; i < 1000; ++i) {
            double s = 2.0 * dc.R1 * (i + 0.5) / 1000.0;
            double f = pr.f(s);
            REQUIRE(f >= std::min(s, dc.R1) * fpR1 - 1e-12);
            REQUIRE(f <= std::min(s, dc.R1) + 1e-12);
            REQUIRE(f <= std::min(s, pr.f_R1) + 1e-12);
        }
    }
    SECTION("g stays within [1/2, 1]") {
        for (double g : pr.grid_g) {
            REQUIRE(g >= 0.5);
            REQUIRE(g <= 1.0);
        }
    }
    SECTION("f is non-decreasing") {
        for (std::size_t i = 1; i < pr.grid_f.size(); ++i)
            REQUIRE(pr.grid_f[i] >= pr.grid_f[i - 1]);
    }
    SECTION("Phi grid agrees with erf") {
        GaussBump gb{pr.exponent_coeff / 8.0};
        for (std::size_t i = 0; i < pr.grid_s.size(); i += 257) {
            CHECK(pr.grid_Phi[i] == Catch::Approx(gb.Phi(pr.grid_s[i])).margin(1e-10));
        }
    }
}

TEST_CASE("profile underflow region is benign") {
    auto p = fixture();
    auto dc = derive_base_constants(p);
    auto pr = build_profile(p, dc);
    // deep in the Gaussian tail phi underflows; f saturates smoothly
    double s = 0.9 * dc.R1;
    auto [f, fp] = pr.f_eval(s);
    CHECK(fp == 0.0);
    CHECK(f == Catch::Approx(pr.f_R1).margin(1e-12));
}
