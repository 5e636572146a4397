#include <catch_amalgamated.hpp>

#include "kmv/log_real.hpp"

using kmv::LogReal;
using kmv::lr;

TEST_CASE("LogReal round-trips doubles") {
    for (double v : {1.0, -2.5, 1e-300, 3.7e200, -9.9e-250}) {
        CHECK(lr(v).to_double() == Catch::Approx(v).epsilon(1e-12));
    }
    CHECK(lr(0.0).is_zero());
    CHECK(lr(0.0).to_double() == 0.0);
}

TEST_CASE("LogReal arithmetic matches doubles in range") {
    double a = 3.25, b = -1.75;
    CHECK((lr(a) * lr(b)).to_double() == Catch::Approx(a * b));
    CHECK((lr(a) / lr(b)).to_double() == Catch::Approx(a / b));
    CHECK((lr(a) + lr(b)).to_double() == Catch::Approx(a + b));
    CHECK((lr(a) - lr(b)).to_double() == Catch::Approx(a - b));
    CHECK((lr(b) + lr(-b)).is_zero());
    CHECK((lr(a).pow(3.0)).to_double() == Catch::Approx(a * a * a));
    CHECK(lr(16.0).sqrt().to_double() == Catch::Approx(4.0));
}

TEST_CASE("LogReal handles magnitudes far outside double range") {
    LogReal tiny = LogReal::from_log(-2.0e6);   // e^{-2e6}
    LogReal huge = LogReal::from_log(1.5e6);    // e^{+1.5e6}
    CHECK(tiny.to_double() == 0.0);             // saturates
    CHECK(std::isinf(huge.to_double()));
    LogReal prod = tiny * huge;                 // e^{-5e5}
    CHECK(prod.log() == Catch::Approx(-5.0e5));
    CHECK(tiny < huge);
    CHECK((huge - tiny).log() == Catch::Approx(1.5e6));
    // adding a tiny to one leaves one
    CHECK((LogReal::one() + tiny).log() == Catch::Approx(0.0));
}

TEST_CASE("LogReal comparisons order by signed value") {
    CHECK(lr(-5.0) < lr(-1.0));
    CHECK(lr(-1.0) < lr(0.0));
    CHECK(lr(0.0) < lr(1e-200));
    CHECK(max(lr(2.0), lr(3.0)).to_double() == 3.0);
    CHECK(min(lr(-2.0), lr(1.0)).to_double() == -2.0);
}

TEST_CASE("LogReal rejects invalid operations") {
    CHECK_THROWS(lr(1.0) / lr(0.0));
    CHECK_THROWS(lr(-1.0).pow(0.5));
    CHECK_THROWS(lr(0.0).log());
}
