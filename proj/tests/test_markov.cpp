#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "gwma/markov.hpp"

using namespace gwma;

namespace {

// Closed-form Shewhart oracle, written against erfc directly so it shares
// nothing with the chain implementation.
double shewhart_arl(double L, double delta) {
    const double lower = 0.5 * std::erfc((L + delta) * 0.70710678118654752440);
    const double upper = 0.5 * std::erfc((L - delta) * 0.70710678118654752440);
    return 1.0 / (lower + upper);
}

const MarkovConfig kCfg{201, 30000, 1e-12};

} // namespace

TEST_CASE("markov chain reproduces the shewhart closed form") {
    // In-control ARL at L = 3.5 is 2149; convergence to tail_eps takes about
    // 28 ARL steps, hence the wider horizon here.
    const MarkovConfig cfg{201, 100000, 1e-12};
    for (double L : {2.5, 3.0, 3.5}) {
        for (double delta : {0.0, 1.0, 2.0}) {
            CAPTURE(L, delta);
            const double want = shewhart_arl(L, delta);
            for (auto mode : {LimitMode::TimeVarying, LimitMode::Asymptotic}) {
                const double got = ewma_arl({1.0}, L, delta, mode, cfg);
                REQUIRE(got == Catch::Approx(want).epsilon(0.005));
            }
        }
    }
}

TEST_CASE("time-varying ARL hits the published design points") {
    // lambda = 0.25, L = 3.002: the EWMA column of the 500-target table.
    CHECK(ewma_arl({0.25}, 3.002, 0.0, LimitMode::TimeVarying, kCfg) ==
          Catch::Approx(500.0).epsilon(0.01));
    CHECK(ewma_arl({0.25}, 3.002, 1.0, LimitMode::TimeVarying, kCfg) ==
          Catch::Approx(10.43).epsilon(0.01));
    CHECK(ewma_arl({0.206}, 2.971, 0.25, LimitMode::TimeVarying, kCfg) ==
          Catch::Approx(151.45).epsilon(0.01));
}

TEST_CASE("limit modes agree for the in-control chart") {
    const double tv = ewma_arl({0.25}, 3.002, 0.0, LimitMode::TimeVarying, kCfg);
    const double asym = ewma_arl({0.25}, 3.002, 0.0, LimitMode::Asymptotic, kCfg);
    CHECK(std::fabs(asym / tv - 1.0) < 0.01);
}

TEST_CASE("ARL decreases strictly in the shift size") {
    double prev = 1e300;
    for (double delta : {0.0, 0.25, 0.5, 1.0, 2.0, 3.0}) {
        const double arl = ewma_arl({0.25}, 3.002, delta, LimitMode::TimeVarying, kCfg);
        REQUIRE(arl < prev);
        prev = arl;
    }
}

TEST_CASE("grid refinement is stable") {
    const MarkovConfig fine{403, 30000, 1e-12};
    struct Case { double lambda, L, delta; };
    for (const auto& c : {Case{0.25, 3.002, 0.0}, Case{0.25, 3.002, 1.0},
                          Case{0.152, 2.915, 0.0}, Case{1.0, 3.0, 0.0}}) {
        CAPTURE(c.lambda, c.L, c.delta);
        const double coarse = ewma_arl({c.lambda}, c.L, c.delta,
                                       LimitMode::TimeVarying, kCfg);
        const double refined = ewma_arl({c.lambda}, c.L, c.delta,
                                        LimitMode::TimeVarying, fine);
        REQUIRE(std::fabs(refined / coarse - 1.0) < 0.002);
    }
}

TEST_CASE("ced at tau = 1 is the zero-state ARL") {
    for (auto mode : {LimitMode::TimeVarying, LimitMode::Asymptotic}) {
        const double arl = ewma_arl({0.25}, 3.002, 0.5, mode, kCfg);
        const double ced = ewma_ced({0.25}, 3.002, 0.5, 1, mode, kCfg);
        REQUIRE(std::fabs(ced / arl - 1.0) < 1e-9);
    }
}

TEST_CASE("ced behavior") {
    SECTION("in-control delay exceeds one") {
        for (long tau : {2L, 10L, 50L})
            CHECK(ewma_ced({0.25}, 3.002, 0.0, tau, LimitMode::TimeVarying, kCfg) > 1.0);
    }
    SECTION("profile is numerically flat by tau = 100") {
        const double d90 = ewma_ced({0.25}, 3.002, 0.5, 90, LimitMode::TimeVarying, kCfg);
        const double d100 = ewma_ced({0.25}, 3.002, 0.5, 100, LimitMode::TimeVarying, kCfg);
        CHECK(std::fabs(d100 / d90 - 1.0) < 0.001);
    }
    SECTION("shewhart is memoryless") {
        const double arl = ewma_arl({1.0}, 3.0, 1.0, LimitMode::TimeVarying, kCfg);
        for (long tau : {2L, 7L, 100L})
            CHECK(ewma_ced({1.0}, 3.0, 1.0, tau, LimitMode::TimeVarying, kCfg) ==
                  Catch::Approx(arl).epsilon(1e-9));
    }
    SECTION("steady state sits below zero state for a large shift, fixed limits") {
        const double zero = ewma_arl({0.25}, 3.002, 2.0, LimitMode::Asymptotic, kCfg);
        const double steady =
            ewma_steady_state_arl({0.25}, 3.002, 2.0, LimitMode::Asymptotic, kCfg);
        CHECK(steady < zero);
    }
}

TEST_CASE("no-signal probability") {
    CHECK(ewma_no_signal_prob({0.25}, 3.002, 0, LimitMode::TimeVarying, kCfg) == 1.0);
    SECTION("decreasing in the horizon") {
        double prev = 1.0;
        for (long k : {1L, 5L, 25L, 100L, 400L}) {
            const double s = ewma_no_signal_prob({0.25}, 3.002, k,
                                                 LimitMode::TimeVarying, kCfg);
            REQUIRE(s < prev);
            prev = s;
        }
    }
    SECTION("shewhart survival is exactly geometric") {
        const double p_in = 1.0 - 2.0 * 0.5 * std::erfc(3.0 * 0.70710678118654752440);
        for (long k : {1L, 10L, 60L})
            CHECK(ewma_no_signal_prob({1.0}, 3.0, k, LimitMode::TimeVarying, kCfg) ==
                  Catch::Approx(std::pow(p_in, static_cast<double>(k))).epsilon(1e-10));
    }
}

TEST_CASE("markov error paths") {
    SECTION("horizon cap is an error, not truncation") {
        const MarkovConfig tight{201, 100, 1e-12};
        CHECK_THROWS_AS(ewma_arl({0.25}, 3.002, 0.0, LimitMode::TimeVarying, tight),
                        HorizonError);
    }
    SECTION("grid too coarse for tiny lambda") {
        CHECK_THROWS_AS(ewma_arl({0.005}, 3.0, 0.0, LimitMode::TimeVarying, kCfg),
                        ResolutionError);
    }
    SECTION("conditioning mass underflow") {
        // L = 0.5 signals almost every step; surviving 1500 steps underflows.
        CHECK_THROWS_AS(ewma_ced({0.25}, 0.5, 1.0, 1500, LimitMode::TimeVarying,
                                 MarkovConfig{201, 5000, 1e-12}),
                        ConditioningError);
    }
    SECTION("tau beyond the horizon") {
        CHECK_THROWS_AS(ewma_ced({0.25}, 3.002, 1.0, 200, LimitMode::TimeVarying,
                                 MarkovConfig{201, 100, 1e-12}),
                        HorizonError);
    }
    SECTION("config validation") {
        CHECK_THROWS_AS(ewma_arl({0.25}, 3.0, 0.0, LimitMode::TimeVarying,
                                 MarkovConfig{200, 1000, 1e-12}),
                        std::invalid_argument);
        CHECK_THROWS_AS(ewma_arl({0.25}, 3.0, 0.0, LimitMode::TimeVarying,
                                 MarkovConfig{1, 1000, 1e-12}),
                        std::invalid_argument);
        CHECK_THROWS_AS(ewma_arl({0.25}, 3.0, 0.0, LimitMode::TimeVarying,
                                 MarkovConfig{201, 1000, 0.0}),
                        std::invalid_argument);
        CHECK_THROWS_AS(ewma_arl({0.25}, 0.0, 0.0, LimitMode::TimeVarying, kCfg),
                        std::invalid_argument);
        CHECK_THROWS_AS(ewma_ced({0.25}, 3.0, 0.0, 0, LimitMode::TimeVarying, kCfg),
                        std::invalid_argument);
    }
}
