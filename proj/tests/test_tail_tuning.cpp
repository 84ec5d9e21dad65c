#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "argi/rng.hpp"
#include "argi/tail_tuning.hpp"

using namespace argi;
using Catch::Approx;

TEST_CASE("Hill estimate matches the reference value", "[tuning]") {
    std::vector<double> v;
    for (int i = 0; i < 40; ++i) v.push_back(std::exp(0.1 * i) * (1.0 + 0.01 * (i % 7)));
    CHECK(hill_estimate(v, 10) == Approx(2.1757352616956505).epsilon(1e-13));
}

TEST_CASE("Hill estimate does not depend on input order", "[tuning][property]") {
    std::vector<double> v;
    for (int i = 0; i < 60; ++i) v.push_back(1.0 + std::abs(std::sin(0.3 * i)) * i);
    const double a = hill_estimate(v, 12);
    std::reverse(v.begin(), v.end());
    std::mt19937_64 rng(1);
    std::shuffle(v.begin(), v.end(), rng);
    CHECK(hill_estimate(v, 12) == a);
}

TEST_CASE("Hill estimate on Pareto samples", "[tuning][statistical]") {
    int inside = 0;
    const int seeds = 20;
    for (int s = 0; s < seeds; ++s) {
        Rng rng(derive_seed(15, static_cast<std::uint64_t>(s)));
        std::uniform_real_distribution<double> u(0.0, 1.0);
        std::vector<double> v(10000);
        for (auto& x : v) x = std::pow(1.0 - u(rng), -1.0 / 1.5);
        const double h = hill_estimate(v, 400);
        inside += (h >= 1.3 && h <= 1.7) ? 1 : 0;
    }
    CHECK(inside >= 18);
}

TEST_CASE("Hill estimator input checks", "[tuning]") {
    std::vector<double> v{1, 2, 3, 4, 5};
    CHECK_THROWS_AS(hill_estimate(v, 1), InsufficientDataError);
    CHECK_THROWS_AS(hill_estimate(v, 5), InsufficientDataError);
    std::vector<double> flat(20, 2.0);
    CHECK_THROWS_AS(hill_estimate(flat, 5), DegenerateError);
    std::vector<double> neg{-5, -4, -3, -2, -1, 0};
    CHECK_THROWS_AS(hill_estimate(neg, 3), DomainError);
}

TEST_CASE("threshold constant", "[tuning]") {
    std::vector<double> v{1.0, 2.0, 3.0, 6.0};
    // mean 3, |dev| = 2,1,0,3
    CHECK(threshold_constant(v, 2.0, 0.2) == Approx(0.2 * (4 + 1 + 0 + 9) / 4.0));
    CHECK(threshold_constant(v, 1.5, 1.0) ==
          Approx((std::pow(2.0, 1.5) + 1.0 + std::pow(3.0, 1.5)) / 4.0));
}

TEST_CASE("tail index is clamped to [c_b, 2]", "[tuning]") {
    TuningConfig cfg;
    CHECK(clamp_tail_index(0.7, cfg) == 1.1);
    CHECK(clamp_tail_index(1.6, cfg) == 1.6);
    CHECK(clamp_tail_index(3.4, cfg) == 2.0);
}

TEST_CASE("threshold follows c_tau n^(1/b)", "[tuning]") {
    std::vector<double> v;
    for (int i = 0; i < 100; ++i) v.push_back(1.0 + 0.5 * std::sin(0.77 * i) + (i % 13 == 0 ? 4.0 : 0.0));
    TuningConfig cfg;
    const auto rec = select_tuning(v, cfg);
    CHECK(rec.upsilon_hat == Approx(hill_estimate(v, 40)));
    CHECK(rec.b_hat == clamp_tail_index(rec.upsilon_hat, cfg));
    CHECK(rec.c_tau == Approx(threshold_constant(v, rec.b_hat, 0.2)));
    CHECK(rec.tau_n == Approx(rec.c_tau * std::pow(100.0, 1.0 / rec.b_hat)));
    CHECK(cfg.k_n(125) == 44);
}

TEST_CASE("tuning needs enough observations", "[tuning]") {
    TuningConfig cfg;
    std::vector<double> v;
    for (int i = 0; i < 16; ++i) v.push_back(1.0 + i);
    CHECK_THROWS_AS(select_tuning(v, cfg), InsufficientDataError);
    v.push_back(30.0);
    CHECK_NOTHROW(select_tuning(v, cfg));
}

TEST_CASE("tuning config validation", "[tuning]") {
    TuningConfig cfg;
    cfg.c_b = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg.c_b = 2.5;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = TuningConfig{};
    cfg.c_multiplier = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
}
