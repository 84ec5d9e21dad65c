#include <catch_amalgamated.hpp>

#include <cmath>

#include "argi/rng.hpp"
#include "argi/simulator.hpp"

using namespace argi;
using Catch::Approx;

namespace {

SimConfig deterministic_config() {
    SimConfig c;
    c.n_days = 2;
    c.m_all = 1000;
    c.m_obs = 10;
    c.seed = 1;
    auto& p = c.params;
    p.nu = 0.0;
    p.alpha = 0.0;
    p.jump.intensity_lambda = 0.0;
    p.noise_sd = 0.0;
    p.omega1 = 0.0;
    p.omega2 = 0.0;
    p.gamma = 0.0;
    p.beta = 0.0;
    p.sigma0_sq = 1.0;
    p.mu = 0.0;
    return c;
}

} // namespace

TEST_CASE("deterministic corner: spot variance decays linearly within the day", "[simulator]") {
    auto cfg = deterministic_config();
    cfg.keep_spot_trace = true;
    const auto out = simulate(cfg);
    CHECK(out.true_iv[0] == Approx(0.5).epsilon(1e-12));
    for (std::size_t k = 0; k <= cfg.m_all; k += 100)
        CHECK(out.spot_var_path[k] == Approx(std::max(1.0 - static_cast<double>(k) / 1000.0, kSpotVarianceFloor)).margin(1e-12));
    CHECK(out.true_jv[0] == 0.0);
}

TEST_CASE("no jumps means zero jump variation", "[simulator]") {
    SimConfig cfg;
    cfg.n_days = 5;
    cfg.m_all = 780;
    cfg.m_obs = 78;
    cfg.seed = 3;
    cfg.params.jump.intensity_lambda = 0.0;
    cfg.params.noise_sd = 0.0;
    const auto out = simulate(cfg);
    for (double jv : out.true_jv) CHECK(jv == 0.0);
}

TEST_CASE("simulated series shape and tick grid", "[simulator]") {
    SimConfig cfg;
    cfg.n_days = 4;
    cfg.m_all = 2340;
    cfg.m_obs = 390;
    cfg.seed = 5;
    const auto out = simulate(cfg);
    REQUIRE(out.ticks.n_days() == 4);
    REQUIRE(out.ticks.opens.size() == 5);
    CHECK_NOTHROW(out.ticks.validate());
    for (std::size_t d = 0; d < 4; ++d) {
        const auto& day = out.ticks.days[d];
        CHECK(day.size() == cfg.m_obs);
        CHECK(day.times.front() == static_cast<double>(d));
        CHECK(day.prices.front() == out.ticks.opens[d]);
        CHECK(out.true_x[d] == out.ticks.opens[d + 1]);
        CHECK(out.true_iv[d] >= 0.0);
        CHECK(out.true_jv[d] >= 0.0);
    }
    CHECK(std::isfinite(out.true_h_next));
}

TEST_CASE("equal seeds give identical paths, different seeds differ", "[simulator][property]") {
    SimConfig cfg;
    cfg.n_days = 3;
    cfg.m_all = 1170;
    cfg.m_obs = 390;
    cfg.seed = 42;
    const auto a = simulate(cfg);
    const auto b = simulate(cfg);
    CHECK(a.ticks.days[2].prices == b.ticks.days[2].prices);
    CHECK(a.true_iv == b.true_iv);
    CHECK(a.true_h_next == b.true_h_next);
    cfg.seed = 43;
    const auto c = simulate(cfg);
    CHECK(a.ticks.days[2].prices != c.ticks.days[2].prices);
}

TEST_CASE("Riemann sum of the spot path matches the trapezoid integral", "[simulator][property]") {
    SimConfig cfg;
    cfg.n_days = 3;
    cfg.m_all = 4680;
    cfg.m_obs = 390;
    cfg.seed = 9;
    cfg.keep_spot_trace = true;
    cfg.params.jump.intensity_lambda = 0.0;
    cfg.params.noise_sd = 0.0;
    const auto out = simulate(cfg);
    const double dt = 1.0 / static_cast<double>(cfg.m_all);
    for (std::size_t d = 0; d < cfg.n_days; ++d) {
        double left = 0.0;
        for (std::size_t k = 0; k < cfg.m_all; ++k) left += out.spot_var_path[d * (cfg.m_all + 1) + k] * dt;
        CHECK(left == Approx(out.true_iv[d]).epsilon(5e-3));
    }
}

TEST_CASE("true_h_path recursion", "[simulator]") {
    SECTION("gamma = 0 collapses to a one-step map") {
        const std::vector<double> iv{0.5, 1.5, 0.7};
        const std::vector<double> r{0.1, -0.2, 0.3};
        const GarchParams th{0.2, 0.0, 0.3, 0.4};
        const auto h = true_h_path(iv, r, th);
        REQUIRE(h.size() == 3);
        for (std::size_t d = 0; d < 3; ++d) CHECK(h[d] == Approx(0.2 + 0.4 * iv[d] - 0.3 * r[d]));
    }
    SECTION("theta = (1,0,0,0) is constant") {
        const auto h = true_h_path({1.0, 2.0}, {0.5, -0.5}, {1.0, 0.0, 0.0, 0.0});
        CHECK(h[0] == 1.0);
        CHECK(h[1] == 1.0);
    }
    SECTION("three-day hand unroll") {
        const GarchParams th{0.3, 0.4, 0.2, 0.25};
        const std::vector<double> iv{1.1, 0.6, 2.0};
        const std::vector<double> r{0.05, -0.3, 0.12};
        const double h1 = 0.3 / (1.0 - 0.4 - 0.25);
        const double h2 = 0.3 + 0.4 * h1 + 0.25 * 1.1 - 0.2 * 0.05;
        const double h3 = 0.3 + 0.4 * h2 + 0.25 * 0.6 + 0.2 * 0.3;
        const double h4 = 0.3 + 0.4 * h3 + 0.25 * 2.0 - 0.2 * 0.12;
        const auto h = true_h_path(iv, r, th);
        CHECK(h[0] == Approx(h2).epsilon(1e-15));
        CHECK(h[1] == Approx(h3).epsilon(1e-15));
        CHECK(h[2] == Approx(h4).epsilon(1e-15));
    }
}

TEST_CASE("simulation config validation", "[simulator]") {
    SimConfig cfg;
    cfg.m_obs = 7;
    CHECK_THROWS_AS(simulate(cfg), ValidationError);
    cfg = SimConfig{};
    cfg.n_days = 1;
    CHECK_THROWS_AS(simulate(cfg), ValidationError);
}

TEST_CASE("clamp events are rare under the design parameters", "[simulator][statistical]") {
    int clean = 0;
    const int seeds = 40;
    for (int s = 0; s < seeds; ++s) {
        SimConfig cfg;
        cfg.n_days = 5;
        cfg.m_all = 1000;
        cfg.m_obs = 100;
        cfg.seed = derive_seed(2024, static_cast<std::uint64_t>(s));
        clean += simulate(cfg).clamp_events == 0 ? 1 : 0;
    }
    CHECK(clean >= static_cast<int>(0.95 * seeds));
}

TEST_CASE("mean spot variance after one day matches its stationary value", "[simulator][statistical]") {
    const int reps = 200;
    std::vector<double> s1;
    for (int r = 0; r < reps; ++r) {
        SimConfig cfg;
        cfg.n_days = 2;
        cfg.m_all = 1000;
        cfg.m_obs = 100;
        cfg.seed = derive_seed(77, static_cast<std::uint64_t>(r));
        cfg.keep_spot_trace = true;
        const auto out = simulate(cfg);
        s1.push_back(out.spot_var_path[cfg.m_all + 1]);
    }
    double mean = 0.0;
    for (double v : s1) mean += v;
    mean /= reps;
    double var = 0.0;
    for (double v : s1) var += (v - mean) * (v - mean);
    const double se = std::sqrt(var / (reps - 1) / reps);
    INFO("mean " << mean << " se " << se);
    CHECK(std::abs(mean - 1.7462) < 3.0 * se);
}
