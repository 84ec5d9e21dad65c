#include <catch_amalgamated.hpp>

#include <random>

#include "argi/estimators.hpp"
#include "support.hpp"

using namespace argi;
using Catch::Approx;

namespace {

const GarchParams kTheta{0.3, 0.35, 0.1, 0.3};

} // namespace

TEST_CASE("Huber loss", "[estimators]") {
    CHECK(huber_loss(0.5, 1.0) == 0.25);
    CHECK(huber_loss(-3.0, 1.0) == Approx(2 * 3.0 - 1.0));
    CHECK(huber_loss(1.0, 1.0) == Approx(1.0));
    CHECK(huber_loss_derivative(-3.0, 1.0) == -2.0);
    CHECK(huber_loss_derivative(0.25, 1.0) == 0.5);
    CHECK(huber_loss_second_derivative(2.0, 1.0) == 0.0);
}

TEST_CASE("Huber loss is continuous and agrees with squared loss below the threshold", "[estimators][property]") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-5, 5), a(0.1, 3);
    for (int i = 0; i < 1000; ++i) {
        const double x = u(rng), t = a(rng);
        if (std::abs(x) < t) CHECK(huber_loss(x, t) == x * x);
        CHECK(huber_loss(x, t) <= x * x + 1e-12);
        CHECK(huber_loss(x, t) >= 0.0);
        CHECK(huber_loss(-x, t) == huber_loss(x, t));
    }
    CHECK(huber_loss(std::nextafter(2.0, 0.0), 2.0) == Approx(huber_loss(2.0, 2.0)));
}

TEST_CASE("method names", "[estimators]") {
    for (auto m : {Method::OLS, Method::Huber, Method::AdjHuber, Method::QMLE})
        CHECK(parse_method(method_name(m)) == m);
    CHECK_THROWS_AS(parse_method("lasso"), ValidationError);
}

TEST_CASE("objective gradients match finite differences", "[estimators][property]") {
    const auto data = testing::garch_series(kTheta, 200, 12, 0.3, 3.0);
    const GarchParams at{0.35, 0.3, 0.12, 0.28};
    for (auto m : {Method::OLS, Method::Huber, Method::QMLE}) {
        Vec4 g;
        objective_value(m, at, data, 1.0, 0.8, &g);
        for (Eigen::Index j = 0; j < 4; ++j) {
            Vec4 up = at.vec(), dn = at.vec();
            up[j] += 1e-6;
            dn[j] -= 1e-6;
            const double fd = (objective_value(m, GarchParams::from(up), data, 1.0, 0.8) -
                               objective_value(m, GarchParams::from(dn), data, 1.0, 0.8)) / 2e-6;
            INFO("method " << method_name(m) << " coordinate " << j);
            CHECK(g[j] == Approx(fd).epsilon(1e-5).margin(1e-7));
        }
    }
}

TEST_CASE("OLS and QMLE recover the parameters on a long sample", "[estimators][statistical]") {
    const auto data = testing::garch_series(kTheta, 4000, 21);
    for (auto m : {Method::OLS, Method::QMLE}) {
        FitOptions opts;
        opts.h1 = unconditional_h(kTheta);
        const auto fit_result = fit(m, data, ParamSpace::argi(), opts);
        INFO(method_name(m));
        CHECK(fit_result.converged);
        CHECK(fit_result.theta_hat.omega_g == Approx(kTheta.omega_g).margin(0.1));
        CHECK(fit_result.theta_hat.gamma == Approx(kTheta.gamma).margin(0.1));
        CHECK(fit_result.theta_hat.alpha_g == Approx(kTheta.alpha_g).margin(0.05));
        CHECK(fit_result.theta_hat.beta_g == Approx(kTheta.beta_g).margin(0.1));
        CHECK(ParamSpace::argi().contains(fit_result.theta_hat, 1e-12));
    }
}

TEST_CASE("fit is invariant to rescaling the data", "[estimators][property]") {
    auto data = testing::garch_series(kTheta, 300, 31, 0.2);
    const double s = 40.0;
    auto scaled = data;
    for (auto& v : scaled.v_hat) v *= s;
    for (auto& v : scaled.rv) v *= s;
    for (auto& v : scaled.returns) v *= std::sqrt(s);
    ParamSpace space;
    space.upper[0] = 1000.0;
    space.upper[2] = 100.0;
    const auto a = fit(Method::OLS, data, space);
    const auto b = fit(Method::OLS, scaled, space);
    CHECK(b.theta_hat.omega_g == Approx(s * a.theta_hat.omega_g).epsilon(1e-4));
    CHECK(b.theta_hat.gamma == Approx(a.theta_hat.gamma).margin(1e-5));
    CHECK(b.theta_hat.alpha_g == Approx(std::sqrt(s) * a.theta_hat.alpha_g).margin(1e-4));
    CHECK(b.theta_hat.beta_g == Approx(a.theta_hat.beta_g).margin(1e-5));
}

TEST_CASE("fitted objective is no worse than the truth", "[estimators][property]") {
    const auto data = testing::garch_series(kTheta, 250, 41, 0.3, 3.0);
    FitOptions opts;
    opts.h1 = 1.0;
    for (auto m : {Method::OLS, Method::Huber, Method::QMLE}) {
        const auto r = fit(m, data, ParamSpace::argi(), opts);
        CHECK(r.objective_value <= objective_value(m, kTheta, data, 1.0, r.tau) + 1e-10);
    }
}

TEST_CASE("Huber fit records its tuning", "[estimators]") {
    const auto data = testing::garch_series(kTheta, 250, 51, 0.3, 3.0);
    const auto r = fit(Method::Huber, data, ParamSpace::argi());
    REQUIRE(r.tuning);
    CHECK(r.tau == r.tuning->tau_n);
    CHECK(r.tuning->b_hat >= 1.1);
    CHECK(r.tuning->b_hat <= 2.0);
    CHECK(r.v1_hat > 0.0);
    FitOptions fixed;
    fixed.tau = 0.5;
    const auto f = fit(Method::Huber, data, ParamSpace::argi(), fixed);
    CHECK_FALSE(f.tuning);
    CHECK(f.tau == 0.5);
}

TEST_CASE("RGI fits keep alpha at zero", "[estimators]") {
    const auto data = testing::garch_series(kTheta, 250, 61, 0.2);
    for (auto m : {Method::OLS, Method::Huber, Method::AdjHuber, Method::QMLE}) {
        const auto r = fit(m, data, ParamSpace::rgi());
        CHECK(r.theta_hat.alpha_g == 0.0);
    }
}

TEST_CASE("bias adjustment", "[estimators]") {
    const auto data = testing::garch_series(kTheta, 400, 71, 0.3, 3.0);
    const auto hub = fit(Method::Huber, data, ParamSpace::argi());
    const auto adj = bias_adjust(hub, data, ParamSpace::argi());
    CHECK(adj.method == Method::AdjHuber);
    CHECK(ParamSpace::argi().contains(adj.theta_hat, 1e-12));

    SECTION("matches fit(AdjHuber)") {
        const auto direct = fit(Method::AdjHuber, data, ParamSpace::argi());
        for (std::size_t k = 0; k < 4; ++k) CHECK(direct.theta_hat[k] == Approx(adj.theta_hat[k]).epsilon(1e-10));
    }
    SECTION("the step is a Gauss-Newton step on squared loss") {
        // At an OLS optimum the squared-loss score vanishes, so the step is ~0.
        FitResult ols = fit(Method::OLS, data, ParamSpace::argi());
        ols.method = Method::Huber;
        const auto again = bias_adjust(ols, data, ParamSpace::argi());
        for (std::size_t k = 0; k < 4; ++k) CHECK(again.theta_hat[k] == Approx(ols.theta_hat[k]).margin(2e-3));
    }
    SECTION("rejects a non-Huber fit") {
        auto bad = hub;
        bad.method = Method::OLS;
        CHECK_THROWS_AS(bias_adjust(bad, data, ParamSpace::argi()), EstimationError);
    }
}

TEST_CASE("projection onto the parameter space", "[estimators]") {
    bool moved = false;
    const auto space = ParamSpace::argi();
    const auto p = detail::project({20.0, 0.8, -0.1, 0.7}, space, moved);
    CHECK(moved);
    CHECK(space.contains(p, 1e-12));
    const auto q = detail::project({1.0, 0.3, 0.1, 0.3}, space, moved);
    CHECK_FALSE(moved);
    CHECK(q.omega_g == 1.0);
}

TEST_CASE("estimation input checks", "[estimators]") {
    auto data = testing::garch_series(kTheta, 9, 1);
    CHECK_THROWS_AS(fit(Method::OLS, data, ParamSpace::argi()), InsufficientDataError);
    data = testing::garch_series(kTheta, 30, 1);
    for (auto& v : data.v_hat) v = 1.0;
    CHECK_THROWS_AS(fit(Method::OLS, data, ParamSpace::argi()), EstimationError);
    data = testing::garch_series(kTheta, 30, 1);
    data.rv.pop_back();
    CHECK_THROWS_AS(fit(Method::OLS, data, ParamSpace::argi()), ValidationError);
}
