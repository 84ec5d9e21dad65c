#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "argi/model.hpp"

using namespace argi;
using Catch::Approx;

namespace {

StructuralParams smoke_point() {
    StructuralParams p;
    p.omega1 = 1.0;
    p.omega2 = 1.0;
    p.gamma = 0.5;
    p.alpha = 0.1;
    p.beta = 0.5;
    p.mu = 0.0;
    p.jump.intensity_lambda = 0.0;
    return p;
}

} // namespace

TEST_CASE("rho terms match high-precision values", "[model]") {
    struct Row { double beta, r1, r2, r3; };
    // mpmath, 40 digits (tests/oracles/oracles.py)
    const Row rows[] = {
        {1e-7, 1.0000000500000016667, 0.50000001666666708333, 0.16666667083333341667},
        {1e-3, 1.0005001667083416681, 0.50016670834166805575, 0.16670834166805575399},
        {0.5, 1.2974425414002562937, 0.59488508280051258739, 0.18977016560102517479},
        {2.5, 4.4729975842813893752, 1.3891990337125557501, 0.35567961348502230004},
    };
    for (const auto& r : rows) {
        const auto t = rho_terms(r.beta);
        CHECK(t.rho1 == Approx(r.r1).epsilon(1e-14));
        CHECK(t.rho2 == Approx(r.r2).epsilon(1e-14));
        CHECK(t.rho3 == Approx(r.r3).epsilon(1e-13));
    }
}

TEST_CASE("rho terms tend to 1, 1/2, 1/6 as beta shrinks", "[model]") {
    const auto t = rho_terms(1e-12);
    CHECK(t.rho1 == Approx(1.0).epsilon(1e-12));
    CHECK(t.rho2 == Approx(0.5).epsilon(1e-12));
    CHECK(t.rho3 == Approx(1.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("rho terms are ordered and positive", "[model][property]") {
    for (double b = 1e-6; b < 20.0; b *= 1.7) {
        const auto t = rho_terms(b);
        CHECK(t.rho1 > t.rho2);
        CHECK(t.rho2 > t.rho3);
        CHECK(t.rho3 > 0.0);
    }
}

TEST_CASE("rho terms are continuous across the series switch", "[model]") {
    const auto below = rho_terms(std::nextafter(1.0, 0.0));
    const auto at = rho_terms(1.0);
    CHECK(below.rho1 == Approx(at.rho1).epsilon(1e-14));
    CHECK(below.rho2 == Approx(at.rho2).epsilon(1e-14));
    CHECK(below.rho3 == Approx(at.rho3).epsilon(1e-13));
}

TEST_CASE("rho terms reject beta <= 0", "[model]") {
    CHECK_THROWS_AS(rho_terms(0.0), DomainError);
    CHECK_THROWS_AS(rho_terms(-1.0), DomainError);
}

TEST_CASE("jump second moment", "[model]") {
    JumpLaw law;
    CHECK(law.second_moment() == Approx(0.0072).epsilon(1e-14));
    CHECK(law.intensity_lambda * law.second_moment() == Approx(0.144).epsilon(1e-14));
}

TEST_CASE("parameter map at the simulation design point", "[model]") {
    const auto th = structural_to_garch(StructuralParams{});
    CHECK(th.omega_g == Approx(0.94119465997002487582).epsilon(1e-13));
    CHECK(th.gamma == 0.2474);
    CHECK(th.alpha_g == Approx(0.27746995417394165841).epsilon(1e-13));
    CHECK(th.beta_g == Approx(0.20530820627321614655).epsilon(1e-13));
    CHECK(std::abs(th.omega_g - 0.9412) < 1e-3);
    CHECK(std::abs(th.alpha_g - 0.2774) < 1e-3);
    CHECK(std::abs(th.beta_g - 0.2053) < 1e-3);
}

TEST_CASE("parameter map at the smoke point", "[model]") {
    const auto th = structural_to_garch(smoke_point());
    CHECK(th.omega_g == Approx(-0.64872127070012814685).epsilon(1e-13));
    CHECK(th.gamma == 0.5);
    CHECK(th.alpha_g == Approx(0.089232762420076888109).epsilon(1e-13));
    CHECK(th.beta_g == Approx(0.44616381210038444055).epsilon(1e-13));
}

TEST_CASE("parameter map scales omega by s and alpha by sqrt(s) without drift or jumps", "[model][property]") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.05, 0.9);
    for (int i = 0; i < 50; ++i) {
        StructuralParams p;
        p.mu = 0.0;
        p.jump.intensity_lambda = 0.0;
        p.omega1 = 5.0 * u(rng);
        p.omega2 = u(rng);
        p.gamma = u(rng);
        p.alpha = u(rng);
        p.beta = u(rng);
        const double s = 0.1 + 3.0 * u(rng);
        StructuralParams q = p;
        q.omega1 *= s;
        q.omega2 *= s;
        q.alpha *= std::sqrt(s);
        const auto a = structural_to_garch(p);
        const auto b = structural_to_garch(q);
        CHECK(b.omega_g == Approx(s * a.omega_g).epsilon(1e-12).margin(1e-14));
        CHECK(b.alpha_g == Approx(std::sqrt(s) * a.alpha_g).epsilon(1e-12));
        CHECK(b.gamma == a.gamma);
        CHECK(b.beta_g == a.beta_g);
    }
}

TEST_CASE("parameter map validates its input", "[model]") {
    auto p = smoke_point();
    p.beta = 0.0;
    CHECK_THROWS_AS(structural_to_garch(p), ValidationError);
    p = smoke_point();
    p.gamma = 1.0;
    CHECK_THROWS_AS(structural_to_garch(p), ValidationError);
    p = smoke_point();
    p.jump.df = 4.0;
    CHECK_THROWS_AS(structural_to_garch(p), ValidationError);
}

TEST_CASE("unconditional level", "[model]") {
    CHECK(unconditional_h({0.5, 0.5, 0.0, 0.0}) == Approx(1.0));
    CHECK(unconditional_h({0.9412, 0.2474, 0.2774, 0.2053}) == Approx(0.9412 / 0.5473).epsilon(1e-12));
    CHECK(unconditional_h({0.9412, 0.2474, 0.2774, 0.2053}) == Approx(1.7197).epsilon(1e-4));
    CHECK_THROWS_AS(unconditional_h({1.0, 0.6, 0.0, 0.4}), DomainError);
    CHECK_THROWS_AS(unconditional_h({1.0, 0.7, 0.0, 0.4}), DomainError);
}

TEST_CASE("mapped parameters lie in a box configured around them", "[model][property]") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.01, 0.6);
    int checked = 0;
    for (int i = 0; i < 200; ++i) {
        StructuralParams p;
        p.gamma = u(rng);
        p.beta = u(rng);
        p.alpha = u(rng);
        p.omega1 = 4.0 * u(rng);
        const auto th = structural_to_garch(p);
        if (!(th.gamma + th.beta_g < 1.0) || th.omega_g <= 0.0) continue;
        ParamSpace space;
        space.stationarity_margin = std::min(1e-4, 0.5 * (1.0 - th.gamma - th.beta_g));
        CHECK(space.contains(th));
        ++checked;
    }
    CHECK(checked > 50);
}

TEST_CASE("parameter space validation and membership", "[model]") {
    ParamSpace s;
    CHECK_NOTHROW(s.validate());
    CHECK(s.contains({1.0, 0.5, 0.1, 0.4}));
    CHECK_FALSE(s.contains({1.0, 0.6, 0.1, 0.4}));
    CHECK_FALSE(s.contains({11.0, 0.1, 0.1, 0.1}));
    auto r = ParamSpace::rgi();
    CHECK(r.free_count() == 3);
    CHECK_FALSE(r.contains({1.0, 0.5, 0.1, 0.4}));
    CHECK(r.contains({1.0, 0.5, 0.0, 0.4}));
    s.lower[1] = 0.6;
    s.lower[3] = 0.6;
    CHECK_THROWS_AS(s.validate(), ValidationError);
}
