#pragma once

// Estimation of theta by least squares, Huber regression with the adaptive
// threshold, the one-step bias-adjusted Huber estimator, and Gaussian QMLE.
//
// All optimisation runs on data rescaled by s = mean |V_hat|: V_hat, RV and h
// are divided by s and returns by sqrt(s). The rescaled problem has the
// minimiser (omega_g / s, gamma, alpha_g / sqrt(s), beta_g) and Huber
// threshold tau / s, so results are mapped back exactly.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "argi/error.hpp"
#include "argi/garch_filter.hpp"
#include "argi/model.hpp"
#include "argi/optimize.hpp"
#include "argi/realized.hpp"
#include "argi/tail_tuning.hpp"

namespace argi {

enum class Method { OLS, Huber, AdjHuber, QMLE };

inline std::string_view method_name(Method m) {
    switch (m) {
    case Method::OLS: return "ols";
    case Method::Huber: return "huber";
    case Method::AdjHuber: return "adjhuber";
    case Method::QMLE: return "qmle";
    }
    return "?";
}

inline Method parse_method(std::string_view s) {
    if (s == "ols") return Method::OLS;
    if (s == "huber" || s == "hub") return Method::Huber;
    if (s == "adjhuber" || s == "adj") return Method::AdjHuber;
    if (s == "qmle") return Method::QMLE;
    throw ValidationError("unknown estimation method '" + std::string(s) + "'");
}

/// l_a(x) = x^2 for |x| < a, 2a|x| - a^2 otherwise.
inline double huber_loss(double x, double a) {
    const double ax = std::abs(x);
    return ax < a ? x * x : 2.0 * a * ax - a * a;
}

inline double huber_loss_derivative(double x, double a) {
    if (std::abs(x) < a) return 2.0 * x;
    return x > 0.0 ? 2.0 * a : -2.0 * a;
}

inline double huber_loss_second_derivative(double x, double a) { return std::abs(x) < a ? 2.0 : 0.0; }

struct FitOptions {
    std::optional<double> h1;         ///< default: mean positive V_hat
    std::optional<double> tau;        ///< fixed Huber threshold, skips tuning
    TuningConfig tuning{};
    MinimizeOptions minimizer{};
    double h_floor = kEstimationFloor;
};

struct FitResult {
    GarchParams theta_hat;
    Method method = Method::OLS;
    std::optional<TuningRecord> tuning;
    double objective_value = 0.0;
    int n_iterations = 0;
    bool converged = false;
    bool projected = false;  ///< bias adjustment left the space and was projected back
    Mat4 v2_hat = Mat4::Zero();
    double v1_hat = 0.0;
    std::size_t floor_events = 0;
    double h1 = 0.0;
    double tau = 0.0;  ///< Huber threshold actually used (0 for OLS/QMLE)
    std::vector<double> objective_trace;
};

namespace detail {

struct ScaledProblem {
    double scale = 1.0;
    std::vector<double> v, rv, ret;
    double h1 = 1.0;
    double floor = kEstimationFloor;
    double tau = 0.0;

    ScaledProblem(const DailySeries& data, double h1_orig, double floor_orig, double tau_orig) {
        double s = 0.0;
        for (double x : data.v_hat) s += std::abs(x);
        s /= static_cast<double>(data.v_hat.size());
        if (!(s > 0.0)) throw DegenerateError("V_hat is identically zero");
        scale = s;
        const double root = std::sqrt(s);
        v.reserve(data.n_days());
        for (double x : data.v_hat) v.push_back(x / s);
        for (double x : data.rv) rv.push_back(x / s);
        for (double x : data.returns) ret.push_back(x / root);
        h1 = h1_orig / s;
        floor = floor_orig / s;
        tau = tau_orig / s;
    }

    GarchParams to_scaled(const GarchParams& t) const {
        return {t.omega_g / scale, t.gamma, t.alpha_g / std::sqrt(scale), t.beta_g};
    }
    GarchParams to_original(const GarchParams& t) const {
        return {t.omega_g * scale, t.gamma, t.alpha_g * std::sqrt(scale), t.beta_g};
    }

    /// Mean loss and its theta-gradient in scaled units.
    double objective(Method method, const GarchParams& theta, Vec4* grad) const {
        const double inv_n = 1.0 / static_cast<double>(v.size());
        double f = 0.0;
        Vec4 g = Vec4::Zero();
        run_filter<false>(theta, rv, ret, h1, floor,
                          [&](std::size_t i, double h, const Vec4& dh, const Mat4&, bool) {
                              const double res = v[i] - h;
                              double dl_dh = 0.0;
                              switch (method) {
                              case Method::OLS:
                                  f += res * res;
                                  dl_dh = -2.0 * res;
                                  break;
                              case Method::Huber:
                              case Method::AdjHuber:
                                  f += huber_loss(res, tau);
                                  dl_dh = -huber_loss_derivative(res, tau);
                                  break;
                              case Method::QMLE:
                                  f += v[i] / h + std::log(h);
                                  dl_dh = -v[i] / (h * h) + 1.0 / h;
                                  break;
                              }
                              if (grad) g += dl_dh * dh;
                          });
        if (grad) *grad = g * inv_n;
        return f * inv_n;
    }
};

inline std::vector<GarchParams> start_points(const ScaledProblem& prob, const ParamSpace& space_scaled) {
    double vbar = 0.0;
    for (double x : prob.v) vbar += x;
    vbar /= static_cast<double>(prob.v.size());
    vbar = std::max(vbar, 1e-3);
    struct Seed { double gamma, beta, alpha; };
    constexpr std::array<Seed, 5> seeds{{{0.3, 0.3, 0.0}, {0.1, 0.1, 0.05}, {0.6, 0.2, 0.05}, {0.2, 0.6, 0.05}, {0.45, 0.45, 0.1}}};
    std::vector<GarchParams> starts;
    for (const auto& s : seeds) {
        GarchParams t{0.5 * vbar * (1.0 - s.gamma - s.beta), s.gamma, s.alpha, s.beta};
        Vec4 v = t.vec();
        for (std::size_t i = 0; i < 4; ++i)
            if (space_scaled.fixed[i]) v[static_cast<Eigen::Index>(i)] = *space_scaled.fixed[i];
        starts.push_back(GarchParams::from(v));
    }
    return starts;
}

inline ParamSpace scale_space(const ParamSpace& space, double scale) {
    ParamSpace s = space;
    const double root = std::sqrt(scale);
    s.lower[0] /= scale;
    s.upper[0] /= scale;
    s.lower[2] /= root;
    s.upper[2] /= root;
    if (s.fixed[0]) *s.fixed[0] /= scale;
    if (s.fixed[2]) *s.fixed[2] /= root;
    return s;
}

/// Euclidean projection onto box intersected with gamma + beta_g <= budget.
inline GarchParams project(const GarchParams& theta, const ParamSpace& space, bool& moved) {
    Vec4 v = theta.vec();
    const Vec4 orig = v;
    for (int pass = 0; pass < 3; ++pass) {
        for (std::size_t i = 0; i < 4; ++i) {
            auto k = static_cast<Eigen::Index>(i);
            if (space.fixed[i])
                v[k] = *space.fixed[i];
            else
                v[k] = std::clamp(v[k], space.lower[k], space.upper[k]);
        }
        const double excess = v[1] + v[3] - space.budget();
        if (excess <= 0.0) break;
        const bool g_free = !space.fixed[1], b_free = !space.fixed[3];
        if (g_free && b_free) {
            v[1] -= 0.5 * excess;
            v[3] -= 0.5 * excess;
        } else if (g_free) {
            v[1] -= excess;
        } else if (b_free) {
            v[3] -= excess;
        }
    }
    moved = (v - orig).cwiseAbs().maxCoeff() > 0.0;
    return GarchParams::from(v);
}

inline Mat4 outer_gradient_mean(const GarchParams& theta, const DailySeries& data, double h1, double floor) {
    Mat4 v2 = Mat4::Zero();
    detail::run_filter<false>(theta, data.rv, data.returns, h1, floor,
                              [&v2](std::size_t, double, const Vec4& g, const Mat4&, bool) { v2 += g * g.transpose(); });
    return v2 / static_cast<double>(data.n_days());
}

} // namespace detail

/// Mean loss (1/n) sum loss(V_i - h_i) and its gradient in theta, original units.
inline double objective_value(Method method, const GarchParams& theta, const DailySeries& data, double h1,
                              double tau, Vec4* grad = nullptr, double floor = kEstimationFloor) {
    const double inv_n = 1.0 / static_cast<double>(data.n_days());
    double f = 0.0;
    Vec4 g = Vec4::Zero();
    detail::run_filter<false>(theta, data.rv, data.returns, h1, floor,
                              [&](std::size_t i, double h, const Vec4& dh, const Mat4&, bool) {
                                  const double v = data.v_hat[i];
                                  const double res = v - h;
                                  double dl_dh = 0.0;
                                  switch (method) {
                                  case Method::OLS: f += res * res; dl_dh = -2.0 * res; break;
                                  case Method::Huber:
                                  case Method::AdjHuber:
                                      f += huber_loss(res, tau);
                                      dl_dh = -huber_loss_derivative(res, tau);
                                      break;
                                  case Method::QMLE: f += v / h + std::log(h); dl_dh = -v / (h * h) + 1.0 / h; break;
                                  }
                                  g += dl_dh * dh;
                              });
    if (grad) *grad = g * inv_n;
    return f * inv_n;
}

inline FitResult bias_adjust(const FitResult& fit, const DailySeries& data, const ParamSpace& space);

inline FitResult fit(Method method, const DailySeries& data, const ParamSpace& space, const FitOptions& opts = {}) {
    data.validate();
    space.validate();
    if (data.n_days() < 10) throw InsufficientDataError("estimation needs at least 10 days");
    {
        const auto [lo, hi] = std::minmax_element(data.v_hat.begin(), data.v_hat.end());
        if (*lo == *hi) throw EstimationError("V_hat is constant; theta is not identified");
    }

    const double h1 = opts.h1 ? *opts.h1 : default_h1(data.v_hat);
    std::optional<TuningRecord> tuning;
    double tau = 0.0;
    const bool huber_family = method == Method::Huber || method == Method::AdjHuber;
    if (huber_family) {
        if (opts.tau) {
            tau = *opts.tau;
            if (!(tau > 0.0)) throw ValidationError("Huber threshold must be > 0");
        } else {
            tuning = select_tuning(data.v_hat, opts.tuning);
            tau = tuning->tau_n;
        }
    }

    const detail::ScaledProblem prob(data, h1, opts.h_floor, tau);
    const ParamSpace sspace = detail::scale_space(space, prob.scale);
    const ThetaTransform transform(sspace);
    const Method loss = method == Method::AdjHuber ? Method::Huber : method;

    Objective fn = [&](const VecX& z, VecX& grad_z) {
        MatX jac;
        const GarchParams theta = transform.to_theta(z, &jac);
        Vec4 g;
        const double f = prob.objective(loss, theta, &g);
        grad_z = jac.transpose() * g;
        return f;
    };

    MinimizeResult best;
    for (const auto& start : detail::start_points(prob, sspace)) {
        auto res = minimize_bfgs(fn, transform.to_z(start), opts.minimizer);
        if (std::isfinite(res.f) && (!std::isfinite(best.f) || res.f < best.f)) best = std::move(res);
    }
    if (!std::isfinite(best.f)) throw EstimationError("objective is not finite at any start point");

    FitResult out;
    out.method = huber_family ? Method::Huber : method;
    out.theta_hat = prob.to_original(transform.to_theta(best.x));
    out.tuning = tuning;
    out.h1 = h1;
    out.tau = tau;
    out.n_iterations = best.iterations;
    out.converged = best.converged;
    out.objective_trace = best.trace;
    out.objective_value = objective_value(loss, out.theta_hat, data, h1, tau, nullptr, opts.h_floor);
    out.v2_hat = detail::outer_gradient_mean(out.theta_hat, data, h1, opts.h_floor);
    out.floor_events = filter_path(out.theta_hat, data, h1, opts.h_floor).floor_events;
    if (huber_family) {
        const double n = static_cast<double>(data.n_days());
        const double b = tuning ? tuning->b_hat : 2.0;
        double acc = 0.0;
        const auto path = filter_path(out.theta_hat, data, h1, opts.h_floor);
        for (std::size_t i = 0; i < data.n_days(); ++i) {
            const double r = data.v_hat[i] - path.states[i].h;
            acc += std::min(r * r, tau * tau);
        }
        out.v1_hat = std::pow(n, (b - 2.0) / b) * acc / n;
    }
    if (method == Method::AdjHuber) return bias_adjust(out, data, space);
    return out;
}

/// theta_adj = theta + [sum dh dh^T]^{-1} sum dh (V_hat - h), at the Huber estimate.
inline FitResult bias_adjust(const FitResult& fit, const DailySeries& data, const ParamSpace& space) {
    if (fit.method != Method::Huber) throw EstimationError("bias adjustment applies to a Huber fit");
    if (!fit.converged) throw EstimationError("bias adjustment needs a converged Huber fit");

    const detail::ScaledProblem prob(data, fit.h1, kEstimationFloor, fit.tau);
    const GarchParams theta_s = prob.to_scaled(fit.theta_hat);
    const ThetaTransform transform(space);
    const auto& free = transform.free_indices();
    const auto k = static_cast<Eigen::Index>(free.size());

    MatX gram = MatX::Zero(k, k);
    VecX score = VecX::Zero(k);
    detail::run_filter<false>(theta_s, prob.rv, prob.ret, prob.h1, prob.floor,
                              [&](std::size_t i, double h, const Vec4& dh, const Mat4&, bool) {
                                  VecX g(k);
                                  for (Eigen::Index j = 0; j < k; ++j) g[j] = dh[static_cast<Eigen::Index>(free[static_cast<std::size_t>(j)])];
                                  gram += g * g.transpose();
                                  score += g * (prob.v[i] - h);
                              });

    Eigen::SelfAdjointEigenSolver<MatX> eig(gram);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (!(lo > 0.0) || hi / lo > 1e12) throw EstimationError("bias adjustment: gradient Gram matrix is singular");

    const VecX step = gram.ldlt().solve(score);
    Vec4 adjusted = theta_s.vec();
    for (Eigen::Index j = 0; j < k; ++j) adjusted[static_cast<Eigen::Index>(free[static_cast<std::size_t>(j)])] += step[j];

    FitResult out = fit;
    out.method = Method::AdjHuber;
    bool moved = false;
    out.theta_hat = detail::project(prob.to_original(GarchParams::from(adjusted)), space, moved);
    out.projected = moved;
    out.objective_value = objective_value(Method::Huber, out.theta_hat, data, fit.h1, fit.tau);
    out.v2_hat = detail::outer_gradient_mean(out.theta_hat, data, fit.h1, kEstimationFloor);
    out.floor_events = filter_path(out.theta_hat, data, fit.h1).floor_events;
    out.objective_trace.clear();
    return out;
}

} // namespace argi
