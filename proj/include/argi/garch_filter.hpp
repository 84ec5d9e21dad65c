#pragma once

// Conditional variance filter
//   h_i = omega_g + gamma h_{i-1} + beta_g RV_{i-1} - alpha_g r_{i-1},  i = 2..n,
// with h_1 fixed, together with exact first and second derivatives in theta.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "argi/error.hpp"
#include "argi/model.hpp"
#include "argi/realized.hpp"

namespace argi {

inline constexpr double kEstimationFloor = 1e-10;
inline constexpr double kForecastFloor = 1e-5;

struct FilterState {
    double h = 0.0;
    Vec4 grad = Vec4::Zero();
    Mat4 hess = Mat4::Zero();
    bool floored = false;
};

struct FilterPath {
    std::vector<FilterState> states;  ///< i = 1..n
    std::size_t floor_events = 0;
};

namespace detail {

/// Runs the recursion and calls visit(i, h, grad, hess, floored) for i = 0..n-1.
/// The Hessian is only propagated when WithHessian is set.
template <bool WithHessian, typename Visit>
std::size_t run_filter(const GarchParams& theta, std::span<const double> rv, std::span<const double> ret,
                       double h1, double floor, Visit&& visit) {
    if (!(h1 > 0.0)) throw DomainError("filter needs h1 > 0, got " + std::to_string(h1));
    if (rv.size() != ret.size()) throw ValidationError("filter inputs have different lengths");
    double h = h1;
    Vec4 grad = Vec4::Zero();
    Mat4 hess = Mat4::Zero();
    std::size_t floor_events = 0;
    visit(std::size_t{0}, h, grad, hess, false);
    for (std::size_t i = 1; i < rv.size(); ++i) {
        const double prev_h = h;
        const Vec4 prev_grad = grad;
        h = theta.omega_g + theta.gamma * prev_h + theta.beta_g * rv[i - 1] - theta.alpha_g * ret[i - 1];
        bool floored = false;
        if (h < floor) {
            h = floor;
            floored = true;
            ++floor_events;
            grad.setZero();
            if constexpr (WithHessian) hess.setZero();
        } else {
            if constexpr (WithHessian) {
                hess *= theta.gamma;
                hess.row(1) += prev_grad.transpose();
                hess.col(1) += prev_grad;
            }
            grad *= theta.gamma;
            grad[0] += 1.0;
            grad[1] += prev_h;
            grad[2] -= ret[i - 1];
            grad[3] += rv[i - 1];
        }
        visit(i, h, grad, hess, floored);
    }
    return floor_events;
}

} // namespace detail

inline FilterPath filter_path(const GarchParams& theta, std::span<const double> rv, std::span<const double> ret,
                              double h1, double floor = kEstimationFloor) {
    if (rv.size() < 2) throw InsufficientDataError("filter needs at least 2 days");
    FilterPath path;
    path.states.resize(rv.size());
    path.floor_events = detail::run_filter<true>(
        theta, rv, ret, h1, floor,
        [&path](std::size_t i, double h, const Vec4& g, const Mat4& H, bool floored) {
            path.states[i] = FilterState{h, g, H, floored};
        });
    return path;
}

inline FilterPath filter_path(const GarchParams& theta, const DailySeries& data, double h1,
                              double floor = kEstimationFloor) {
    return filter_path(theta, data.rv, data.returns, h1, floor);
}

/// h_{n+1}: one step past the sample, floored at the published-forecast floor.
inline double forecast_next(const GarchParams& theta, std::span<const double> rv, std::span<const double> ret,
                            double h1) {
    if (rv.size() < 2) throw InsufficientDataError("forecast needs at least 2 days");
    double last = h1;
    detail::run_filter<false>(theta, rv, ret, h1, kEstimationFloor,
                              [&last](std::size_t, double h, const Vec4&, const Mat4&, bool) { last = h; });
    const std::size_t n = rv.size();
    const double next = theta.omega_g + theta.gamma * last + theta.beta_g * rv[n - 1] - theta.alpha_g * ret[n - 1];
    return next < kForecastFloor ? kForecastFloor : next;
}

inline double forecast_next(const GarchParams& theta, const DailySeries& data, double h1) {
    return forecast_next(theta, data.rv, data.returns, h1);
}

/// Default h_1: mean of the positive part of V_hat.
inline double default_h1(std::span<const double> v_hat) {
    double sum = 0.0;
    for (double v : v_hat) sum += v > 0.0 ? v : 0.0;
    const double h1 = v_hat.empty() ? 0.0 : sum / static_cast<double>(v_hat.size());
    if (!(h1 > 0.0)) throw DegenerateError("no positive V_hat to initialise the filter");
    return h1;
}

} // namespace argi
