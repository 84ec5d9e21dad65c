#pragma once

// HAR regression RV_{d+1} = a + b1 RV_d + b2 RV_d^(week) + b3 RV_d^(month) + e
// and the forecast post-processing used for it.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "argi/error.hpp"
#include "argi/garch_filter.hpp"

namespace argi {

inline constexpr std::size_t kHarWeek = 5;
inline constexpr std::size_t kHarMonth = 22;
inline constexpr std::size_t kHarMinRows = 30;

struct HarFit {
    double a = 0.0, b1 = 0.0, b2 = 0.0, b3 = 0.0;
    std::size_t n_used = 0;
    bool collinear = false;  ///< minimum-norm solution of a near-singular design
};

/// Trailing mean of the `window` values ending at index d (inclusive).
inline double trailing_mean(std::span<const double> x, std::size_t d, std::size_t window) {
    double s = 0.0;
    for (std::size_t i = d + 1 - window; i <= d; ++i) s += x[i];
    return s / static_cast<double>(window);
}

/// Regressors (RV_d, week_d, month_d) at day d; needs d >= 21.
inline Eigen::Vector4d har_features(std::span<const double> rv, std::size_t d) {
    return {1.0, rv[d], trailing_mean(rv, d, kHarWeek), trailing_mean(rv, d, kHarMonth)};
}

inline HarFit har_fit(std::span<const double> rv) {
    if (rv.size() < kHarMonth + kHarMinRows)
        throw InsufficientDataError("HAR needs at least " + std::to_string(kHarMonth + kHarMinRows) +
                                    " observations, got " + std::to_string(rv.size()));
    // Rows d = 21 .. n-2 (0-based) predict rv[d+1]; incomplete months are dropped.
    const std::size_t first = kHarMonth - 1;
    const auto rows = static_cast<Eigen::Index>(rv.size() - 1 - first);
    Eigen::MatrixXd X(rows, 4);
    Eigen::VectorXd y(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto d = first + static_cast<std::size_t>(r);
        X.row(r) = har_features(rv, d).transpose();
        y[r] = rv[d + 1];
    }

    HarFit fit;
    fit.n_used = static_cast<std::size_t>(rows);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double cond = sv[sv.size() - 1] > 0.0 ? sv[0] / sv[sv.size() - 1] : INFINITY;
    Eigen::VectorXd coef;
    if (cond <= 1e10) {
        coef = X.colPivHouseholderQr().solve(y);
    } else {
        fit.collinear = true;
        svd.setThreshold(1e-10);
        coef = svd.solve(y);
    }
    fit.a = coef[0];
    fit.b1 = coef[1];
    fit.b2 = coef[2];
    fit.b3 = coef[3];
    return fit;
}

/// Raw linear prediction of RV for the day after the last observation.
inline double har_predict(const HarFit& fit, std::span<const double> rv) {
    if (rv.size() < kHarMonth) throw InsufficientDataError("HAR forecast needs a full month of history");
    const auto x = har_features(rv, rv.size() - 1);
    return fit.a + fit.b1 * x[1] + fit.b2 * x[2] + fit.b3 * x[3];
}

/// Replace the single largest value by the second largest.
inline bool cap_largest(std::vector<double>& batch) {
    if (batch.size() < 2) return false;
    auto largest = std::max_element(batch.begin(), batch.end());
    double second = -INFINITY;
    for (auto it = batch.begin(); it != batch.end(); ++it)
        if (it != largest) second = std::max(second, *it);
    if (*largest == second) return false;
    *largest = second;
    return true;
}

inline void floor_forecasts(std::vector<double>& batch) {
    for (double& v : batch) v = std::max(v, kForecastFloor);
}

/// Forecasts for a batch of days: cap the largest, then floor at the forecast floor.
inline std::vector<double> har_forecast_batch(std::vector<double> raw) {
    cap_largest(raw);
    floor_forecasts(raw);
    return raw;
}

/// Single-day forecast (no batch to cap against): floored prediction.
inline double har_forecast(const HarFit& fit, std::span<const double> rv) {
    return std::max(har_predict(fit, rv), kForecastFloor);
}

} // namespace argi
