#pragma once

// Adaptive Huber threshold: Hill tail index of V_hat, clamped into [c_b, 2],
// and tau_n = c_tau n^{1/b} with c_tau = (c/n) sum |V_i - mean(V)|^b.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "argi/error.hpp"

namespace argi {

struct TuningConfig {
    double c_b = 1.1;
    double c_multiplier = 0.2;
    double k_multiplier = 4.0;  ///< k_n = floor(k_multiplier * sqrt(n))

    void validate() const {
        if (!(c_b > 1.0 && c_b <= 2.0)) throw ValidationError("tuning.c_b must lie in (1,2]");
        if (!(c_multiplier > 0.0)) throw ValidationError("tuning.c must be > 0");
        if (!(k_multiplier > 0.0)) throw ValidationError("tuning.k_multiplier must be > 0");
    }

    std::size_t k_n(std::size_t n) const {
        return static_cast<std::size_t>(std::floor(k_multiplier * std::sqrt(static_cast<double>(n))));
    }
};

struct TuningRecord {
    double upsilon_hat = 0.0;
    double b_hat = 2.0;
    double c_tau = 0.0;
    double tau_n = 0.0;
};

/// Hill estimate anchored at the k-th largest value:
///   [ (1/k) sum_{i=0}^{k-1} (log V_(n-i) - log V_(n-k+1)) ]^{-1}.
inline double hill_estimate(std::span<const double> values, std::size_t k) {
    const std::size_t n = values.size();
    if (k < 2 || k >= n)
        throw InsufficientDataError("Hill estimator needs 2 <= k < n (k=" + std::to_string(k) +
                                    ", n=" + std::to_string(n) + ")");
    std::vector<double> sorted(values.begin(), values.end());
    std::stable_sort(sorted.begin(), sorted.end());
    const double anchor = sorted[n - k];
    if (!(anchor > 0.0)) throw DomainError("Hill estimator needs the top k values to be positive");
    const double log_anchor = std::log(anchor);
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) sum += std::log(sorted[n - 1 - i]) - log_anchor;
    if (!(sum > 0.0)) throw DegenerateError("Hill estimator: top order statistics have no log spread");
    return static_cast<double>(k) / sum;
}

inline double threshold_constant(std::span<const double> values, double b, double c) {
    if (values.empty()) throw InsufficientDataError("threshold constant of an empty series");
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double sum = 0.0;
    for (double v : values) sum += std::pow(std::abs(v - mean), b);
    return c * sum / static_cast<double>(values.size());
}

inline double clamp_tail_index(double upsilon, const TuningConfig& cfg) {
    return std::max(cfg.c_b, std::min(2.0, upsilon));
}

/// Threshold for a given tail index, skipping the Hill step.
inline TuningRecord tuning_for_index(std::span<const double> values, double upsilon, const TuningConfig& cfg) {
    cfg.validate();
    TuningRecord rec;
    rec.upsilon_hat = upsilon;
    rec.b_hat = clamp_tail_index(upsilon, cfg);
    rec.c_tau = threshold_constant(values, rec.b_hat, cfg.c_multiplier);
    if (!(rec.c_tau > 0.0)) throw DegenerateError("threshold constant is zero (constant series)");
    rec.tau_n = rec.c_tau * std::pow(static_cast<double>(values.size()), 1.0 / rec.b_hat);
    return rec;
}

inline TuningRecord select_tuning(std::span<const double> values, const TuningConfig& cfg) {
    cfg.validate();
    const std::size_t n = values.size();
    const std::size_t k = cfg.k_n(n);
    if (k < 2 || k >= n)
        throw InsufficientDataError("tuning needs floor(" + std::to_string(cfg.k_multiplier) +
                                    " sqrt(n)) in [2, n); n=" + std::to_string(n));
    return tuning_for_index(values, hill_estimate(values, k), cfg);
}

} // namespace argi
