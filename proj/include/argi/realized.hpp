#pragma once

// Jump-adjusted pre-averaging realized volatility.
//
// For one day with prices Y_0 .. Y_m (Y_0 the open, Y_m the close) and
// increments D_i = Y_i - Y_{i-1}, windows k = 1 .. m-K+1 give
//   Ybar(k)   = sum_{l=1}^{K-1} g(l/K) D_{k+l}
//   Yhat2(k)  = sum_{l=1}^{K} (g(l/K) - g((l-1)/K))^2 D_{k+l-1}^2
//   V_hat     = (psi K)^{-1} sum_k { Ybar(k)^2 - Yhat2(k)/2 }
//   RV        = same sum restricted to |Ybar(k)| <= c_trunc m^{-0.235}
// with g(x) = min(x, 1-x) and psi = int g^2 = 1/12. Every index stays inside
// 0..m, so no window shifting is needed.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "argi/error.hpp"
#include "argi/simulator.hpp"

namespace argi {

inline constexpr double kPrvPsi = 1.0 / 12.0;

inline double pre_average_weight(double x) { return std::min(x, 1.0 - x); }

struct PrvConfig {
    std::size_t bandwidth = 0;  ///< 0 selects K = floor(sqrt(m)) per day
    double trunc_exponent = 0.235;
    double c_trunc_multiplier = 7.0;
    std::size_t min_ticks = 8;
    bool pooled_threshold = true;  ///< c_trunc from all days at once (default) or per day
    bool overnight = false;        ///< add squared close-to-open return to both estimates
    std::optional<double> c_trunc_override;  ///< fixed c_trunc, e.g. +inf to disable truncation

    void validate() const {
        if (!(trunc_exponent > 0.0)) throw ValidationError("prv.trunc_exponent must be > 0");
        if (!(c_trunc_multiplier > 0.0)) throw ValidationError("prv.c_trunc_multiplier must be > 0");
        if (min_ticks < 3) throw ValidationError("prv.min_ticks must be >= 3");
        if (bandwidth == 1) throw ValidationError("prv.bandwidth must be 0 (auto) or >= 2");
    }
};

struct DailySeries {
    std::vector<double> v_hat;
    std::vector<double> rv;
    std::vector<double> returns;
    std::vector<std::size_t> negative_days;  ///< 0-based days with V_hat < 0
    double c_trunc = std::numeric_limits<double>::quiet_NaN();

    std::size_t n_days() const { return v_hat.size(); }

    void validate() const {
        if (rv.size() != v_hat.size() || returns.size() != v_hat.size())
            throw ValidationError("daily series columns have different lengths");
        for (std::size_t i = 0; i < v_hat.size(); ++i)
            if (!std::isfinite(v_hat[i]) || !std::isfinite(rv[i]) || !std::isfinite(returns[i]))
                throw ValidationError("daily series has a non-finite entry on day " + std::to_string(i + 1));
    }

    /// Days [first, first + count).
    DailySeries slice(std::size_t first, std::size_t count) const {
        DailySeries s;
        auto cut = [&](const std::vector<double>& v) {
            return std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(first),
                                       v.begin() + static_cast<std::ptrdiff_t>(first + count));
        };
        s.v_hat = cut(v_hat);
        s.rv = cut(rv);
        s.returns = cut(returns);
        s.c_trunc = c_trunc;
        for (auto d : negative_days)
            if (d >= first && d < first + count) s.negative_days.push_back(d - first);
        return s;
    }
};

/// Pre-averaged statistics of one day.
struct PreAveraged {
    std::size_t m = 0;  ///< number of increments
    std::size_t bandwidth = 0;
    std::vector<double> ybar;
    std::vector<double> yhat2;
};

inline std::size_t prv_bandwidth(std::size_t m, const PrvConfig& cfg) {
    std::size_t k = cfg.bandwidth;
    if (k == 0) k = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(m))));
    if (k < 2 || k + 1 > m)
        throw InsufficientDataError("bandwidth K=" + std::to_string(k) + " invalid for m=" + std::to_string(m));
    return k;
}

inline PreAveraged pre_average(std::span<const double> prices, const PrvConfig& cfg) {
    if (prices.size() < 2 || prices.size() - 1 < cfg.min_ticks)
        throw InsufficientDataError("need at least " + std::to_string(cfg.min_ticks) + " increments, got " +
                                    std::to_string(prices.size() > 0 ? prices.size() - 1 : 0));
    PreAveraged pa;
    pa.m = prices.size() - 1;
    const std::size_t K = prv_bandwidth(pa.m, cfg);
    pa.bandwidth = K;
    const double kd = static_cast<double>(K);

    std::vector<double> weight(K + 1), dweight_sq(K + 1);
    for (std::size_t l = 0; l <= K; ++l) weight[l] = pre_average_weight(static_cast<double>(l) / kd);
    for (std::size_t l = 1; l <= K; ++l) dweight_sq[l] = (weight[l] - weight[l - 1]) * (weight[l] - weight[l - 1]);

    auto inc = [&prices](std::size_t i) { return prices[i] - prices[i - 1]; };
    const std::size_t windows = pa.m - K + 1;
    pa.ybar.resize(windows);
    pa.yhat2.resize(windows);
    for (std::size_t k = 1; k <= windows; ++k) {
        double bar = 0.0;
        for (std::size_t l = 1; l + 1 <= K; ++l) bar += weight[l] * inc(k + l);
        double hat = 0.0;
        for (std::size_t l = 1; l <= K; ++l) {
            const double d = inc(k + l - 1);
            hat += dweight_sq[l] * d * d;
        }
        pa.ybar[k - 1] = bar;
        pa.yhat2[k - 1] = hat;
    }
    return pa;
}

inline double prv_sum(const PreAveraged& pa, double threshold) {
    double sum = 0.0;
    for (std::size_t k = 0; k < pa.ybar.size(); ++k)
        if (std::abs(pa.ybar[k]) <= threshold) sum += pa.ybar[k] * pa.ybar[k] - 0.5 * pa.yhat2[k];
    return sum / (kPrvPsi * static_cast<double>(pa.bandwidth));
}

inline double truncation_level(double c_trunc, std::size_t m, const PrvConfig& cfg) {
    if (std::isinf(c_trunc)) return c_trunc;
    return c_trunc * std::pow(static_cast<double>(m), -cfg.trunc_exponent);
}

/// Total variation estimate V_hat for one day's prices (open .. close).
inline double prv_total(std::span<const double> prices, const PrvConfig& cfg) {
    return prv_sum(pre_average(prices, cfg), std::numeric_limits<double>::infinity());
}

/// Integrated volatility estimate RV for one day given the constant c_trunc.
inline double prv_integrated(std::span<const double> prices, const PrvConfig& cfg, double c_trunc) {
    const auto pa = pre_average(prices, cfg);
    return prv_sum(pa, truncation_level(c_trunc, pa.m, cfg));
}

/// c_trunc = multiplier * sample sd of m^{1/8} Ybar(k) over the supplied days.
inline double truncation_constant(std::span<const PreAveraged> days, const PrvConfig& cfg) {
    if (cfg.c_trunc_override) return *cfg.c_trunc_override;
    double sum = 0.0, sum_sq = 0.0;
    std::size_t count = 0;
    // two-pass for accuracy
    for (const auto& pa : days) {
        const double scale = std::pow(static_cast<double>(pa.m), 0.125);
        for (double y : pa.ybar) sum += scale * y;
        count += pa.ybar.size();
    }
    if (count < 2) throw InsufficientDataError("too few pre-averaged values for the truncation constant");
    const double mean = sum / static_cast<double>(count);
    for (const auto& pa : days) {
        const double scale = std::pow(static_cast<double>(pa.m), 0.125);
        for (double y : pa.ybar) sum_sq += (scale * y - mean) * (scale * y - mean);
    }
    return cfg.c_trunc_multiplier * std::sqrt(sum_sq / static_cast<double>(count - 1));
}

namespace detail {

/// Prices entering the pre-averaging sum for day d and the overnight return.
inline std::vector<double> intraday_prices(const TickSeries& ticks, std::size_t d, bool overnight,
                                           double& overnight_return) {
    const auto& day = ticks.days[d];
    std::vector<double> prices(day.prices);
    overnight_return = 0.0;
    if (overnight)
        overnight_return = ticks.opens[d + 1] - prices.back();
    else
        prices.push_back(ticks.opens[d + 1]);
    return prices;
}

} // namespace detail

inline DailySeries build_daily_series(const TickSeries& ticks, const PrvConfig& cfg) {
    cfg.validate();
    ticks.validate();
    const std::size_t n = ticks.n_days();
    if (n < 3) throw InsufficientDataError("daily series needs at least 3 days, got " + std::to_string(n));

    std::vector<PreAveraged> pre(n);
    std::vector<double> overnight(n);
    for (std::size_t d = 0; d < n; ++d) {
        try {
            auto prices = detail::intraday_prices(ticks, d, cfg.overnight, overnight[d]);
            pre[d] = pre_average(prices, cfg);
        } catch (const InsufficientDataError& e) {
            throw InsufficientDataError("day " + std::to_string(d + 1) + ": " + e.what());
        }
    }

    DailySeries out;
    if (cfg.pooled_threshold) out.c_trunc = truncation_constant(pre, cfg);
    out.v_hat.resize(n);
    out.rv.resize(n);
    out.returns.resize(n);
    for (std::size_t d = 0; d < n; ++d) {
        const double c = cfg.pooled_threshold ? out.c_trunc : truncation_constant(std::span(&pre[d], 1), cfg);
        const double on2 = overnight[d] * overnight[d];
        out.v_hat[d] = prv_sum(pre[d], std::numeric_limits<double>::infinity()) + on2;
        out.rv[d] = prv_sum(pre[d], truncation_level(c, pre[d].m, cfg)) + on2;
        out.returns[d] = ticks.opens[d + 1] - ticks.opens[d];
        if (out.v_hat[d] < 0.0) out.negative_days.push_back(d);
    }
    out.validate();
    return out;
}

} // namespace argi
