#pragma once

// Forecast losses, Diebold-Mariano comparison, residual autocorrelation of the
// persistence regression V_hat_d = a + b Vol_d + e_d, and small Monte-Carlo
// summary helpers.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "argi/error.hpp"

namespace argi {

enum class Loss { MSPE, RMSPE, QLIKE };

inline const char* loss_name(Loss l) {
    switch (l) {
    case Loss::MSPE: return "mspe";
    case Loss::RMSPE: return "rmspe";
    case Loss::QLIKE: return "qlike";
    }
    return "?";
}

/// Per-day loss of forecast x against target y; RMSPE is NaN for y = 0.
inline double loss_value(Loss kind, double x, double y) {
    switch (kind) {
    case Loss::MSPE: return (x - y) * (x - y);
    case Loss::RMSPE: return y == 0.0 ? std::numeric_limits<double>::quiet_NaN() : ((x - y) / y) * ((x - y) / y);
    case Loss::QLIKE: return std::log(x) + y / x;
    }
    return 0.0;
}

inline std::vector<double> loss_series(Loss kind, std::span<const double> vol, std::span<const double> target) {
    if (vol.size() != target.size()) throw ValidationError("loss series: misaligned inputs");
    std::vector<double> out(vol.size());
    for (std::size_t i = 0; i < vol.size(); ++i) out[i] = loss_value(kind, vol[i], target[i]);
    return out;
}

struct Metrics {
    double mspe = 0.0;
    double rmspe = 0.0;
    double qlike = 0.0;
    std::size_t n = 0;
    std::size_t rmspe_excluded = 0;  ///< days with a zero target left out of RMSPE
};

inline Metrics metrics(std::span<const double> vol, std::span<const double> target) {
    if (vol.size() != target.size()) throw ValidationError("metrics: misaligned inputs");
    if (vol.empty()) throw InsufficientDataError("metrics of an empty series");
    Metrics m;
    m.n = vol.size();
    std::size_t used = 0;
    for (std::size_t i = 0; i < vol.size(); ++i) {
        if (!(vol[i] > 0.0)) throw DomainError("metrics need positive forecasts");
        const double e = vol[i] - target[i];
        m.mspe += e * e;
        m.qlike += std::log(vol[i]) + target[i] / vol[i];
        if (target[i] == 0.0) {
            ++m.rmspe_excluded;
        } else {
            m.rmspe += (e / target[i]) * (e / target[i]);
            ++used;
        }
    }
    if (used == 0) throw DegenerateError("RMSPE undefined: every target is zero");
    m.mspe /= static_cast<double>(m.n);
    m.qlike /= static_cast<double>(m.n);
    m.rmspe /= static_cast<double>(used);
    return m;
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

struct DmOptions {
    std::optional<std::size_t> hac_lags;  ///< default floor(n^{1/3})
    bool two_sided = false;
    bool iid_se = false;  ///< plain standard error instead of Bartlett HAC
};

struct DmResult {
    double statistic = 0.0;
    double p_value = 1.0;
    double mean_diff = 0.0;
    double std_error = 0.0;
    std::size_t n = 0;
    std::size_t lags = 0;
};

/// Bartlett-kernel long-run variance of the mean of x.
inline double hac_variance_of_mean(std::span<const double> x, std::size_t lags) {
    const std::size_t n = x.size();
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);
    auto autocov = [&](std::size_t j) {
        double s = 0.0;
        for (std::size_t t = j; t < n; ++t) s += (x[t] - mean) * (x[t - j] - mean);
        return s / static_cast<double>(n);
    };
    double lrv = autocov(0);
    for (std::size_t j = 1; j <= lags && j < n; ++j)
        lrv += 2.0 * (1.0 - static_cast<double>(j) / static_cast<double>(lags + 1)) * autocov(j);
    return lrv / static_cast<double>(n);
}

/// DM = mean(Z) / se(mean Z), Z_d = loss1_d - loss2_d. The one-sided p-value
/// is P(N(0,1) <= DM): small when forecast 1 has the lower loss.
/// Days where either loss is NaN are dropped from both series.
inline DmResult dm_test(std::span<const double> loss1, std::span<const double> loss2, const DmOptions& opts = {}) {
    if (loss1.size() != loss2.size()) throw ValidationError("DM test: misaligned loss series");
    std::vector<double> z;
    z.reserve(loss1.size());
    for (std::size_t i = 0; i < loss1.size(); ++i)
        if (!std::isnan(loss1[i]) && !std::isnan(loss2[i])) z.push_back(loss1[i] - loss2[i]);
    if (z.size() < 30) throw InsufficientDataError("DM test needs at least 30 paired losses");

    DmResult r;
    r.n = z.size();
    for (double v : z) r.mean_diff += v;
    r.mean_diff /= static_cast<double>(r.n);
    r.lags = opts.iid_se ? 0 : opts.hac_lags.value_or(static_cast<std::size_t>(std::cbrt(static_cast<double>(r.n))));
    double var = 0.0;
    if (opts.iid_se) {
        for (double v : z) var += (v - r.mean_diff) * (v - r.mean_diff);
        var /= static_cast<double>(r.n - 1) * static_cast<double>(r.n);
    } else {
        var = hac_variance_of_mean(z, r.lags);
    }
    const double scale = std::max(std::abs(r.mean_diff), 1e-300);
    if (!(var > 0.0) || std::sqrt(var) <= 1e-14 * scale)
        throw DegenerateError("DM test: no difference between the loss series");
    r.std_error = std::sqrt(var);
    r.statistic = r.mean_diff / r.std_error;
    r.p_value = opts.two_sided ? 2.0 * (1.0 - normal_cdf(std::abs(r.statistic))) : normal_cdf(r.statistic);
    return r;
}

/// Biased autocorrelations (divide by n and the lag-0 sum) for lags 0..max_lag.
inline std::vector<double> autocorrelation(std::span<const double> x, std::size_t max_lag) {
    const std::size_t n = x.size();
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);
    double c0 = 0.0;
    for (double v : x) c0 += (v - mean) * (v - mean);
    std::vector<double> acf(max_lag + 1, 0.0);
    if (!(c0 > 0.0)) return acf;
    acf[0] = 1.0;
    for (std::size_t j = 1; j <= max_lag && j < n; ++j) {
        double s = 0.0;
        for (std::size_t t = j; t < n; ++t) s += (x[t] - mean) * (x[t - j] - mean);
        acf[j] = s / c0;
    }
    return acf;
}

struct PersistenceResult {
    double intercept = 0.0;
    double slope = 0.0;
    std::vector<double> acf;  ///< lags 0..max_lag; acf[0] = 1 unless degenerate
    double max_abs_acf = 0.0; ///< over lags 1..max_lag
    bool degenerate = false;  ///< residuals vanish; ACF reported as zero
};

inline PersistenceResult persistence_regression(std::span<const double> v_hat, std::span<const double> vol,
                                                std::size_t max_lag = 30) {
    if (v_hat.size() != vol.size()) throw ValidationError("persistence regression: misaligned inputs");
    const std::size_t n = v_hat.size();
    if (n < 60) throw InsufficientDataError("persistence regression needs at least 60 days");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += vol[i];
        my += v_hat[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (vol[i] - mx) * (vol[i] - mx);
        sxy += (vol[i] - mx) * (v_hat[i] - my);
        syy += (v_hat[i] - my) * (v_hat[i] - my);
    }
    if (!(sxx > 0.0)) throw DegenerateError("persistence regression: forecast series has zero variance");

    PersistenceResult res;
    res.slope = sxy / sxx;
    res.intercept = my - res.slope * mx;
    std::vector<double> resid(n);
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        resid[i] = v_hat[i] - res.intercept - res.slope * vol[i];
        rss += resid[i] * resid[i];
    }
    const double total = std::max(syy, sxx);
    if (rss <= 1e-24 * total || rss == 0.0) {
        res.degenerate = true;
        res.acf.assign(max_lag + 1, 0.0);
        return res;
    }
    res.acf = autocorrelation(resid, max_lag);
    for (std::size_t j = 1; j < res.acf.size(); ++j) res.max_abs_acf = std::max(res.max_abs_acf, std::abs(res.acf[j]));
    return res;
}

/// One-sided paired sign test of "x_i < y_i more often than not". Ties are dropped.
struct SignTest {
    std::size_t wins = 0;    ///< pairs with x < y
    std::size_t losses = 0;  ///< pairs with x > y
    double p_value = 1.0;    ///< P(Binomial(wins + losses, 1/2) >= wins)
};

inline double binomial_upper_tail(std::size_t n, std::size_t k) {
    double p = 0.0;
    for (std::size_t j = k; j <= n; ++j) {
        const double log_term = std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(j) + 1.0) -
                                std::lgamma(static_cast<double>(n - j) + 1.0) - static_cast<double>(n) * std::log(2.0);
        p += std::exp(log_term);
    }
    return std::min(1.0, p);
}

inline SignTest paired_sign_test(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw ValidationError("sign test: misaligned inputs");
    SignTest t;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] < y[i]) ++t.wins;
        else if (x[i] > y[i]) ++t.losses;
    }
    t.p_value = binomial_upper_tail(t.wins + t.losses, t.wins);
    return t;
}

/// Squared bias, variance and MSE of estimates around a true value (divisor R).
struct ErrorDecomposition {
    double bias2 = 0.0;
    double variance = 0.0;
    double mse = 0.0;
    std::size_t count = 0;
};

inline ErrorDecomposition decompose_error(std::span<const double> estimates, double truth) {
    ErrorDecomposition e;
    e.count = estimates.size();
    if (e.count == 0) return e;
    const double r = static_cast<double>(e.count);
    double mean = 0.0;
    for (double v : estimates) mean += v;
    mean /= r;
    for (double v : estimates) {
        e.variance += (v - mean) * (v - mean);
        e.mse += (v - truth) * (v - truth);
    }
    e.variance /= r;
    e.mse /= r;
    e.bias2 = (mean - truth) * (mean - truth);
    return e;
}

} // namespace argi
