#pragma once

// Euler simulation of the jump-diffusion price with the ARGI spot variance.
//
// Within day n (s = t - n in [0,1)) the spot variance is carried in solution form
//   sigma_t^2 = sigma_n^2 + gamma s^2 (omega1 + sigma_n^2) - s (omega2 + sigma_n^2)
//             + beta int_n^t sigma^2 - alpha (X_t - X_n) + (1 - s) nu I_t,
// with I_t = ((W_t - W_n)^2 - s) / 2 the exact Ito integral of (W - W_n) dW.
// At integer times the fluctuation term is dropped:
//   sigma_{n+1}^2 = omega + gamma sigma_n^2 + beta IV_n - alpha (X_{n+1} - X_n).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "argi/error.hpp"
#include "argi/model.hpp"
#include "argi/rng.hpp"

namespace argi {

inline constexpr double kSpotVarianceFloor = 1e-10;

/// Observations of one day: absolute times in [d-1, d) and log-prices. The
/// first entry is the open at time d-1; the day's closing price is the next open.
struct DayTicks {
    std::vector<double> times;
    std::vector<double> prices;

    std::size_t size() const { return prices.size(); }
};

struct TickSeries {
    std::vector<DayTicks> days;
    std::vector<double> opens;  ///< X_0 .. X_n, length n_days + 1

    std::size_t n_days() const { return days.size(); }

    void validate() const {
        if (opens.size() != days.size() + 1)
            throw ValidationError("tick series needs n_days + 1 opens");
        for (std::size_t d = 0; d < days.size(); ++d) {
            const auto& day = days[d];
            if (day.times.size() != day.prices.size() || day.times.empty())
                throw ValidationError("day " + std::to_string(d + 1) + ": empty or ragged tick record");
            if (day.times.front() != static_cast<double>(d))
                throw ValidationError("day " + std::to_string(d + 1) + ": first tick must sit at the open");
            for (std::size_t i = 1; i < day.times.size(); ++i)
                if (!(day.times[i] > day.times[i - 1]))
                    throw ValidationError("day " + std::to_string(d + 1) + ": tick times not strictly increasing");
        }
    }
};

struct SimConfig {
    std::size_t n_days = 125;
    std::size_t m_all = 23400;
    std::size_t m_obs = 390;
    std::uint64_t seed = 1;
    StructuralParams params{};
    bool keep_spot_trace = false;

    void validate() const {
        if (n_days < 2) throw ValidationError("n_days must be >= 2");
        if (m_obs < 2) throw ValidationError("m_obs must be >= 2");
        if (m_all < m_obs) throw ValidationError("m_all must be >= m_obs");
        if (m_all % m_obs != 0) throw ValidationError("m_obs must divide m_all");
        params.validate_for_simulation();
    }
};

struct SimOutput {
    TickSeries ticks;
    std::vector<double> true_x;   ///< X_d at the end of day d, d = 1..n
    std::vector<double> true_iv;  ///< trapezoid integral of sigma^2 over each day
    std::vector<double> true_jv;  ///< sum of squared jumps per day
    double true_h_next = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> spot_var_path;  ///< n_days * (m_all + 1) values when requested
    std::size_t clamp_events = 0;

    std::vector<double> true_returns() const {
        std::vector<double> r(true_x.size());
        for (std::size_t d = 0; d < r.size(); ++d) r[d] = ticks.opens[d + 1] - ticks.opens[d];
        return r;
    }
};

namespace detail {

inline double draw_jump(Rng& rng, const JumpLaw& law) {
    std::bernoulli_distribution coin(0.5);
    if (coin(rng)) {
        std::student_t_distribution<double> t(law.df);
        double v = t(rng) * std::sqrt((law.df - 2.0) / law.df);
        return -law.c_j * v * v;
    }
    std::normal_distribution<double> z(0.0, 1.0);
    double v = z(rng);
    return law.c_j * v * v;
}

} // namespace detail

/// Recursion h_{d+1} = omega_g + gamma h_d + beta_g IV_d - alpha_g r_d seeded at
/// the unconditional level; returns h_2 .. h_{n+1}.
inline std::vector<double> true_h_path(const std::vector<double>& iv, const std::vector<double>& returns,
                                       const GarchParams& theta) {
    if (iv.size() != returns.size()) throw ValidationError("true_h_path: misaligned series");
    if (iv.size() < 2) throw InsufficientDataError("true_h_path needs at least 2 days");
    std::vector<double> h(iv.size());
    double prev = unconditional_h(theta);
    for (std::size_t d = 0; d < iv.size(); ++d) {
        prev = theta.omega_g + theta.gamma * prev + theta.beta_g * iv[d] - theta.alpha_g * returns[d];
        h[d] = prev;
    }
    return h;
}

inline std::vector<double> true_h_path(const SimOutput& out, const GarchParams& theta) {
    return true_h_path(out.true_iv, out.true_returns(), theta);
}

inline SimOutput simulate(const SimConfig& cfg) {
    cfg.validate();
    const auto& p = cfg.params;
    const std::size_t m = cfg.m_all;
    const std::size_t thin = cfg.m_all / cfg.m_obs;
    const double dt = 1.0 / static_cast<double>(m);
    const double sqrt_dt = std::sqrt(dt);
    const double omega = p.gamma * p.omega1 - p.omega2;

    Rng rng(cfg.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, p.noise_sd > 0.0 ? p.noise_sd : 1.0);
    std::poisson_distribution<long> jump_count(p.jump.intensity_lambda > 0.0 ? p.jump.intensity_lambda : 1.0);
    std::uniform_int_distribution<std::size_t> jump_step(0, m - 1);

    SimOutput out;
    out.ticks.days.resize(cfg.n_days);
    out.ticks.opens.reserve(cfg.n_days + 1);
    out.true_x.reserve(cfg.n_days);
    out.true_iv.reserve(cfg.n_days);
    out.true_jv.reserve(cfg.n_days);
    if (cfg.keep_spot_trace) out.spot_var_path.reserve(cfg.n_days * (m + 1));

    auto clamp = [&out](double v) {
        if (v < kSpotVarianceFloor) {
            ++out.clamp_events;
            return kSpotVarianceFloor;
        }
        return v;
    };

    double x = p.x0;
    double sigma_open = clamp(p.sigma0_sq);
    out.ticks.opens.push_back(x);

    std::vector<std::pair<std::size_t, double>> jumps;
    for (std::size_t d = 0; d < cfg.n_days; ++d) {
        // Jump arrivals: a Poisson(lambda) count placed uniformly on the fine
        // grid gives independent Poisson(lambda dt) counts per step.
        jumps.clear();
        double jv = 0.0;
        if (p.jump.intensity_lambda > 0.0) {
            const long count = jump_count(rng);
            for (long j = 0; j < count; ++j) {
                const std::size_t step = jump_step(rng);
                const double size = detail::draw_jump(rng, p.jump);
                jumps.emplace_back(step, size);
                jv += size * size;
            }
            std::stable_sort(jumps.begin(), jumps.end(),
                             [](const auto& a, const auto& b) { return a.first < b.first; });
        }

        auto& day = out.ticks.days[d];
        day.times.reserve(cfg.m_obs);
        day.prices.reserve(cfg.m_obs);
        day.times.push_back(static_cast<double>(d));
        day.prices.push_back(x);

        const double x_open = x;
        double spot = sigma_open;
        double running_iv = 0.0;  // left-point sum driving the state
        double trapezoid = 0.0;
        double w_tilde = 0.0;
        std::size_t next_jump = 0;
        if (cfg.keep_spot_trace) out.spot_var_path.push_back(spot);

        for (std::size_t k = 0; k < m; ++k) {
            const double db = normal(rng) * sqrt_dt;
            const double dw = normal(rng) * sqrt_dt;
            double jump_sum = 0.0;
            while (next_jump < jumps.size() && jumps[next_jump].first == k) jump_sum += jumps[next_jump++].second;

            x += p.mu * dt + std::sqrt(spot) * db + jump_sum;
            running_iv += spot * dt;
            w_tilde += dw;

            const double s = static_cast<double>(k + 1) * dt;
            const double fluctuation = (1.0 - s) * p.nu * 0.5 * (w_tilde * w_tilde - s);
            double next = sigma_open + p.gamma * s * s * (p.omega1 + sigma_open) - s * (p.omega2 + sigma_open)
                          + p.beta * running_iv - p.alpha * (x - x_open) + fluctuation;
            if (!std::isfinite(next) || !std::isfinite(x))
                throw SimulationError("non-finite state on day " + std::to_string(d + 1) + ", step " +
                                      std::to_string(k + 1));
            next = clamp(next);
            trapezoid += 0.5 * (spot + next) * dt;
            spot = next;
            if (cfg.keep_spot_trace) out.spot_var_path.push_back(spot);

            if ((k + 1) % thin == 0 && k + 1 < m) {
                day.times.push_back(static_cast<double>(d) + s);
                day.prices.push_back(x + (p.noise_sd > 0.0 ? noise(rng) : 0.0));
            }
        }

        out.true_x.push_back(x);
        out.true_iv.push_back(trapezoid);
        out.true_jv.push_back(jv);
        out.ticks.opens.push_back(x);

        const double reset = omega + p.gamma * sigma_open + p.beta * trapezoid - p.alpha * (x - x_open);
        if (!std::isfinite(reset))
            throw SimulationError("non-finite spot variance reset at end of day " + std::to_string(d + 1));
        sigma_open = clamp(reset);
    }

    try {
        const GarchParams theta0 = structural_to_garch(p);
        auto h = true_h_path(out, theta0);
        out.true_h_next = h.back();
    } catch (const std::invalid_argument&) {
        // degenerate corners (gamma = 0, beta = 0, non-stationary) carry no target
    }
    return out;
}

} // namespace argi
