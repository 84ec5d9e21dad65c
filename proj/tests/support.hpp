#pragma once

#include <cmath>
#include <random>

#include "argi/model.hpp"
#include "argi/realized.hpp"
#include "argi/rng.hpp"

namespace argi::testing {

/// Daily series generated straight from the discrete recursion: rv_i = h_i xi_i
/// with E xi = 1, returns sqrt(rv_i) z_i and V_hat = rv + heavy-tailed noise.
inline DailySeries garch_series(const GarchParams& theta, std::size_t n, std::uint64_t seed, double noise_sd = 0.0,
                                double noise_df = 0.0) {
    Rng rng(seed);
    std::gamma_distribution<double> xi(4.0, 0.25);
    std::normal_distribution<double> z(0.0, 1.0);
    std::student_t_distribution<double> t(noise_df > 2.0 ? noise_df : 5.0);
    DailySeries s;
    double h = unconditional_h(theta);
    for (std::size_t i = 0; i < n; ++i) {
        const double rv = h * xi(rng);
        const double r = std::sqrt(rv) * z(rng);
        double noise = 0.0;
        if (noise_sd > 0.0) noise = noise_df > 2.0 ? noise_sd * t(rng) : noise_sd * z(rng);
        s.rv.push_back(rv);
        s.v_hat.push_back(rv + noise);
        s.returns.push_back(r);
        h = std::max(theta.omega_g + theta.gamma * h + theta.beta_g * rv - theta.alpha_g * r, 1e-3);
    }
    return s;
}

} // namespace argi::testing
