#pragma once

// Parameter types of the asymmetric realized GARCH-Ito model and the map from
// the continuous-time parameters to the daily GARCH representation
//   h_n = omega_g + gamma h_{n-1} + beta_g IV_{n-1} - alpha_g (X_{n-1} - X_{n-2}).

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "argi/error.hpp"

namespace argi {

using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;

/// Jump-size law: -c_j T^2 or +c_j Z^2 with probability 1/2 each, T a
/// unit-variance Student t(df), Z standard normal. Both squares have unit
/// mean, so the law is centred.
struct JumpLaw {
    double intensity_lambda = 20.0;  ///< expected jumps per day
    double c_j = 0.04;
    double df = 6.0;
    double mean_omega_L = 0.0;

    /// E(J^2) = c_j^2 (E T^4 + E Z^4) / 2 with E T^4 = 3 + 6/(df-4).
    double second_moment() const {
        return 0.5 * c_j * c_j * (3.0 + 6.0 / (df - 4.0) + 3.0);
    }

    void validate() const {
        if (!(intensity_lambda >= 0.0)) throw ValidationError("jump intensity must be >= 0");
        if (!(c_j > 0.0)) throw ValidationError("jump scale c_j must be > 0");
        if (!(df > 4.0)) throw ValidationError("jump df must be > 4 for a finite fourth moment");
    }
};

struct StructuralParams {
    double mu = 0.02;
    double omega1 = 3.9527;
    double omega2 = 0.1000;
    double gamma = 0.2474;
    double alpha = 0.3972;
    double beta = 0.2939;
    double nu = 0.01;
    JumpLaw jump{};
    double noise_sd = 0.01;
    double x0 = 10.0;
    double sigma0_sq = 1.7462;

    /// Full invariants required by the GARCH parameter map.
    void validate() const {
        validate_for_simulation();
        if (!(gamma > 0.0)) throw ValidationError("gamma must lie in (0,1)");
        if (!(beta > 0.0)) throw ValidationError("beta must be > 0");
    }

    /// The simulator also accepts the degenerate corners gamma = 0 and beta = 0.
    void validate_for_simulation() const {
        if (!(gamma >= 0.0 && gamma < 1.0)) throw ValidationError("gamma must lie in [0,1)");
        if (!(beta >= 0.0)) throw ValidationError("beta must be >= 0");
        if (!(omega1 >= 0.0) || !(omega2 >= 0.0)) throw ValidationError("omega1, omega2 must be >= 0");
        if (!(alpha >= 0.0)) throw ValidationError("alpha must be >= 0");
        if (!(nu >= 0.0)) throw ValidationError("nu must be >= 0");
        if (!(noise_sd >= 0.0)) throw ValidationError("noise_sd must be >= 0");
        if (!(sigma0_sq > 0.0)) throw ValidationError("sigma0_sq must be > 0");
        if (!std::isfinite(mu) || !std::isfinite(x0)) throw ValidationError("mu and x0 must be finite");
        jump.validate();
    }
};

/// theta = (omega_g, gamma, alpha_g, beta_g).
struct GarchParams {
    double omega_g = 0.0;
    double gamma = 0.0;
    double alpha_g = 0.0;
    double beta_g = 0.0;

    static constexpr std::size_t size = 4;
    static constexpr std::array<const char*, 4> names{"omega_g", "gamma", "alpha_g", "beta_g"};

    Vec4 vec() const { return {omega_g, gamma, alpha_g, beta_g}; }
    static GarchParams from(const Vec4& v) { return {v[0], v[1], v[2], v[3]}; }

    double operator[](std::size_t i) const { return vec()[static_cast<Eigen::Index>(i)]; }

    friend bool operator==(const GarchParams&, const GarchParams&) = default;
};

/// Closed box for theta intersected with gamma + beta_g <= 1 - stationarity_margin.
/// Coordinates listed in `fixed` are held at the given value and not estimated.
struct ParamSpace {
    Vec4 lower = Vec4::Constant(1e-8);
    Vec4 upper = Vec4::Constant(10.0);
    double stationarity_margin = 1e-4;
    std::array<std::optional<double>, 4> fixed{};

    static ParamSpace argi() { return {}; }

    /// alpha_g frozen at zero: the model without the leverage term.
    static ParamSpace rgi() {
        ParamSpace s;
        s.fixed[2] = 0.0;
        return s;
    }

    bool is_fixed(std::size_t i) const { return fixed[i].has_value(); }

    std::size_t free_count() const {
        std::size_t n = 0;
        for (const auto& f : fixed) n += f ? 0 : 1;
        return n;
    }

    double budget() const { return 1.0 - stationarity_margin; }

    void validate() const {
        for (int i = 0; i < 4; ++i) {
            if (fixed[static_cast<std::size_t>(i)]) continue;
            if (!(lower[i] >= 0.0)) throw ValidationError("parameter space lower bounds must be >= 0");
            if (!(lower[i] < upper[i])) throw ValidationError("parameter space needs lower < upper");
        }
        if (!(stationarity_margin > 0.0 && stationarity_margin < 1.0))
            throw ValidationError("stationarity margin must lie in (0,1)");
        double g_lo = fixed[1].value_or(lower[1]);
        double b_lo = fixed[3].value_or(lower[3]);
        if (!(g_lo + b_lo < budget()))
            throw ValidationError("parameter space is empty: gamma + beta_g lower bounds exceed budget");
    }

    bool contains(const GarchParams& theta, double tol = 0.0) const {
        Vec4 v = theta.vec();
        for (std::size_t i = 0; i < 4; ++i) {
            auto k = static_cast<Eigen::Index>(i);
            if (fixed[i]) {
                if (std::abs(v[k] - *fixed[i]) > tol) return false;
                continue;
            }
            if (v[k] < lower[k] - tol || v[k] > upper[k] + tol) return false;
        }
        return theta.gamma + theta.beta_g <= budget() + tol;
    }
};

/// rho_k(beta) = sum_{j>=0} beta^j / (j+k)!, i.e. rho_1 = (e^b-1)/b,
/// rho_2 = (e^b-1-b)/b^2, rho_3 = (e^b-1-b-b^2/2)/b^3.
struct RhoTerms {
    double rho1, rho2, rho3;
};

inline RhoTerms rho_terms(double beta) {
    if (!(beta > 0.0) || !std::isfinite(beta))
        throw DomainError("rho terms need beta > 0, got " + std::to_string(beta));
    if (beta < 1.0) {
        // Series: the closed forms cancel catastrophically for small beta.
        auto series = [beta](int k) {
            double term = 1.0;
            for (int j = 2; j <= k; ++j) term /= j;  // 1/k!
            double sum = term;
            for (int j = 1; j < 40; ++j) {
                term *= beta / (j + k);
                sum += term;
                if (term < 1e-18 * sum) break;
            }
            return sum;
        };
        return {series(1), series(2), series(3)};
    }
    double em1 = std::expm1(beta);
    return {em1 / beta, (em1 - beta) / (beta * beta),
            (em1 - beta - 0.5 * beta * beta) / (beta * beta * beta)};
}

inline GarchParams structural_to_garch(const StructuralParams& p) {
    p.validate();
    const auto [r1, r2, r3] = rho_terms(p.beta);
    const double g = p.gamma;
    const double factor = r1 - r2 + 2.0 * g * r3;
    const double lambda = p.jump.intensity_lambda;
    const double ej2 = lambda > 0.0 ? p.jump.second_moment() : 0.0;

    GarchParams theta;
    theta.gamma = g;
    theta.alpha_g = factor * p.alpha;
    theta.beta_g = factor * p.beta;
    theta.omega_g = g * (r1 - r2 + 2.0 * r3) * p.omega1
                    - (r1 - g * r2 + 2.0 * g * r3) * p.omega2
                    - (1.0 - g) * (r2 * p.alpha * (p.mu + lambda * p.jump.mean_omega_L) - lambda * ej2);
    return theta;
}

/// Stationary level omega_g / (1 - gamma - beta_g).
inline double unconditional_h(const GarchParams& theta) {
    const double persistence = theta.gamma + theta.beta_g;
    if (!(persistence < 1.0))
        throw DomainError("unconditional level needs gamma + beta_g < 1, got " + std::to_string(persistence));
    return theta.omega_g / (1.0 - persistence);
}

} // namespace argi
