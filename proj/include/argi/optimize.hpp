#pragma once

// Small dense BFGS minimiser with Armijo backtracking, plus the smooth
// bijection between R^k and the constrained parameter space.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "argi/model.hpp"

namespace argi {

using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

struct MinimizeOptions {
    int max_iter = 500;
    double rel_tol = 1e-10;   ///< relative objective change
    double grad_tol = 1e-8;   ///< infinity norm of the gradient
    double max_step = 5.0;    ///< cap on the step length per iteration
};

struct MinimizeResult {
    VecX x;
    double f = std::numeric_limits<double>::infinity();
    int iterations = 0;
    bool converged = false;
    std::vector<double> trace;
};

/// fn(x, grad) returns f(x) and writes the gradient.
using Objective = std::function<double(const VecX&, VecX&)>;

inline MinimizeResult minimize_bfgs(const Objective& fn, VecX x, const MinimizeOptions& opts = {}) {
    const auto n = x.size();
    MinimizeResult res;
    VecX g(n), g_new(n);
    double f = fn(x, g);
    res.trace.push_back(f);
    if (!std::isfinite(f)) {
        res.x = x;
        res.f = f;
        return res;
    }
    MatX inv_h = MatX::Identity(n, n);
    bool scaled = false;

    for (int it = 0; it < opts.max_iter; ++it) {
        res.iterations = it + 1;
        if (g.lpNorm<Eigen::Infinity>() < opts.grad_tol) {
            res.converged = true;
            break;
        }
        VecX p = -inv_h * g;
        if (g.dot(p) >= 0.0) {
            inv_h.setIdentity();
            p = -g;
        }
        const double p_norm = p.norm();
        if (p_norm > opts.max_step) p *= opts.max_step / p_norm;

        const double slope = g.dot(p);
        double t = 1.0;
        double f_new = std::numeric_limits<double>::infinity();
        VecX x_new(n);
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            x_new = x + t * p;
            f_new = fn(x_new, g_new);
            if (std::isfinite(f_new) && f_new <= f + 1e-4 * t * slope) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) {
            // No descent left at working precision.
            res.converged = g.lpNorm<Eigen::Infinity>() < std::sqrt(opts.grad_tol);
            break;
        }

        const VecX s = x_new - x;
        const VecX y = g_new - g;
        const double sy = s.dot(y);
        const double change = std::abs(f - f_new);
        const double level = std::max(std::abs(f), std::abs(f_new));
        x = x_new;
        f = f_new;
        g = g_new;
        res.trace.push_back(f);

        if (sy > 1e-12 * s.norm() * y.norm()) {
            if (!scaled) {
                inv_h *= sy / y.squaredNorm();
                scaled = true;
            }
            const double rho = 1.0 / sy;
            const MatX I = MatX::Identity(n, n);
            inv_h = (I - rho * s * y.transpose()) * inv_h * (I - rho * y * s.transpose()) + rho * s * s.transpose();
        }
        if (change <= opts.rel_tol * level) {
            res.converged = true;
            break;
        }
    }
    res.x = x;
    res.f = f;
    return res;
}

/// Maps unconstrained coordinates of the free parameters onto the space:
/// omega_g, alpha_g through logistic maps onto their boxes; gamma onto
/// [l, min(u, budget - beta_lower)]; beta_g onto [l, min(u, budget - gamma)].
class ThetaTransform {
public:
    explicit ThetaTransform(const ParamSpace& space) : space_(space) {
        for (std::size_t i = 0; i < 4; ++i)
            if (!space.is_fixed(i)) free_.push_back(i);
    }

    Eigen::Index dim() const { return static_cast<Eigen::Index>(free_.size()); }
    const std::vector<std::size_t>& free_indices() const { return free_; }

    /// theta and Jacobian d theta / d z (4 x dim).
    GarchParams to_theta(const VecX& z, MatX* jac = nullptr) const {
        Vec4 u = Vec4::Zero();  // logistic values for free coordinates
        for (Eigen::Index j = 0; j < dim(); ++j) u[static_cast<Eigen::Index>(free_[static_cast<std::size_t>(j)])] = logistic(z[j]);

        Vec4 th;
        Vec4 dth_du = Vec4::Zero();
        double dbeta_dgamma = 0.0;
        for (std::size_t i : {std::size_t{0}, std::size_t{2}}) {
            auto k = static_cast<Eigen::Index>(i);
            if (space_.fixed[i]) {
                th[k] = *space_.fixed[i];
            } else {
                th[k] = space_.lower[k] + (space_.upper[k] - space_.lower[k]) * u[k];
                dth_du[k] = space_.upper[k] - space_.lower[k];
            }
        }
        if (space_.fixed[1]) {
            th[1] = *space_.fixed[1];
        } else {
            const double hi = gamma_upper();
            th[1] = space_.lower[1] + (hi - space_.lower[1]) * u[1];
            dth_du[1] = hi - space_.lower[1];
        }
        if (space_.fixed[3]) {
            th[3] = *space_.fixed[3];
        } else {
            const double room = space_.budget() - th[1];
            const double hi = std::min(space_.upper[3], room);
            th[3] = space_.lower[3] + (hi - space_.lower[3]) * u[3];
            dth_du[3] = hi - space_.lower[3];
            if (room < space_.upper[3]) dbeta_dgamma = -u[3];
        }

        if (jac) {
            jac->setZero(4, dim());
            for (Eigen::Index j = 0; j < dim(); ++j) {
                auto k = static_cast<Eigen::Index>(free_[static_cast<std::size_t>(j)]);
                const double du_dz = u[k] * (1.0 - u[k]);
                (*jac)(k, j) = dth_du[k] * du_dz;
                if (k == 1) (*jac)(3, j) = dbeta_dgamma * dth_du[1] * du_dz;
            }
        }
        return GarchParams::from(th);
    }

    /// Inverse map; points on or outside the boundary are pulled just inside.
    VecX to_z(const GarchParams& theta) const {
        Vec4 th = theta.vec();
        VecX z(dim());
        for (Eigen::Index j = 0; j < dim(); ++j) {
            auto k = static_cast<Eigen::Index>(free_[static_cast<std::size_t>(j)]);
            double lo = space_.lower[k];
            double hi = space_.upper[k];
            if (k == 1) hi = gamma_upper();
            if (k == 3) {
                const double g = space_.fixed[1] ? *space_.fixed[1] : clamp_fraction(th[1], space_.lower[1], gamma_upper());
                hi = std::min(space_.upper[3], space_.budget() - g);
            }
            double frac = (th[k] - lo) / (hi - lo);
            frac = std::clamp(frac, 1e-6, 1.0 - 1e-6);
            z[j] = std::log(frac / (1.0 - frac));
            if (k == 1) th[1] = lo + (hi - lo) * frac;
        }
        return z;
    }

private:
    static double logistic(double z) {
        if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
        const double e = std::exp(z);
        return e / (1.0 + e);
    }

    static double clamp_fraction(double v, double lo, double hi) {
        const double frac = std::clamp((v - lo) / (hi - lo), 1e-6, 1.0 - 1e-6);
        return lo + (hi - lo) * frac;
    }

    double gamma_upper() const {
        const double beta_lo = space_.fixed[3] ? *space_.fixed[3] : space_.lower[3];
        return std::min(space_.upper[1], space_.budget() - beta_lo);
    }

    ParamSpace space_;
    std::vector<std::size_t> free_;
};

} // namespace argi
