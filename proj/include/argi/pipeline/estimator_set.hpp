#pragma once

// Runs the configured (space, method) grid on one daily series and returns
// one-day-ahead forecasts. A bias-adjusted fit reuses the Huber fit of the
// same space instead of refitting it.

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "argi/estimators.hpp"
#include "argi/garch_filter.hpp"
#include "argi/io/config.hpp"

namespace argi::pipeline {

inline std::string method_label(Method m) {
    switch (m) {
    case Method::OLS: return "OLS";
    case Method::Huber: return "Hub";
    case Method::AdjHuber: return "Adj";
    case Method::QMLE: return "QMLE";
    }
    return "?";
}

/// "A-Hub" for the full space, "R-Hub" with alpha_g frozen at zero.
inline std::string estimator_label(const std::string& space, Method m) {
    return std::string(space == "rgi" ? "R-" : "A-") + method_label(m);
}

struct EstimatorSpec {
    std::string label;
    std::string space;
    Method method;
};

inline std::vector<EstimatorSpec> estimator_specs(const io::RunConfig& cfg) {
    std::vector<EstimatorSpec> out;
    for (const auto& space : cfg.fit.spaces)
        for (Method m : cfg.fit.methods) out.push_back({estimator_label(space, m), space, m});
    return out;
}

struct EstimatorOutcome {
    EstimatorSpec spec;
    std::optional<FitResult> fit;
    std::string adjusted_from;
    double forecast = std::nan("");
    std::string error;  ///< empty on success

    bool ok() const { return error.empty(); }
};

inline std::vector<EstimatorOutcome> run_estimators(const io::RunConfig& cfg, const DailySeries& data) {
    const auto specs = estimator_specs(cfg);
    const FitOptions opts = cfg.fit_options();
    std::map<std::string, FitResult> huber_fits;
    std::map<std::string, std::string> huber_errors;

    auto huber_for = [&](const std::string& space) -> const FitResult& {
        if (auto it = huber_fits.find(space); it != huber_fits.end()) return it->second;
        if (auto it = huber_errors.find(space); it != huber_errors.end()) throw EstimationError(it->second);
        try {
            return huber_fits.emplace(space, fit(Method::Huber, data, cfg.space_for(space), opts)).first->second;
        } catch (const std::exception& e) {
            huber_errors[space] = e.what();
            throw;
        }
    };

    std::vector<EstimatorOutcome> out;
    for (const auto& spec : specs) {
        EstimatorOutcome o{spec, std::nullopt, {}, std::nan(""), {}};
        try {
            const ParamSpace space = cfg.space_for(spec.space);
            FitResult r;
            if (spec.method == Method::Huber) {
                r = huber_for(spec.space);
            } else if (spec.method == Method::AdjHuber) {
                r = bias_adjust(huber_for(spec.space), data, space);
                o.adjusted_from = estimator_label(spec.space, Method::Huber);
            } else {
                r = fit(spec.method, data, space, opts);
            }
            o.forecast = forecast_next(r.theta_hat, data, r.h1);
            o.fit = std::move(r);
        } catch (const std::exception& e) {
            o.error = e.what();
        }
        out.push_back(std::move(o));
    }
    return out;
}

} // namespace argi::pipeline
