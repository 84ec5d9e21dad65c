#pragma once

// Monte-Carlo study over an (n, m) grid: simulate, estimate V_hat and RV,
// fit every configured estimator, forecast h_{n+1} and compare with the
// value implied by the true parameters.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "argi/evaluation.hpp"
#include "argi/io/config.hpp"
#include "argi/io/csv.hpp"
#include "argi/parallel.hpp"
#include "argi/pipeline/estimator_set.hpp"
#include "argi/realized.hpp"
#include "argi/rng.hpp"
#include "argi/simulator.hpp"

namespace argi::pipeline {

inline constexpr const char* kBenchmarkLabel = "PRV";

struct StudyRecord {
    std::size_t n = 0, m = 0, rep = 0;
    std::uint64_t seed = 0;
    std::string estimator;
    std::string space;   ///< "argi", "rgi" or "none" for the benchmark
    std::string method;  ///< method name or "prev_v_hat"
    bool ok = false;
    std::string error;
    GarchParams theta;
    double forecast = std::nan("");
    double target = std::nan("");
    bool converged = false;
    std::size_t clamp_events = 0;
};

struct StudyResult {
    GarchParams truth;
    std::vector<StudyRecord> records;  ///< grid order, then replication, then estimator

    std::vector<const StudyRecord*> select(std::size_t n, std::size_t m, const std::string& estimator) const {
        std::vector<const StudyRecord*> out;
        for (const auto& r : records)
            if (r.n == n && r.m == m && r.estimator == estimator) out.push_back(&r);
        return out;
    }
};

inline std::uint64_t study_seed(std::uint64_t base, std::size_t n, std::size_t m, std::size_t rep) {
    return derive_seed(derive_seed(base, n, m), rep);
}

/// All records for one replication; failures are recorded, not thrown.
inline std::vector<StudyRecord> study_replication(const io::RunConfig& cfg, const GarchParams& truth, std::size_t n,
                                                  std::size_t m, std::size_t rep) {
    const auto specs = estimator_specs(cfg);
    const std::uint64_t seed = study_seed(cfg.seed, n, m, rep);
    std::vector<StudyRecord> out;
    auto base = [&](const std::string& label, const std::string& space, const std::string& method) {
        StudyRecord r;
        r.n = n;
        r.m = m;
        r.rep = rep;
        r.seed = seed;
        r.estimator = label;
        r.space = space;
        r.method = method;
        return r;
    };

    SimOutput sim;
    DailySeries data;
    double target = 0.0;
    try {
        SimConfig sc = cfg.sim_config(n, cfg.study.m_all, m, seed);
        sc.keep_spot_trace = false;
        sim = simulate(sc);
        target = true_h_path(sim, truth).back();
        data = build_daily_series(sim.ticks, cfg.prv);
    } catch (const std::exception& e) {
        for (const auto& s : specs) {
            auto r = base(s.label, s.space, std::string(method_name(s.method)));
            r.error = std::string("replication failed: ") + e.what();
            out.push_back(r);
        }
        auto r = base(kBenchmarkLabel, "none", "prev_v_hat");
        r.error = std::string("replication failed: ") + e.what();
        out.push_back(r);
        return out;
    }

    for (auto& o : run_estimators(cfg, data)) {
        auto r = base(o.spec.label, o.spec.space, std::string(method_name(o.spec.method)));
        r.target = target;
        r.clamp_events = sim.clamp_events;
        if (o.ok()) {
            r.ok = true;
            r.theta = o.fit->theta_hat;
            r.forecast = o.forecast;
            r.converged = o.fit->converged;
        } else {
            r.error = o.error;
        }
        out.push_back(r);
    }
    auto bench = base(kBenchmarkLabel, "none", "prev_v_hat");
    bench.ok = true;
    bench.target = target;
    bench.clamp_events = sim.clamp_events;
    bench.forecast = std::max(data.v_hat.back(), kForecastFloor);
    out.push_back(bench);
    return out;
}

inline StudyResult run_study(const io::RunConfig& cfg) {
    StudyResult result;
    result.truth = cfg.true_theta();
    struct Task { std::size_t n, m, rep; };
    std::vector<Task> tasks;
    for (auto n : cfg.study.n_list)
        for (auto m : cfg.study.m_list)
            for (std::size_t rep = 0; rep < cfg.study.reps; ++rep) tasks.push_back({n, m, rep});
    std::vector<std::vector<StudyRecord>> slots(tasks.size());
    parallel_for(tasks.size(), cfg.threads, [&](std::size_t i) {
        slots[i] = study_replication(cfg, result.truth, tasks[i].n, tasks[i].m, tasks[i].rep);
    });
    for (auto& s : slots)
        for (auto& r : s) result.records.push_back(std::move(r));
    return result;
}

// ---- aggregation ------------------------------------------------------------

struct ParamRow {
    std::size_t n, m;
    std::string estimator, space, method, parameter;
    double truth;
    ErrorDecomposition stats;
    std::size_t excluded;
};

inline std::vector<std::string> estimator_order(const StudyResult& res) {
    std::vector<std::string> names;
    for (const auto& r : res.records)
        if (std::find(names.begin(), names.end(), r.estimator) == names.end()) names.push_back(r.estimator);
    return names;
}

inline std::vector<ParamRow> parameter_table(const StudyResult& res, const io::RunConfig& cfg) {
    std::vector<ParamRow> rows;
    for (auto n : cfg.study.n_list)
        for (auto m : cfg.study.m_list)
            for (const auto& est : estimator_order(res)) {
                if (est == kBenchmarkLabel) continue;
                const auto recs = res.select(n, m, est);
                if (recs.empty()) continue;
                std::size_t excluded = 0;
                std::vector<std::vector<double>> values(4);
                for (const auto* r : recs) {
                    if (!r->ok) {
                        ++excluded;
                        continue;
                    }
                    for (std::size_t p = 0; p < 4; ++p) values[p].push_back(r->theta[p]);
                }
                for (std::size_t p = 0; p < 4; ++p)
                    rows.push_back({n, m, est, recs.front()->space, recs.front()->method, GarchParams::names[p],
                                    res.truth[p], decompose_error(values[p], res.truth[p]), excluded});
            }
    return rows;
}

struct ForecastRow {
    std::size_t n, m;
    std::string estimator;
    double mspe = std::nan(""), qlike = std::nan("");
    std::size_t count = 0, excluded = 0;
};

inline std::vector<ForecastRow> forecast_table(const StudyResult& res, const io::RunConfig& cfg) {
    std::vector<ForecastRow> rows;
    for (auto n : cfg.study.n_list)
        for (auto m : cfg.study.m_list)
            for (const auto& est : estimator_order(res)) {
                const auto recs = res.select(n, m, est);
                if (recs.empty()) continue;
                ForecastRow row{n, m, est};
                std::vector<double> f, t;
                for (const auto* r : recs) {
                    if (!r->ok) {
                        ++row.excluded;
                        continue;
                    }
                    f.push_back(r->forecast);
                    t.push_back(r->target);
                }
                row.count = f.size();
                if (!f.empty()) {
                    row.mspe = 0.0;
                    row.qlike = 0.0;
                    for (std::size_t i = 0; i < f.size(); ++i) {
                        row.mspe += loss_value(Loss::MSPE, f[i], t[i]);
                        row.qlike += loss_value(Loss::QLIKE, f[i], t[i]);
                    }
                    row.mspe /= static_cast<double>(f.size());
                    row.qlike /= static_cast<double>(f.size());
                }
                rows.push_back(row);
            }
    return rows;
}

inline io::Metadata study_metadata(const io::RunConfig& cfg) {
    return {{"command", "study"}, {"seed", std::to_string(cfg.seed)}};
}

inline std::string study_params_csv(const StudyResult& res, const io::RunConfig& cfg) {
    io::CsvWriter w;
    io::write_metadata(w, study_metadata(cfg));
    w.header({"n", "m", "estimator", "space", "method", "parameter", "truth", "bias2", "variance", "mse", "count",
              "excluded"});
    for (const auto& r : parameter_table(res, cfg))
        w.row(io::fields(r.n, r.m, r.estimator, r.space, r.method, r.parameter, r.truth, r.stats.bias2,
                         r.stats.variance, r.stats.mse, r.stats.count, r.excluded));
    return w.str();
}

inline std::string study_forecast_csv(const StudyResult& res, const io::RunConfig& cfg) {
    io::CsvWriter w;
    io::write_metadata(w, study_metadata(cfg));
    w.header({"n", "m", "estimator", "mspe", "qlike", "log_mspe", "log_qlike", "count", "excluded"});
    for (const auto& r : forecast_table(res, cfg))
        w.row(io::fields(r.n, r.m, r.estimator, r.mspe, r.qlike, std::log(r.mspe), std::log(r.qlike), r.count,
                         r.excluded));
    return w.str();
}

inline std::string study_raw_csv(const StudyResult& res, const io::RunConfig& cfg) {
    io::CsvWriter w;
    io::write_metadata(w, study_metadata(cfg));
    w.header({"n", "m", "rep", "seed", "estimator", "space", "method", "status", "omega_g", "gamma", "alpha_g",
              "beta_g", "forecast", "target", "converged", "clamp_events", "error"});
    for (const auto& r : res.records) {
        const bool has_theta = r.ok && r.space != "none";
        auto th = [&](std::size_t i) { return has_theta ? io::format_double(r.theta[i]) : std::string(); };
        w.row({std::to_string(r.n), std::to_string(r.m), std::to_string(r.rep + 1), std::to_string(r.seed),
               r.estimator, r.space, r.method, r.ok ? "ok" : "excluded", th(0), th(1), th(2), th(3),
               r.ok ? io::format_double(r.forecast) : "", io::format_double(r.target), r.converged ? "true" : "false",
               std::to_string(r.clamp_events), r.error});
    }
    return w.str();
}

inline std::string study_exclusions_csv(const StudyResult& res, const io::RunConfig& cfg) {
    io::CsvWriter w;
    io::write_metadata(w, study_metadata(cfg));
    w.header({"n", "m", "estimator", "replications", "excluded"});
    for (const auto& r : forecast_table(res, cfg)) w.row(io::fields(r.n, r.m, r.estimator, r.count + r.excluded, r.excluded));
    return w.str();
}

} // namespace argi::pipeline
