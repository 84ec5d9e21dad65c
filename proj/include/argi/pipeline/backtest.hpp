#pragma once

// Rolling-window out-of-sample evaluation. For each day d after the first
// `window` days, every estimator is refitted (with re-tuned Huber threshold)
// on days d-window .. d-1 and its forecast is scored against V_hat_d.

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "argi/baselines.hpp"
#include "argi/evaluation.hpp"
#include "argi/io/config.hpp"
#include "argi/io/csv.hpp"
#include "argi/parallel.hpp"
#include "argi/pipeline/estimator_set.hpp"

namespace argi::pipeline {

inline constexpr const char* kHarLabel = "HAR";
inline constexpr std::size_t kMaxAcfLag = 30;

struct WindowOutcome {
    std::size_t day = 0;  ///< 1-based forecast day
    double target = 0.0;
    std::vector<double> forecasts;  ///< per estimator; HAR holds the raw prediction
    std::optional<TuningRecord> tuning;
    std::string skipped;  ///< reason, empty when the day is kept
};

struct DmRow {
    std::string loss, reference, estimator;
    std::optional<DmResult> result;
    std::string note;
};

struct AcfRow {
    std::string estimator;
    std::optional<PersistenceResult> result;
    std::string note;
};

struct BacktestResult {
    std::vector<std::string> estimators;
    std::vector<WindowOutcome> windows;  ///< every candidate day, kept or skipped
    std::vector<std::size_t> kept;       ///< indices into windows
    std::vector<std::vector<double>> forecasts;  ///< [estimator][kept row], HAR capped and floored
    std::vector<double> targets;                 ///< V_hat on kept rows
    std::vector<Metrics> metrics;
    std::vector<std::string> metric_notes;
    std::vector<DmRow> dm;
    std::vector<AcfRow> acf;
};

inline WindowOutcome backtest_window(const io::RunConfig& cfg, const DailySeries& data, std::size_t day_index) {
    const std::size_t w = cfg.backtest.window;
    WindowOutcome o;
    o.day = day_index + 1;
    o.target = data.v_hat[day_index];
    const DailySeries win = data.slice(day_index - w, w);
    for (auto& e : run_estimators(cfg, win)) {
        if (!e.ok()) {
            if (o.skipped.empty()) o.skipped = e.spec.label + ": " + e.error;
            o.forecasts.push_back(std::nan(""));
            continue;
        }
        if (!o.tuning && e.fit->tuning) o.tuning = e.fit->tuning;
        o.forecasts.push_back(e.forecast);
    }
    try {
        o.forecasts.push_back(har_predict(har_fit(win.rv), win.rv));
    } catch (const std::exception& e) {
        if (o.skipped.empty()) o.skipped = std::string(kHarLabel) + ": " + e.what();
        o.forecasts.push_back(std::nan(""));
    }
    return o;
}

inline BacktestResult run_backtest(const io::RunConfig& cfg, const DailySeries& data) {
    const std::size_t w = cfg.backtest.window;
    if (data.n_days() <= w)
        throw InsufficientDataError("backtest needs more than " + std::to_string(w) + " days, got " +
                                    std::to_string(data.n_days()));
    BacktestResult res;
    for (const auto& s : estimator_specs(cfg)) res.estimators.push_back(s.label);
    res.estimators.push_back(kHarLabel);
    const std::size_t k = res.estimators.size();

    res.windows.resize(data.n_days() - w);
    parallel_for(res.windows.size(), cfg.threads,
                 [&](std::size_t i) { res.windows[i] = backtest_window(cfg, data, w + i); });

    res.forecasts.assign(k, {});
    for (std::size_t i = 0; i < res.windows.size(); ++i) {
        const auto& o = res.windows[i];
        if (!o.skipped.empty()) continue;
        res.kept.push_back(i);
        res.targets.push_back(o.target);
        for (std::size_t e = 0; e < k; ++e) res.forecasts[e].push_back(o.forecasts[e]);
    }
    for (std::size_t e = 0; e + 1 < k; ++e) floor_forecasts(res.forecasts[e]);
    res.forecasts[k - 1] = har_forecast_batch(res.forecasts[k - 1]);

    for (std::size_t e = 0; e < k; ++e) {
        try {
            res.metrics.push_back(metrics(res.forecasts[e], res.targets));
            res.metric_notes.emplace_back();
        } catch (const std::exception& ex) {
            res.metrics.push_back(Metrics{std::nan(""), std::nan(""), std::nan(""), res.targets.size(), 0});
            res.metric_notes.emplace_back(ex.what());
        }
    }

    DmOptions dm_opts;
    if (cfg.backtest.dm_lags > 0) dm_opts.hac_lags = cfg.backtest.dm_lags;
    dm_opts.iid_se = cfg.backtest.dm_iid;
    dm_opts.two_sided = cfg.backtest.two_sided;
    auto index_of = [&](const std::string& label) -> std::optional<std::size_t> {
        for (std::size_t e = 0; e < k; ++e)
            if (res.estimators[e] == label) return e;
        return std::nullopt;
    };
    struct Comparison { Loss loss; std::string reference; };
    for (const auto& [loss, reference] : {Comparison{Loss::MSPE, "A-Hub"}, Comparison{Loss::RMSPE, "A-Hub"},
                                          Comparison{Loss::QLIKE, "A-QMLE"}}) {
        const auto ref = index_of(reference);
        if (!ref) continue;
        const auto ref_loss = loss_series(loss, res.forecasts[*ref], res.targets);
        for (std::size_t e = 0; e < k; ++e) {
            if (e == *ref) continue;
            DmRow row{loss_name(loss), reference, res.estimators[e], std::nullopt, {}};
            try {
                row.result = dm_test(ref_loss, loss_series(loss, res.forecasts[e], res.targets), dm_opts);
            } catch (const DegenerateError&) {
                row.note = "no difference";
            } catch (const std::exception& ex) {
                row.note = ex.what();
            }
            res.dm.push_back(std::move(row));
        }
    }

    for (std::size_t e = 0; e < k; ++e) {
        AcfRow row{res.estimators[e], std::nullopt, {}};
        try {
            row.result = persistence_regression(res.targets, res.forecasts[e], kMaxAcfLag);
        } catch (const std::exception& ex) {
            row.note = ex.what();
        }
        res.acf.push_back(std::move(row));
    }
    return res;
}

inline io::Metadata backtest_metadata(const io::RunConfig& cfg) {
    return {{"command", "backtest"}, {"seed", std::to_string(cfg.seed)}, {"window", std::to_string(cfg.backtest.window)}};
}

inline std::string backtest_forecasts_csv(const BacktestResult& res, const io::RunConfig& cfg) {
    io::CsvWriter w;
    io::write_metadata(w, backtest_metadata(cfg));
    std::vector<std::string> head{"day", "v_hat"};
    head.insert(head.end(), res.estimators.begin(), res.estimators.end());
    w.header(head);
    for (std::size_t r = 0; r < res.kept.size(); ++r) {
        std::vector<std::string> row{std::to_string(res.windows[res.kept[r]].day), io::format_double(res.targets[r])};
        for (const auto& f : res.forecasts) row.push_back(io::format_double(f[r]));
        w.row(row);
    }
    return w.str();
}

inline std::string backtest_metrics_csv(const BacktestResult& res, const io::RunConfig& cfg) {
    io::CsvWriter w;
    io::write_metadata(w, backtest_metadata(cfg));
    w.header({"estimator", "mspe", "rmspe", "qlike", "n", "rmspe_excluded", "note"});
    for (std::size_t e = 0; e < res.estimators.size(); ++e) {
        const auto& m = res.metrics[e];
        w.row(io::fields(res.estimators[e], m.mspe, m.rmspe, m.qlike, m.n, m.rmspe_excluded, res.metric_notes[e]));
    }
    return w.str();
}

inline std::string backtest_dm_csv(const BacktestResult& res, const io::RunConfig& cfg) {
    io::CsvWriter w;
    io::write_metadata(w, backtest_metadata(cfg));
    w.header({"loss", "reference", "estimator", "statistic", "p_value", "n", "hac_lags", "note"});
    for (const auto& d : res.dm) {
        if (d.result)
            w.row(io::fields(d.loss, d.reference, d.estimator, d.result->statistic, d.result->p_value, d.result->n,
                             d.result->lags, d.note));
        else
            w.row({d.loss, d.reference, d.estimator, "", "", "", "", d.note});
    }
    return w.str();
}

inline std::string backtest_acf_csv(const BacktestResult& res, const io::RunConfig& cfg) {
    io::CsvWriter w;
    io::write_metadata(w, backtest_metadata(cfg));
    w.header({"estimator", "max_abs_acf", "intercept", "slope", "degenerate", "note"});
    for (const auto& a : res.acf) {
        if (a.result)
            w.row(io::fields(a.estimator, a.result->max_abs_acf, a.result->intercept, a.result->slope,
                             std::string(a.result->degenerate ? "true" : "false"), a.note));
        else
            w.row({a.estimator, "", "", "", "", a.note});
    }
    return w.str();
}

/// Lag-by-estimator autocorrelation table for plotting.
inline std::string backtest_acf_lags_csv(const BacktestResult& res, const io::RunConfig& cfg) {
    io::CsvWriter w;
    io::write_metadata(w, backtest_metadata(cfg));
    std::vector<std::string> head{"lag"};
    for (const auto& a : res.acf) head.push_back(a.estimator);
    w.header(head);
    for (std::size_t lag = 0; lag <= kMaxAcfLag; ++lag) {
        std::vector<std::string> row{std::to_string(lag)};
        for (const auto& a : res.acf)
            row.push_back(a.result && lag < a.result->acf.size() ? io::format_double(a.result->acf[lag]) : "");
        w.row(row);
    }
    return w.str();
}

inline std::string backtest_tuning_csv(const BacktestResult& res, const io::RunConfig& cfg) {
    io::CsvWriter w;
    io::write_metadata(w, backtest_metadata(cfg));
    w.header({"day", "upsilon_hat", "b_hat", "c_tau", "tau_n"});
    for (const auto& o : res.windows)
        if (o.tuning)
            w.row(io::fields(o.day, o.tuning->upsilon_hat, o.tuning->b_hat, o.tuning->c_tau, o.tuning->tau_n));
    return w.str();
}

inline std::string backtest_skipped_csv(const BacktestResult& res, const io::RunConfig& cfg) {
    io::CsvWriter w;
    io::write_metadata(w, backtest_metadata(cfg));
    w.header({"day", "reason"});
    for (const auto& o : res.windows)
        if (!o.skipped.empty()) w.row(io::fields(o.day, o.skipped));
    return w.str();
}

} // namespace argi::pipeline
