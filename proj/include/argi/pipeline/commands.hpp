#pragma once

// Command implementations behind the CLI. Each command buffers its outputs
// and writes them from a single thread once all work has finished.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "argi/io/config.hpp"
#include "argi/io/csv.hpp"
#include "argi/io/files.hpp"
#include "argi/parallel.hpp"
#include "argi/pipeline/backtest.hpp"
#include "argi/pipeline/estimator_set.hpp"
#include "argi/pipeline/study.hpp"
#include "argi/realized.hpp"
#include "argi/rng.hpp"
#include "argi/simulator.hpp"

namespace argi::pipeline {

namespace fs = std::filesystem;

struct CommandOutput {
    std::vector<fs::path> files;
    std::string summary;
};

namespace detail {

inline std::string rep_name(const std::string& stem, std::size_t rep) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "_%03zu.csv", rep + 1);
    return stem + buf;
}

class OutputSet {
public:
    explicit OutputSet(const io::RunConfig& cfg) : dir_(cfg.out) {}

    void add(const std::string& name, std::string text) { items_.emplace_back(name, std::move(text)); }

    CommandOutput write(std::string summary) const {
        io::ensure_directory(dir_);
        CommandOutput out;
        for (const auto& [name, text] : items_) {
            const auto path = dir_ / name;
            io::CsvWriter::write_text(path, text);
            out.files.push_back(path);
        }
        out.summary = std::move(summary);
        return out;
    }

private:
    fs::path dir_;
    std::vector<std::pair<std::string, std::string>> items_;
};

inline void require_input(const io::RunConfig& cfg, const char* what) {
    if (cfg.input.empty()) throw ValidationError(std::string("an input ") + what + " is required (run.input or --input)");
}

/// Tick files are turned into daily series; daily files are read as they are.
inline DailySeries load_daily_input(const io::RunConfig& cfg) {
    const io::CsvTable head = io::read_csv(cfg.input);
    const bool is_ticks = std::find(head.header.begin(), head.header.end(), "logprice") != head.header.end();
    if (is_ticks) return build_daily_series(io::read_ticks(cfg.input), cfg.prv);
    return io::read_daily(cfg.input);
}

} // namespace detail

inline CommandOutput cmd_simulate(const io::RunConfig& cfg) {
    const auto theta = cfg.true_theta();
    struct Files { std::string ticks, truth, trace; };
    std::vector<Files> slots(cfg.sim.reps);
    parallel_for(cfg.sim.reps, cfg.threads, [&](std::size_t rep) {
        const auto seed = derive_seed(cfg.seed, rep);
        const SimOutput sim = simulate(cfg.sim_config(cfg.sim.n_days, cfg.sim.m_all, cfg.sim.m_obs, seed));
        const io::Metadata meta{{"command", "simulate"},
                                {"seed", std::to_string(cfg.seed)},
                                {"replication", std::to_string(rep + 1)},
                                {"replication_seed", std::to_string(seed)}};
        std::vector<double> h;
        try {
            h = true_h_path(sim, theta);
        } catch (const std::invalid_argument&) {
        }
        slots[rep].ticks = io::ticks_csv(sim.ticks, meta);
        slots[rep].truth = io::truth_csv(sim, h, meta);
        if (cfg.sim.spot_trace) slots[rep].trace = io::spot_trace_csv(sim, cfg.sim.m_all, meta);
    });
    detail::OutputSet out(cfg);
    for (std::size_t rep = 0; rep < slots.size(); ++rep) {
        out.add(detail::rep_name("ticks", rep), std::move(slots[rep].ticks));
        out.add(detail::rep_name("truth", rep), std::move(slots[rep].truth));
        if (cfg.sim.spot_trace) out.add(detail::rep_name("spot", rep), std::move(slots[rep].trace));
    }
    return out.write("simulated " + std::to_string(cfg.sim.reps) + " replication(s) of " +
                     std::to_string(cfg.sim.n_days) + " days\n");
}

inline CommandOutput cmd_rv(const io::RunConfig& cfg) {
    detail::require_input(cfg, "tick CSV");
    const auto data = build_daily_series(io::read_ticks(cfg.input), cfg.prv);
    detail::OutputSet out(cfg);
    out.add("daily.csv", io::daily_csv(data, {{"command", "rv"}, {"seed", std::to_string(cfg.seed)}}));
    std::string summary = "computed V_hat and RV for " + std::to_string(data.n_days()) + " days";
    if (!data.negative_days.empty())
        summary += " (" + std::to_string(data.negative_days.size()) + " day(s) with negative V_hat)";
    return out.write(summary + "\n");
}

inline std::string fit_file_name(const EstimatorSpec& s) {
    return "fit_" + s.space + "_" + std::string(method_name(s.method)) + ".txt";
}

inline CommandOutput cmd_fit(const io::RunConfig& cfg) {
    detail::require_input(cfg, "daily or tick CSV");
    const auto data = detail::load_daily_input(cfg);
    const io::Metadata meta{{"command", "fit"}, {"seed", std::to_string(cfg.seed)}};
    detail::OutputSet out(cfg);
    std::ostringstream summary;
    io::CsvWriter table;
    io::write_metadata(table, meta);
    table.header({"estimator", "status", "omega_g", "gamma", "alpha_g", "beta_g", "objective_value", "converged",
                  "b_hat", "tau", "adjusted_from", "error"});
    std::size_t failures = 0;
    for (const auto& o : run_estimators(cfg, data)) {
        if (!o.ok()) {
            ++failures;
            summary << o.spec.label << ": failed: " << o.error << '\n';
            table.row({o.spec.label, "failed", "", "", "", "", "", "", "", "", o.adjusted_from, o.error});
            continue;
        }
        const auto& r = *o.fit;
        out.add(fit_file_name(o.spec), io::fit_text({o.spec.label, o.spec.space, o.adjusted_from, r}, meta));
        table.row(io::fields(o.spec.label, "ok", r.theta_hat.omega_g, r.theta_hat.gamma, r.theta_hat.alpha_g,
                             r.theta_hat.beta_g, r.objective_value, std::string(r.converged ? "true" : "false"),
                             r.tuning ? io::format_double(r.tuning->b_hat) : std::string(), r.tau, o.adjusted_from,
                             std::string()));
        summary << o.spec.label << ": theta = (" << io::format_double(r.theta_hat.omega_g) << ", "
                << io::format_double(r.theta_hat.gamma) << ", " << io::format_double(r.theta_hat.alpha_g) << ", "
                << io::format_double(r.theta_hat.beta_g) << ")" << (r.converged ? "" : " [not converged]") << '\n';
    }
    out.add("fit_summary.csv", table.str());
    auto written = out.write(summary.str());
    if (failures == estimator_specs(cfg).size()) throw EstimationError("every estimator failed:\n" + written.summary);
    return written;
}

inline CommandOutput cmd_backtest(const io::RunConfig& cfg) {
    detail::require_input(cfg, "tick or daily CSV");
    const auto data = detail::load_daily_input(cfg);
    const auto res = run_backtest(cfg, data);
    detail::OutputSet out(cfg);
    out.add("backtest_forecasts.csv", backtest_forecasts_csv(res, cfg));
    out.add("backtest_metrics.csv", backtest_metrics_csv(res, cfg));
    out.add("backtest_dm.csv", backtest_dm_csv(res, cfg));
    out.add("backtest_acf.csv", backtest_acf_csv(res, cfg));
    out.add("backtest_acf_lags.csv", backtest_acf_lags_csv(res, cfg));
    out.add("backtest_tuning.csv", backtest_tuning_csv(res, cfg));
    out.add("backtest_skipped.csv", backtest_skipped_csv(res, cfg));
    std::ostringstream s;
    s << "backtest: " << res.kept.size() << " forecast day(s), " << (res.windows.size() - res.kept.size())
      << " skipped\n";
    s << std::left << std::setw(8) << "" << std::setw(13) << "mspe" << std::setw(13) << "rmspe" << "qlike\n";
    for (std::size_t e = 0; e < res.estimators.size(); ++e)
        s << std::setw(8) << res.estimators[e] << std::setw(13) << io::format_short(res.metrics[e].mspe)
          << std::setw(13) << io::format_short(res.metrics[e].rmspe) << io::format_short(res.metrics[e].qlike)
          << '\n';
    out.add("backtest_summary.txt", s.str());
    return out.write(s.str());
}

inline CommandOutput cmd_study(const io::RunConfig& cfg) {
    const auto res = run_study(cfg);
    detail::OutputSet out(cfg);
    out.add("study_params.csv", study_params_csv(res, cfg));
    out.add("study_forecast.csv", study_forecast_csv(res, cfg));
    out.add("study_raw.csv", study_raw_csv(res, cfg));
    out.add("study_exclusions.csv", study_exclusions_csv(res, cfg));
    std::ostringstream s;
    s << "study: " << res.records.size() << " estimator runs\n";
    for (const auto& r : forecast_table(res, cfg))
        s << "n=" << r.n << " m=" << r.m << " " << r.estimator << " mspe=" << io::format_short(r.mspe)
          << " qlike=" << io::format_short(r.qlike) << " excluded=" << r.excluded << '\n';
    return out.write(s.str());
}

/// Collects fit results and any backtest or study tables found in the input directory.
inline CommandOutput cmd_report(const io::RunConfig& cfg) {
    const fs::path dir = cfg.input.empty() ? fs::path(cfg.out) : fs::path(cfg.input);
    if (!fs::is_directory(dir)) throw IoError("report input '" + dir.string() + "' is not a directory");
    std::vector<fs::path> entries;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file()) entries.push_back(e.path());
    std::sort(entries.begin(), entries.end());

    std::ostringstream s;
    std::size_t sections = 0;
    for (const auto& p : entries) {
        const auto name = p.filename().string();
        if (name.rfind("fit_", 0) == 0 && p.extension() == ".txt") {
            const auto f = io::read_fit(p);
            const auto& r = f.fit;
            s << f.label << " (" << method_name(r.method) << ", " << f.space << ")";
            if (!f.adjusted_from.empty()) s << " adjusted from " << f.adjusted_from;
            s << "\n  theta = (" << io::format_double(r.theta_hat.omega_g) << ", " << io::format_double(r.theta_hat.gamma)
              << ", " << io::format_double(r.theta_hat.alpha_g) << ", " << io::format_double(r.theta_hat.beta_g) << ")\n";
            s << "  objective " << io::format_double(r.objective_value) << ", converged " << (r.converged ? "yes" : "no")
              << ", floor events " << r.floor_events << '\n';
            if (r.tuning)
                s << "  tuning: upsilon_hat " << io::format_double(r.tuning->upsilon_hat) << ", b_hat "
                  << io::format_double(r.tuning->b_hat) << ", tau_n " << io::format_double(r.tuning->tau_n) << '\n';
            ++sections;
        } else if (name == "backtest_metrics.csv" || name == "backtest_dm.csv" || name == "backtest_acf.csv" ||
                   name == "study_params.csv" || name == "study_forecast.csv") {
            const auto t = io::read_csv(p);
            s << name << ":\n";
            for (const auto& row : t.rows) {
                s << ' ';
                for (std::size_t i = 0; i < row.size(); ++i) s << ' ' << t.header[i] << '=' << row[i];
                s << '\n';
            }
            ++sections;
        }
    }
    if (sections == 0) throw IoError("no fit results or report tables found in '" + dir.string() + "'");
    detail::OutputSet out(cfg);
    out.add("report.txt", s.str());
    return out.write(s.str());
}

} // namespace argi::pipeline
