#pragma once

// File formats:
//   ticks  day,time,logprice   time is the fraction of the day in [0,1); each
//                              day starts with its open at time 0 and a final
//                              open-only row for day n+1 closes day n
//   daily  day,v_hat,rv,ret
//   truth  day,true_x,true_iv,true_jv,true_h_next
//   fit    key=value lines

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "argi/error.hpp"
#include "argi/estimators.hpp"
#include "argi/io/csv.hpp"
#include "argi/realized.hpp"
#include "argi/simulator.hpp"

namespace argi::io {

using Metadata = std::vector<std::pair<std::string, std::string>>;

inline void write_metadata(CsvWriter& w, const Metadata& meta) {
    for (const auto& [k, v] : meta) w.comment(k, v);
}

inline std::string ticks_csv(const TickSeries& ticks, const Metadata& meta = {}) {
    CsvWriter w;
    write_metadata(w, meta);
    w.header({"day", "time", "logprice"});
    for (std::size_t d = 0; d < ticks.n_days(); ++d) {
        const auto& day = ticks.days[d];
        const double base = static_cast<double>(d);
        for (std::size_t i = 0; i < day.size(); ++i)
            w.row(fields(d + 1, i == 0 ? 0.0 : day.times[i] - base, day.prices[i]));
    }
    w.row(fields(ticks.n_days() + 1, 0.0, ticks.opens.back()));
    return w.str();
}

inline TickSeries read_ticks(const std::filesystem::path& path) {
    const CsvTable t = read_csv(path);
    const auto c_day = t.column("day");
    const auto c_time = t.column("time");
    const auto c_price = t.column("logprice");
    TickSeries ticks;
    std::size_t current = 0;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto line = t.line_numbers[r];
        const auto day = parse_integer(t.rows[r][c_day], t.file, line, "day");
        const double time = parse_double(t.rows[r][c_time], t.file, line, "time");
        const double price = parse_double(t.rows[r][c_price], t.file, line, "logprice");
        if (!std::isfinite(price)) throw ParseError(t.file, line, "non-finite logprice");
        if (!(time >= 0.0 && time < 1.0)) throw ParseError(t.file, line, "time must lie in [0, 1)");
        if (day < 1) throw ParseError(t.file, line, "day must be >= 1");
        const auto d = static_cast<std::size_t>(day);
        if (d == current + 1) {
            if (time != 0.0) throw ParseError(t.file, line, "day " + std::to_string(d) + " must start with its open at time 0");
            ticks.opens.push_back(price);
            ticks.days.emplace_back();
            ticks.days.back().times.push_back(static_cast<double>(d - 1));
            ticks.days.back().prices.push_back(price);
            current = d;
        } else if (d == current) {
            auto& cur = ticks.days.back();
            const double abs_time = static_cast<double>(d - 1) + time;
            if (!(abs_time > cur.times.back()))
                throw ParseError(t.file, line, "tick times must increase within day " + std::to_string(d));
            cur.times.push_back(abs_time);
            cur.prices.push_back(price);
        } else {
            throw ParseError(t.file, line, "days must be consecutive starting at 1, got day " + std::to_string(d));
        }
    }
    if (ticks.days.size() < 2 || ticks.days.back().size() != 1)
        throw ParseError(t.file, t.rows.empty() ? 1 : t.line_numbers.back(),
                         "tick file must end with an open-only row for the day after the last trading day");
    ticks.days.pop_back();
    ticks.validate();
    return ticks;
}

inline std::string daily_csv(const DailySeries& data, const Metadata& meta = {}) {
    CsvWriter w;
    write_metadata(w, meta);
    if (std::isfinite(data.c_trunc)) w.comment("c_trunc", format_double(data.c_trunc));
    if (!data.negative_days.empty()) w.comment("negative_v_hat_days", std::to_string(data.negative_days.size()));
    w.header({"day", "v_hat", "rv", "ret"});
    for (std::size_t d = 0; d < data.n_days(); ++d) w.row(fields(d + 1, data.v_hat[d], data.rv[d], data.returns[d]));
    return w.str();
}

inline DailySeries read_daily(const std::filesystem::path& path) {
    const CsvTable t = read_csv(path);
    const auto c_day = t.column("day");
    const auto c_v = t.column("v_hat");
    const auto c_rv = t.column("rv");
    const auto c_ret = t.column("ret");
    DailySeries data;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto line = t.line_numbers[r];
        const auto day = parse_integer(t.rows[r][c_day], t.file, line, "day");
        if (day != static_cast<long long>(r + 1)) throw ParseError(t.file, line, "days must be consecutive starting at 1");
        const double v = parse_double(t.rows[r][c_v], t.file, line, "v_hat");
        const double rv = parse_double(t.rows[r][c_rv], t.file, line, "rv");
        const double ret = parse_double(t.rows[r][c_ret], t.file, line, "ret");
        if (!std::isfinite(v) || !std::isfinite(rv) || !std::isfinite(ret)) throw ParseError(t.file, line, "non-finite value");
        data.v_hat.push_back(v);
        data.rv.push_back(rv);
        data.returns.push_back(ret);
        if (v < 0.0) data.negative_days.push_back(r);
    }
    const auto meta = t.metadata();
    if (auto it = meta.find("c_trunc"); it != meta.end()) data.c_trunc = parse_double(it->second, t.file, 1, "c_trunc");
    return data;
}

inline std::string truth_csv(const SimOutput& out, const std::vector<double>& h_path, const Metadata& meta = {}) {
    CsvWriter w;
    write_metadata(w, meta);
    w.comment("clamp_events", std::to_string(out.clamp_events));
    w.header({"day", "true_x", "true_iv", "true_jv", "true_h_next"});
    for (std::size_t d = 0; d < out.true_iv.size(); ++d) {
        const double h = d < h_path.size() ? h_path[d] : std::nan("");
        w.row(fields(d + 1, out.true_x[d], out.true_iv[d], out.true_jv[d], h));
    }
    return w.str();
}

inline std::string spot_trace_csv(const SimOutput& out, std::size_t m_all, const Metadata& meta = {}) {
    CsvWriter w;
    write_metadata(w, meta);
    w.header({"day", "time", "spot_var"});
    const std::size_t per_day = m_all + 1;
    for (std::size_t i = 0; i < out.spot_var_path.size(); ++i) {
        const std::size_t d = i / per_day;
        const double frac = static_cast<double>(i % per_day) / static_cast<double>(m_all);
        w.row(fields(d + 1, frac, out.spot_var_path[i]));
    }
    return w.str();
}

// ---- fit results ----------------------------------------------------------

struct FitFile {
    std::string label;          ///< e.g. "A-huber"
    std::string space;          ///< "argi" or "rgi"
    std::string adjusted_from;  ///< label of the Huber fit an adjusted fit started from
    FitResult fit;
};

inline std::string fit_text(const FitFile& f, const Metadata& meta = {}) {
    std::ostringstream o;
    for (const auto& [k, v] : meta) o << '#' << k << '=' << v << '\n';
    const auto& r = f.fit;
    o << "label=" << f.label << '\n';
    o << "method=" << method_name(r.method) << '\n';
    o << "space=" << f.space << '\n';
    if (!f.adjusted_from.empty()) o << "adjusted_from=" << f.adjusted_from << '\n';
    for (std::size_t i = 0; i < 4; ++i) o << GarchParams::names[i] << '=' << format_double(r.theta_hat[i]) << '\n';
    o << "objective_value=" << format_double(r.objective_value) << '\n';
    o << "n_iterations=" << r.n_iterations << '\n';
    o << "converged=" << (r.converged ? "true" : "false") << '\n';
    o << "projected=" << (r.projected ? "true" : "false") << '\n';
    o << "floor_events=" << r.floor_events << '\n';
    o << "h1=" << format_double(r.h1) << '\n';
    o << "tau=" << format_double(r.tau) << '\n';
    if (r.tuning) {
        o << "tuning.upsilon_hat=" << format_double(r.tuning->upsilon_hat) << '\n';
        o << "tuning.b_hat=" << format_double(r.tuning->b_hat) << '\n';
        o << "tuning.c_tau=" << format_double(r.tuning->c_tau) << '\n';
        o << "tuning.tau_n=" << format_double(r.tuning->tau_n) << '\n';
    }
    o << "v1_hat=" << format_double(r.v1_hat) << '\n';
    for (Eigen::Index i = 0; i < 4; ++i)
        for (Eigen::Index j = 0; j < 4; ++j)
            o << "v2_hat." << i << j << '=' << format_double(r.v2_hat(i, j)) << '\n';
    return o.str();
}

inline FitFile read_fit(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    std::map<std::string, std::pair<std::string, std::size_t>> kv;
    std::string line;
    std::size_t lineno = 0;
    const std::string file = path.string();
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError(file, lineno, "expected key=value");
        kv[line.substr(0, eq)] = {line.substr(eq + 1), lineno};
    }
    auto get = [&](const std::string& key) -> const std::pair<std::string, std::size_t>& {
        auto it = kv.find(key);
        if (it == kv.end()) throw ParseError(file, lineno, "missing key '" + key + "'");
        return it->second;
    };
    auto num = [&](const std::string& key) {
        const auto& [v, l] = get(key);
        return parse_double(v, file, l, key);
    };
    auto flag = [&](const std::string& key) { return get(key).first == "true"; };

    FitFile f;
    f.label = get("label").first;
    f.space = get("space").first;
    if (kv.count("adjusted_from")) f.adjusted_from = kv["adjusted_from"].first;
    auto& r = f.fit;
    try {
        r.method = parse_method(get("method").first);
    } catch (const ValidationError& e) {
        throw ParseError(file, get("method").second, e.what());
    }
    Vec4 th;
    for (std::size_t i = 0; i < 4; ++i) th[static_cast<Eigen::Index>(i)] = num(GarchParams::names[i]);
    r.theta_hat = GarchParams::from(th);
    r.objective_value = num("objective_value");
    r.n_iterations = static_cast<int>(num("n_iterations"));
    r.converged = flag("converged");
    r.projected = flag("projected");
    r.floor_events = static_cast<std::size_t>(num("floor_events"));
    r.h1 = num("h1");
    r.tau = num("tau");
    if (kv.count("tuning.b_hat")) {
        TuningRecord t;
        t.upsilon_hat = num("tuning.upsilon_hat");
        t.b_hat = num("tuning.b_hat");
        t.c_tau = num("tuning.c_tau");
        t.tau_n = num("tuning.tau_n");
        r.tuning = t;
    }
    r.v1_hat = num("v1_hat");
    for (Eigen::Index i = 0; i < 4; ++i)
        for (Eigen::Index j = 0; j < 4; ++j) r.v2_hat(i, j) = num("v2_hat." + std::to_string(i) + std::to_string(j));
    return f;
}

} // namespace argi::io
