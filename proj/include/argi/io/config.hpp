#pragma once

// Flat key=value run configuration with dotted sections:
//   sim.*  structural.*  theta.*  prv.*  tuning.*  fit.*  space.*
//   study.*  backtest.*  run.*
// Blank lines and lines starting with '#' are ignored. Unknown keys, bad
// values and failed section checks are reported with file and line.

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "argi/error.hpp"
#include "argi/estimators.hpp"
#include "argi/io/csv.hpp"
#include "argi/model.hpp"
#include "argi/realized.hpp"
#include "argi/simulator.hpp"
#include "argi/tail_tuning.hpp"

namespace argi::io {

struct SimSection {
    std::size_t n_days = 125;
    std::size_t m_all = 23400;
    std::size_t m_obs = 390;
    std::size_t reps = 1;
    bool spot_trace = false;
};

struct FitSection {
    std::vector<Method> methods{Method::OLS, Method::Huber, Method::AdjHuber, Method::QMLE};
    std::vector<std::string> spaces{"argi", "rgi"};
    std::optional<double> h1;
    std::optional<double> tau;
    int max_iter = 500;
};

struct StudySection {
    std::vector<std::size_t> n_list{125};
    std::vector<std::size_t> m_list{390};
    std::size_t reps = 100;
    std::size_t m_all = 23400;
};

struct BacktestSection {
    std::size_t window = 125;
    std::size_t dm_lags = 0;  ///< 0: floor(n^{1/3})
    bool dm_iid = false;
    bool two_sided = false;
};

struct RunConfig {
    SimSection sim;
    StructuralParams structural;
    std::array<std::optional<double>, 4> theta{};  ///< overrides coordinates of the theta implied by structural.*
    PrvConfig prv;
    TuningConfig tuning;
    FitSection fit;
    ParamSpace space;
    StudySection study;
    BacktestSection backtest;
    std::uint64_t seed = 20240101;
    std::size_t threads = 1;
    std::string out = "out";
    std::string input;

    /// Truth for studies and truth files: the mapped structural parameters
    /// with any theta.* overrides applied.
    GarchParams true_theta() const {
        const bool all = std::all_of(theta.begin(), theta.end(), [](const auto& t) { return t.has_value(); });
        Vec4 th = all ? Vec4::Zero() : structural_to_garch(structural).vec();
        for (std::size_t i = 0; i < 4; ++i)
            if (theta[i]) th[static_cast<Eigen::Index>(i)] = *theta[i];
        return GarchParams::from(th);
    }

    FitOptions fit_options() const {
        FitOptions o;
        o.h1 = fit.h1;
        o.tau = fit.tau;
        o.tuning = tuning;
        o.minimizer.max_iter = fit.max_iter;
        return o;
    }

    ParamSpace space_for(std::string_view name) const {
        ParamSpace s = space;
        if (name == "rgi") s.fixed[2] = 0.0;
        return s;
    }

    SimConfig sim_config(std::size_t n_days, std::size_t m_all, std::size_t m_obs, std::uint64_t seed_value) const {
        SimConfig c;
        c.n_days = n_days;
        c.m_all = m_all;
        c.m_obs = m_obs;
        c.seed = seed_value;
        c.params = structural;
        c.keep_spot_trace = sim.spot_trace;
        return c;
    }
};

namespace detail {

inline std::string trim(std::string_view s) {
    std::size_t a = 0, b = s.size();
    while (a < b && (s[a] == ' ' || s[a] == '\t')) ++a;
    while (b > a && (s[b - 1] == ' ' || s[b - 1] == '\t' || s[b - 1] == '\r')) --b;
    return std::string(s.substr(a, b - a));
}

inline std::vector<std::string> split_list(std::string_view s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(trim(cur));
    return out;
}

struct Where {
    const std::string& file;
    std::size_t line;
};

inline double to_real(const std::string& v, Where w, std::string_view key) {
    const double x = parse_double(v, w.file, w.line, key);
    if (!std::isfinite(x)) throw ParseError(w.file, w.line, std::string(key) + " must be finite");
    return x;
}

inline std::size_t to_count(const std::string& v, Where w, std::string_view key) {
    const auto x = parse_integer(v, w.file, w.line, key);
    if (x < 0) throw ParseError(w.file, w.line, std::string(key) + " must be >= 0");
    return static_cast<std::size_t>(x);
}

inline bool to_bool(const std::string& v, Where w, std::string_view key) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ParseError(w.file, w.line, std::string(key) + " must be true or false, got '" + v + "'");
}

inline std::string list_text(const std::vector<std::size_t>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
}

inline std::string opt_text(const std::optional<double>& v) { return v ? format_double(*v) : "auto"; }

struct Key {
    std::string name;
    std::function<void(RunConfig&, const std::string&, Where)> set;
    std::function<std::string(const RunConfig&)> get;
};

template <typename Get, typename Set>
Key make_key(std::string name, Get get, Set set) {
    return Key{std::move(name), set, get};
}

#define ARGI_REAL(KEY, FIELD, CHECK, MSG)                                                                  \
    make_key(                                                                                              \
        KEY, [](const RunConfig& c) { return format_double(c.FIELD); },                                   \
        [](RunConfig& c, const std::string& v, Where w) {                                                  \
            const double x = to_real(v, w, KEY);                                                           \
            if (!(CHECK)) throw ParseError(w.file, w.line, std::string(KEY) + " " MSG);                   \
            c.FIELD = x;                                                                                   \
        })
#define ARGI_COUNT(KEY, FIELD, CHECK, MSG)                                                                 \
    make_key(                                                                                              \
        KEY, [](const RunConfig& c) { return std::to_string(c.FIELD); },                                  \
        [](RunConfig& c, const std::string& v, Where w) {                                                  \
            const std::size_t x = to_count(v, w, KEY);                                                     \
            if (!(CHECK)) throw ParseError(w.file, w.line, std::string(KEY) + " " MSG);                   \
            c.FIELD = x;                                                                                   \
        })
#define ARGI_BOOL(KEY, FIELD)                                                                              \
    make_key(                                                                                              \
        KEY, [](const RunConfig& c) { return std::string(c.FIELD ? "true" : "false"); },                  \
        [](RunConfig& c, const std::string& v, Where w) { c.FIELD = to_bool(v, w, KEY); })

inline std::vector<std::size_t> to_counts(const std::string& v, Where w, std::string_view key) {
    std::vector<std::size_t> out;
    for (const auto& item : split_list(v)) out.push_back(to_count(item, w, key));
    if (out.empty()) throw ParseError(w.file, w.line, std::string(key) + " must list at least one value");
    return out;
}

inline const std::vector<Key>& keys() {
    static const std::vector<Key> table = [] {
        std::vector<Key> k;
        k.push_back(ARGI_COUNT("sim.n_days", sim.n_days, x >= 2, "must be >= 2"));
        k.push_back(ARGI_COUNT("sim.m_all", sim.m_all, x >= 2, "must be >= 2"));
        k.push_back(ARGI_COUNT("sim.m_obs", sim.m_obs, x >= 2, "must be >= 2"));
        k.push_back(ARGI_COUNT("sim.reps", sim.reps, x >= 1, "must be >= 1"));
        k.push_back(ARGI_BOOL("sim.spot_trace", sim.spot_trace));

        k.push_back(ARGI_REAL("structural.mu", structural.mu, true, ""));
        k.push_back(ARGI_REAL("structural.omega1", structural.omega1, x >= 0.0, "must be >= 0"));
        k.push_back(ARGI_REAL("structural.omega2", structural.omega2, x >= 0.0, "must be >= 0"));
        k.push_back(ARGI_REAL("structural.gamma", structural.gamma, x >= 0.0 && x < 1.0, "must lie in [0, 1)"));
        k.push_back(ARGI_REAL("structural.alpha", structural.alpha, x >= 0.0, "must be >= 0"));
        k.push_back(ARGI_REAL("structural.beta", structural.beta, x >= 0.0, "must be >= 0"));
        k.push_back(ARGI_REAL("structural.nu", structural.nu, x >= 0.0, "must be >= 0"));
        k.push_back(ARGI_REAL("structural.noise_sd", structural.noise_sd, x >= 0.0, "must be >= 0"));
        k.push_back(ARGI_REAL("structural.x0", structural.x0, true, ""));
        k.push_back(ARGI_REAL("structural.sigma0_sq", structural.sigma0_sq, x > 0.0, "must be > 0"));
        k.push_back(ARGI_REAL("structural.lambda", structural.jump.intensity_lambda, x >= 0.0, "must be >= 0"));
        k.push_back(ARGI_REAL("structural.c_j", structural.jump.c_j, x > 0.0, "must be > 0"));
        k.push_back(ARGI_REAL("structural.df", structural.jump.df, x > 4.0, "must be > 4"));
        k.push_back(ARGI_REAL("structural.mean_omega_l", structural.jump.mean_omega_L, true, ""));

        for (std::size_t i = 0; i < 4; ++i) {
            const std::string name = std::string("theta.") + GarchParams::names[i];
            k.push_back(make_key(
                name,
                [i](const RunConfig& c) { return opt_text(c.theta[i]); },
                [i, name](RunConfig& c, const std::string& v, Where w) {
                    if (v == "auto")
                        c.theta[i].reset();
                    else
                        c.theta[i] = to_real(v, w, name);
                }));
        }

        k.push_back(ARGI_COUNT("prv.bandwidth", prv.bandwidth, x != 1, "must be 0 (auto) or >= 2"));
        k.push_back(ARGI_REAL("prv.trunc_exponent", prv.trunc_exponent, x > 0.0, "must be > 0"));
        k.push_back(ARGI_REAL("prv.c_trunc_multiplier", prv.c_trunc_multiplier, x > 0.0, "must be > 0"));
        k.push_back(ARGI_COUNT("prv.min_ticks", prv.min_ticks, x >= 3, "must be >= 3"));
        k.push_back(ARGI_BOOL("prv.pooled", prv.pooled_threshold));
        k.push_back(ARGI_BOOL("prv.overnight", prv.overnight));

        k.push_back(ARGI_REAL("tuning.c_b", tuning.c_b, x > 1.0 && x <= 2.0, "must lie in (1, 2]"));
        k.push_back(ARGI_REAL("tuning.c", tuning.c_multiplier, x > 0.0, "must be > 0"));
        k.push_back(ARGI_REAL("tuning.k_multiplier", tuning.k_multiplier, x > 0.0, "must be > 0"));

        k.push_back(make_key(
            "fit.methods",
            [](const RunConfig& c) {
                std::string s;
                for (std::size_t i = 0; i < c.fit.methods.size(); ++i)
                    s += (i ? "," : "") + std::string(method_name(c.fit.methods[i]));
                return s;
            },
            [](RunConfig& c, const std::string& v, Where w) {
                std::vector<Method> ms;
                for (const auto& item : split_list(v)) {
                    try {
                        const Method m = parse_method(item);
                        if (std::find(ms.begin(), ms.end(), m) == ms.end()) ms.push_back(m);
                    } catch (const ValidationError& e) {
                        throw ParseError(w.file, w.line, e.what());
                    }
                }
                c.fit.methods = ms;
            }));
        k.push_back(make_key(
            "fit.spaces",
            [](const RunConfig& c) {
                std::string s;
                for (std::size_t i = 0; i < c.fit.spaces.size(); ++i) s += (i ? "," : "") + c.fit.spaces[i];
                return s;
            },
            [](RunConfig& c, const std::string& v, Where w) {
                std::vector<std::string> ss;
                for (const auto& item : split_list(v)) {
                    if (item != "argi" && item != "rgi")
                        throw ParseError(w.file, w.line, "fit.spaces entries must be argi or rgi, got '" + item + "'");
                    if (std::find(ss.begin(), ss.end(), item) == ss.end()) ss.push_back(item);
                }
                c.fit.spaces = ss;
            }));
        for (auto [name, member] : {std::pair{"fit.h1", &FitSection::h1}, std::pair{"fit.tau", &FitSection::tau}}) {
            const std::string key = name;
            k.push_back(make_key(
                key, [member](const RunConfig& c) { return opt_text(c.fit.*member); },
                [member, key](RunConfig& c, const std::string& v, Where w) {
                    if (v == "auto") {
                        (c.fit.*member).reset();
                        return;
                    }
                    const double x = to_real(v, w, key);
                    if (!(x > 0.0)) throw ParseError(w.file, w.line, key + " must be > 0 or auto");
                    c.fit.*member = x;
                }));
        }
        k.push_back(make_key(
            "fit.max_iter", [](const RunConfig& c) { return std::to_string(c.fit.max_iter); },
            [](RunConfig& c, const std::string& v, Where w) {
                const auto x = to_count(v, w, "fit.max_iter");
                if (x < 1 || x > 1000000) throw ParseError(w.file, w.line, "fit.max_iter must lie in [1, 1000000]");
                c.fit.max_iter = static_cast<int>(x);
            }));

        for (std::size_t i = 0; i < 4; ++i) {
            for (const bool lower : {true, false}) {
                const std::string key = std::string("space.") + (lower ? "lower." : "upper.") + GarchParams::names[i];
                k.push_back(make_key(
                    key,
                    [i, lower](const RunConfig& c) {
                        return format_double(lower ? c.space.lower[static_cast<Eigen::Index>(i)]
                                                   : c.space.upper[static_cast<Eigen::Index>(i)]);
                    },
                    [i, lower, key](RunConfig& c, const std::string& v, Where w) {
                        const double x = to_real(v, w, key);
                        if (lower && x < 0.0) throw ParseError(w.file, w.line, key + " must be >= 0");
                        (lower ? c.space.lower : c.space.upper)[static_cast<Eigen::Index>(i)] = x;
                    }));
            }
        }
        k.push_back(ARGI_REAL("space.margin", space.stationarity_margin, x > 0.0 && x < 1.0, "must lie in (0, 1)"));

        k.push_back(make_key(
            "study.n", [](const RunConfig& c) { return list_text(c.study.n_list); },
            [](RunConfig& c, const std::string& v, Where w) {
                auto xs = to_counts(v, w, "study.n");
                for (auto x : xs)
                    if (x < 20) throw ParseError(w.file, w.line, "study.n entries must be >= 20");
                c.study.n_list = xs;
            }));
        k.push_back(make_key(
            "study.m", [](const RunConfig& c) { return list_text(c.study.m_list); },
            [](RunConfig& c, const std::string& v, Where w) {
                auto xs = to_counts(v, w, "study.m");
                for (auto x : xs)
                    if (x < 2) throw ParseError(w.file, w.line, "study.m entries must be >= 2");
                c.study.m_list = xs;
            }));
        k.push_back(ARGI_COUNT("study.reps", study.reps, x >= 1, "must be >= 1"));
        k.push_back(ARGI_COUNT("study.m_all", study.m_all, x >= 2, "must be >= 2"));

        k.push_back(ARGI_COUNT("backtest.window", backtest.window, x >= 60, "must be >= 60"));
        k.push_back(ARGI_COUNT("backtest.dm_lags", backtest.dm_lags, true, ""));
        k.push_back(ARGI_BOOL("backtest.dm_iid", backtest.dm_iid));
        k.push_back(ARGI_BOOL("backtest.two_sided", backtest.two_sided));

        k.push_back(make_key(
            "run.seed", [](const RunConfig& c) { return std::to_string(c.seed); },
            [](RunConfig& c, const std::string& v, Where w) {
                std::uint64_t x = 0;
                auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
                if (v.empty() || ec != std::errc{} || p != v.data() + v.size())
                    throw ParseError(w.file, w.line, "run.seed must be an unsigned 64-bit integer");
                c.seed = x;
            }));
        k.push_back(ARGI_COUNT("run.threads", threads, x >= 1 && x <= 1024, "must lie in [1, 1024]"));
        k.push_back(make_key(
            "run.out", [](const RunConfig& c) { return c.out; },
            [](RunConfig& c, const std::string& v, Where w) {
                if (v.empty()) throw ParseError(w.file, w.line, "run.out must not be empty");
                c.out = v;
            }));
        k.push_back(make_key(
            "run.input", [](const RunConfig& c) { return c.input; },
            [](RunConfig& c, const std::string& v, Where) { c.input = v; }));
        return k;
    }();
    return table;
}

#undef ARGI_REAL
#undef ARGI_COUNT
#undef ARGI_BOOL

} // namespace detail

/// Accumulates settings from files and overrides, then checks cross-field constraints.
class ConfigLoader {
public:
    void set(const std::string& key, const std::string& value, const std::string& file, std::size_t line) {
        const auto& table = detail::keys();
        auto it = std::find_if(table.begin(), table.end(), [&](const detail::Key& k) { return k.name == key; });
        if (it == table.end()) throw ParseError(file, line, "unknown key '" + key + "'");
        it->set(cfg_, value, detail::Where{file, line});
        origin_[key] = {file, line};
    }

    void load_text(const std::string& text, const std::string& file) {
        std::istringstream in(text);
        std::string raw;
        std::size_t lineno = 0;
        while (std::getline(in, raw)) {
            ++lineno;
            const auto line = detail::trim(raw);
            if (line.empty() || line.front() == '#') continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos) throw ParseError(file, lineno, "expected key=value, got '" + line + "'");
            set(detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)), file, lineno);
        }
    }

    void load_file(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open config '" + path.string() + "'");
        std::ostringstream text;
        text << in.rdbuf();
        load_text(text.str(), path.string());
    }

    /// Cross-field checks; failures are attributed to the last line that set a key of the section.
    RunConfig finish() const {
        check("sim.", [&] {
            if (cfg_.sim.m_all % cfg_.sim.m_obs != 0) throw ValidationError("sim.m_obs must divide sim.m_all");
        });
        check("structural.", [&] { cfg_.structural.validate_for_simulation(); });
        check("prv.", [&] { cfg_.prv.validate(); });
        check("tuning.", [&] { cfg_.tuning.validate(); });
        check("space.", [&] { cfg_.space.validate(); });
        check("study.", [&] {
            for (auto m : cfg_.study.m_list)
                if (m > cfg_.study.m_all || cfg_.study.m_all % m != 0)
                    throw ValidationError("every study.m entry must divide study.m_all");
        });
        check("fit.", [&] {
            if (cfg_.fit.methods.empty()) throw ValidationError("fit.methods must not be empty");
            if (cfg_.fit.spaces.empty()) throw ValidationError("fit.spaces must not be empty");
        });
        return cfg_;
    }

    RunConfig& config() { return cfg_; }

private:
    template <typename F>
    void check(const std::string& prefix, F&& f) const {
        try {
            f();
        } catch (const std::invalid_argument& e) {
            std::string file = "<defaults>";
            std::size_t line = 0;
            for (const auto& [k, o] : origin_)
                if (k.rfind(prefix, 0) == 0 && o.second >= line) {
                    file = o.first;
                    line = o.second;
                }
            throw ParseError(file, line, e.what());
        }
    }

    RunConfig cfg_;
    std::map<std::string, std::pair<std::string, std::size_t>> origin_;
};

/// Every key with its current value, one per line, in table order.
inline std::string config_text(const RunConfig& cfg) {
    std::string out;
    for (const auto& k : detail::keys()) out += k.name + "=" + k.get(cfg) + "\n";
    return out;
}

inline RunConfig load_config(const std::filesystem::path& path) {
    ConfigLoader l;
    l.load_file(path);
    return l.finish();
}

} // namespace argi::io
