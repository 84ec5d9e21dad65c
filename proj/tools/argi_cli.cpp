// argi: simulate, estimate realized measures, fit, backtest, run studies and
// summarise results. Exit status 0 on success, 1 on invalid input or
// configuration, 2 on runtime failure.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "argi/io/config.hpp"
#include "argi/pipeline/commands.hpp"

namespace {

struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> threads;
    std::string out;
    std::string input;
    bool overnight = false;
    bool spot_trace = false;
    bool print_config = false;
    bool quiet = false;
    std::vector<std::string> overrides;
};

argi::io::RunConfig resolve(const Flags& f) {
    argi::io::ConfigLoader loader;
    if (!f.config.empty()) loader.load_file(f.config);
    std::size_t pos = 0;
    for (const auto& kv : f.overrides) {
        ++pos;
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw argi::ParseError("--set", pos, "expected key=value, got '" + kv + "'");
        loader.set(kv.substr(0, eq), kv.substr(eq + 1), "--set", pos);
    }
    if (f.seed) loader.set("run.seed", std::to_string(*f.seed), "--seed", 0);
    if (f.threads) loader.set("run.threads", std::to_string(*f.threads), "--threads", 0);
    if (!f.out.empty()) loader.set("run.out", f.out, "--out", 0);
    if (!f.input.empty()) loader.set("run.input", f.input, "--input", 0);
    if (f.overnight) loader.set("prv.overnight", "true", "--overnight", 0);
    if (f.spot_trace) loader.set("sim.spot_trace", "true", "--spot-trace", 0);
    return loader.finish();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Asymmetric realized GARCH-Ito volatility toolkit"};
    app.require_subcommand(1);
    Flags flags;

    using Command = argi::pipeline::CommandOutput (*)(const argi::io::RunConfig&);
    struct Sub {
        const char* name;
        const char* help;
        Command run;
    };
    const Sub subs[] = {
        {"simulate", "simulate tick data and the true volatility path", argi::pipeline::cmd_simulate},
        {"rv", "compute daily V_hat, RV and returns from a tick CSV", argi::pipeline::cmd_rv},
        {"fit", "estimate theta with each configured method", argi::pipeline::cmd_fit},
        {"backtest", "rolling-window forecast evaluation", argi::pipeline::cmd_backtest},
        {"study", "Monte-Carlo study of estimation and forecast accuracy", argi::pipeline::cmd_study},
        {"report", "summarise fit results and tables in a directory", argi::pipeline::cmd_report},
    };
    Command selected = nullptr;
    for (const auto& s : subs) {
        auto* sc = app.add_subcommand(s.name, s.help);
        sc->add_option("--config", flags.config, "key=value configuration file")->check(CLI::ExistingFile);
        sc->add_option("--seed", flags.seed, "base random seed");
        sc->add_option("--threads", flags.threads, "worker threads");
        sc->add_option("--out", flags.out, "output directory");
        sc->add_option("--input,input", flags.input, "input file or directory");
        sc->add_flag("--overnight", flags.overnight, "add squared close-to-open returns to V_hat and RV");
        sc->add_flag("--spot-trace", flags.spot_trace, "write the fine-grid spot variance path");
        sc->add_option("--set", flags.overrides, "override a configuration key (key=value)");
        sc->add_flag("--print-config", flags.print_config, "print the effective configuration and exit");
        sc->add_flag("--quiet,-q", flags.quiet, "suppress the summary");
        sc->callback([&selected, run = s.run] { selected = run; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        const auto cfg = resolve(flags);
        if (flags.print_config) {
            std::cout << argi::io::config_text(cfg);
            return 0;
        }
        const auto result = selected(cfg);
        if (!flags.quiet) std::cout << result.summary;
        return 0;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
