#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "argi/io/config.hpp"
#include "argi/io/files.hpp"
#include "support.hpp"

using namespace argi;
using Catch::Approx;
using Catch::Matchers::ContainsSubstring;

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "argi_test_io";
    fs::create_directories(dir);
    return dir / name;
}

void write(const fs::path& p, const std::string& text) { io::CsvWriter::write_text(p, text); }

std::string parse_error_message(const std::string& text) {
    try {
        io::ConfigLoader l;
        l.load_text(text, "cfg.ini");
        l.finish();
    } catch (const ParseError& e) {
        return e.what();
    }
    return "";
}

} // namespace

TEST_CASE("doubles round-trip through text", "[io][property]") {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 1.7976931348623157e308, 0.0, 12345.678}) {
        const auto s = io::format_double(v);
        CHECK(io::parse_double(s, "f", 1, "x") == v);
    }
    CHECK(io::format_double(std::nan("")) == "nan");
    CHECK(io::format_double(-INFINITY) == "-inf");
    CHECK(std::isnan(io::parse_double("nan", "f", 1, "x")));
}

TEST_CASE("malformed numbers name file and line", "[io]") {
    CHECK_THROWS_WITH(io::parse_double("1.2x", "data.csv", 7, "V_hat"), ContainsSubstring("data.csv:7:"));
    CHECK_THROWS_AS(io::parse_integer("3.5", "d", 1, "day"), ParseError);
}

TEST_CASE("CSV records with quotes", "[io]") {
    const auto f = io::split_record(R"(a,"b,c","say ""hi""",)", "f", 1);
    CHECK(f == std::vector<std::string>{"a", "b,c", "say \"hi\"", ""});
    CHECK(io::quote_field("x,y") == "\"x,y\"");
    CHECK(io::quote_field("plain") == "plain");
}

TEST_CASE("CSV reader keeps metadata and reports ragged rows", "[io]") {
    const auto p = scratch("table.csv");
    write(p, "#seed=5\n#command=rv\na,b\n1,2\n3,4\n");
    const auto t = io::read_csv(p);
    CHECK(t.metadata().at("seed") == "5");
    CHECK(t.rows.size() == 2);
    CHECK(t.line_numbers[1] == 5);
    CHECK_THROWS_WITH(t.column("c"), ContainsSubstring("missing column 'c'"));
    write(p, "a,b\n1,2\n3\n");
    CHECK_THROWS_WITH(io::read_csv(p), ContainsSubstring(":3:"));
    CHECK_THROWS_AS(io::read_csv(scratch("absent.csv")), IoError);
}

TEST_CASE("tick files round-trip", "[io]") {
    SimConfig cfg;
    cfg.n_days = 3;
    cfg.m_all = 390;
    cfg.m_obs = 78;
    cfg.seed = 2;
    const auto sim = simulate(cfg);
    const auto p = scratch("ticks.csv");
    write(p, io::ticks_csv(sim.ticks, {{"seed", "2"}}));
    const auto back = io::read_ticks(p);
    REQUIRE(back.n_days() == 3);
    CHECK(back.opens == sim.ticks.opens);
    for (std::size_t d = 0; d < 3; ++d) {
        CHECK(back.days[d].prices == sim.ticks.days[d].prices);
        REQUIRE(back.days[d].times.size() == sim.ticks.days[d].times.size());
        for (std::size_t i = 0; i < back.days[d].times.size(); ++i)
            CHECK(back.days[d].times[i] == Approx(sim.ticks.days[d].times[i]).margin(1e-14));
    }
}

TEST_CASE("tick file errors", "[io]") {
    const auto p = scratch("bad_ticks.csv");
    write(p, "day,time,logprice\n1,0,10\n1,0.5,10.1\n1,0.4,10.2\n2,1,10.3\n");
    CHECK_THROWS_WITH(io::read_ticks(p), ContainsSubstring(":4:"));
    write(p, "day,time,logprice\n1,0,10\n1,0.5,10.1\n");
    CHECK_THROWS_AS(io::read_ticks(p), std::invalid_argument);
    write(p, "day,time\n1,0\n");
    CHECK_THROWS_WITH(io::read_ticks(p), ContainsSubstring("missing column 'logprice'"));
}

TEST_CASE("daily files round-trip", "[io]") {
    auto d = testing::garch_series({0.3, 0.35, 0.1, 0.3}, 20, 3, 0.5);
    d.c_trunc = 0.125;
    for (std::size_t i = 0; i < d.n_days(); ++i)
        if (d.v_hat[i] < 0) d.negative_days.push_back(i);
    const auto p = scratch("daily.csv");
    write(p, io::daily_csv(d));
    const auto back = io::read_daily(p);
    CHECK(back.v_hat == d.v_hat);
    CHECK(back.rv == d.rv);
    CHECK(back.returns == d.returns);
    CHECK(back.c_trunc == 0.125);
    CHECK(back.negative_days == d.negative_days);
}

TEST_CASE("fit files round-trip", "[io]") {
    const auto data = testing::garch_series({0.3, 0.35, 0.1, 0.3}, 200, 4, 0.3, 3.0);
    io::FitFile f;
    f.label = "A-Hub";
    f.space = "argi";
    f.fit = fit(Method::Huber, data, ParamSpace::argi());
    const auto p = scratch("fit.txt");
    write(p, io::fit_text(f, {{"seed", "1"}}));
    const auto back = io::read_fit(p);
    CHECK(back.label == "A-Hub");
    CHECK(back.fit.method == Method::Huber);
    for (std::size_t k = 0; k < 4; ++k) CHECK(back.fit.theta_hat[k] == f.fit.theta_hat[k]);
    REQUIRE(back.fit.tuning);
    CHECK(back.fit.tuning->tau_n == f.fit.tuning->tau_n);
    CHECK(back.fit.v2_hat == f.fit.v2_hat);
    CHECK(io::fit_text(back, {{"seed", "1"}}) == io::fit_text(f, {{"seed", "1"}}));
}

TEST_CASE("config defaults and round trip", "[io][config]") {
    io::ConfigLoader l;
    const auto cfg = l.finish();
    CHECK(cfg.sim.n_days == 125);
    CHECK(cfg.study.reps == 100);
    CHECK(cfg.fit.methods.size() == 4);
    io::ConfigLoader again;
    again.load_text(io::config_text(cfg), "dump");
    CHECK(io::config_text(again.finish()) == io::config_text(cfg));
}

TEST_CASE("config values are applied", "[io][config]") {
    io::ConfigLoader l;
    l.load_text("# comment\nsim.n_days = 40\nstructural.lambda=0\nfit.methods=ols, qmle\nfit.spaces=rgi\n"
                "theta.gamma=0.4\nstudy.n=50,100\nrun.threads=3\nprv.overnight=true\n",
                "c.ini");
    const auto cfg = l.finish();
    CHECK(cfg.sim.n_days == 40);
    CHECK(cfg.structural.jump.intensity_lambda == 0.0);
    CHECK(cfg.fit.methods == std::vector<Method>{Method::OLS, Method::QMLE});
    CHECK(cfg.fit.spaces == std::vector<std::string>{"rgi"});
    CHECK(cfg.true_theta().gamma == 0.4);
    CHECK(cfg.study.n_list == std::vector<std::size_t>{50, 100});
    CHECK(cfg.threads == 3);
    CHECK(cfg.prv.overnight);
    CHECK(cfg.space_for("rgi").fixed[2] == 0.0);
}

TEST_CASE("config errors name file and line", "[io][config]") {
    CHECK_THAT(parse_error_message("sim.n_days=10\nbogus.key=1\n"), ContainsSubstring("cfg.ini:2: unknown key 'bogus.key'"));
    CHECK_THAT(parse_error_message("sim.n_days=ten\n"), ContainsSubstring("cfg.ini:1:"));
    CHECK_THAT(parse_error_message("\n\nno equals sign\n"), ContainsSubstring("cfg.ini:3:"));
    CHECK_THAT(parse_error_message("sim.m_all=1000\nsim.m_obs=390\n"), ContainsSubstring("cfg.ini:2:"));
    CHECK_THAT(parse_error_message("tuning.c_b=3\n"), ContainsSubstring("cfg.ini:1:"));
    CHECK_THAT(parse_error_message("fit.methods=ols,lasso\n"), ContainsSubstring("cfg.ini:1:"));
    CHECK_THAT(parse_error_message("study.n=5\n"), ContainsSubstring("cfg.ini:1:"));
    CHECK_THAT(parse_error_message("run.threads=0\n"), ContainsSubstring("cfg.ini:1:"));
    CHECK_THAT(parse_error_message("sim.reps=0\n"), ContainsSubstring("cfg.ini:1:"));
}
