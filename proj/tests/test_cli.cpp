#include "klab/cli.hpp"

#include <catch_amalgamated.hpp>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace klab::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("klab_cli_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ConfigError config_error(const std::string& text) {
    try {
        auto cfg = parse_config(text);
        RunOptions opt;
        prepare(cfg, opt);
    } catch (const ConfigError& e) {
        return e;
    }
    FAIL("expected a config error");
    return ConfigError(0, 0, "");
}

}  // namespace

TEST_CASE("config parsing") {
    auto cfg = parse_config("# comment\nseed = 3\n\n[a]\nkind = sv-check  # trailing\nb = log(0,-2)\n");
    REQUIRE(cfg.scenarios.size() == 1);
    CHECK(cfg.scenarios[0].name == "a");
    CHECK(cfg.scenarios[0].params.at("b").text == "log(0,-2)");
    CHECK(cfg.scenarios[0].params.at("b").line == 6);
    CHECK(cfg.scenarios[0].params.at("b").column == 5);
    CHECK(cfg.globals.at("seed").text == "3");

    RunOptions opt;
    auto prepared = prepare(cfg, opt);
    CHECK(prepared.size() == 1);
    CHECK(opt.seed == 3);

    CHECK_THROWS_AS(parse_config("[a]\n[a]\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[a\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[a]\nkey value\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[a]\nk = 1\nk = 2\n"), ConfigError);
}

TEST_CASE("config errors name line and column") {
    auto e = config_error("[a]\nkind = sv-check\nb = log(0,-2\n");
    CHECK(e.line() == 3);
    CHECK(e.column() > 5);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);

    auto typo = config_error("[a]\nkind = norm\ntheta = 0\nq = 1\nb = lgo(0,-2)\nprofile = min1\n");
    CHECK(typo.line() == 5);
    CHECK(typo.column() == 5);

    auto unknown = config_error("[a]\nkind = norm\ntheta = 0\nq = 1\nb = log(0,-2)\nprofile = min1\ncolour = red\n");
    CHECK(unknown.line() == 7);

    auto kind = config_error("[a]\nkind = plot\n");
    CHECK(kind.line() == 2);

    auto missing = config_error("[a]\nkind = negative-demo\ntheta = 0.5\n");
    CHECK(std::string(missing.what()).find("missing key") != std::string::npos);

    auto qinf = config_error(
        "[r]\nkind = reiterate\nside = 0\ntheta = 0.5\nq = inf\nb = one\nq0 = 1\nb0 = log(-2,-2)\nq1 = 1\n"
        "b1 = log(0,-3)\nprofiles = min1\n");
    CHECK(qinf.line() == 5);
    CHECK(std::string(qinf.what()).find("unsupported by the reiteration hypotheses") != std::string::npos);

    // SV class violated: caught before anything runs
    auto sv = config_error("[a]\nkind = norm\ntheta = 0\nq = 1\nb = one\nprofile = min1\n");
    CHECK(sv.line() == 1);
}

TEST_CASE("empty scenario list") {
    auto dir = scratch("empty");
    RunOptions opt;
    opt.summary_path = (dir / "summary.json").string();
    auto cfg = parse_config("# nothing\n");
    std::ostringstream log;
    CHECK(run(prepare(cfg, opt), opt, log) == 0);
    CHECK(log.str().empty());
    CHECK(fs::is_empty(dir));
}

TEST_CASE("scenario outputs") {
    auto dir = scratch("run");
    std::string text = "[scan]\nkind = holmstedt\ncase = limiting00\nprofile = min1\nq0 = 1\nb0 = log(0,-2)\n"
                       "q1 = 1\nb1 = log(0,-3)\ngrid = 1e-2,1e2,8\nout = " +
                       (dir / "scan.csv").string() +
                       "\n\n[demo]\nkind = negative-demo\ntheta = 0.5\nq0 = 1\nb0 = log(-3,-3)\nq1 = 2\nb1 = one\n"
                       "out = " +
                       (dir / "demo.csv").string() +
                       "\n\n[gate]\nkind = holmstedt\ncase = limiting00\nprofile = min1\nq0 = 1\nb0 = log(0,-2)\n"
                       "q1 = 2\nb1 = log(0,-1)\nout = " +
                       (dir / "gate.csv").string() + "\n";
    RunOptions opt;
    opt.summary_path = (dir / "summary.json").string();
    auto prepared = prepare(parse_config(text), opt);
    std::ostringstream log;
    CHECK(run(prepared, opt, log) == 1);  // the gate scenario fails

    auto scan = slurp(dir / "scan.csv");
    CHECK(scan.rfind("t,lhs,rhs,ratio\n", 0) == 0);
    CHECK(std::count(scan.begin(), scan.end(), '\n') == 1 + 33);
    CHECK(slurp(dir / "demo.csv").rfind("t,head_bound,upper_bound,M\n", 0) == 0);
    CHECK_FALSE(fs::exists(dir / "gate.csv"));

    auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
    REQUIRE(summary["scenarios"].size() == 3);
    CHECK(summary["scenarios"][0]["status"] == "pass");
    CHECK(summary["scenarios"][1]["details"]["verdict"].get<std::string>().find("nonexistence confirmed") == 0);
    CHECK(summary["scenarios"][2]["status"] == "fail");
    CHECK(summary["scenarios"][2]["message"].get<std::string>().find("rho_eps") != std::string::npos);
    CHECK(log.str().find("FAIL gate") != std::string::npos);
}

TEST_CASE("number formatting") {
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(format_double(2.0) == "2");
    CHECK(format_double(1.0 / 0.0) == "inf");
}
