#include "klab/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

namespace {

using klab::cli::Config;
using klab::cli::ConfigError;
using klab::cli::ConfigValue;
using klab::cli::RunOptions;
using klab::cli::Scenario;

// One literal per line in a file, '#' comments and blank lines skipped.
std::string read_literal_list(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(0, 0, "cannot open list file '" + path + "'");
    std::string line, out;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto a = line.find_first_not_of(" \t\r");
        if (a == std::string::npos) continue;
        auto b = line.find_last_not_of(" \t\r");
        if (!out.empty()) out += ";";
        out += line.substr(a, b - a + 1);
    }
    return out;
}

int execute(const Config& cfg, RunOptions opt) {
    try {
        auto prepared = klab::cli::prepare(cfg, opt);
        return klab::cli::run(prepared, opt, std::cout);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
}

struct Single {
    std::map<std::string, std::string> values;

    Config config(const std::string& kind) const {
        Config cfg;
        Scenario s;
        s.name = kind;
        s.line = 1;
        s.params["kind"] = ConfigValue{kind, 1, 1};
        for (const auto& [k, v] : values)
            if (!v.empty()) s.params[k] = ConfigValue{v, 1, 1};
        cfg.scenarios.push_back(std::move(s));
        return cfg;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"klab: K-functional and limiting interpolation laboratory"};
    app.require_subcommand(1);

    RunOptions opt;
    std::uint64_t seed = 0;
    app.add_option("--seed", seed, "seed for sampled checks")->each([&](const std::string&) { opt.seed_set = true; });
    app.add_option("--threads", opt.threads, "worker threads (0: hardware concurrency)");

    std::string config_path;
    auto* run = app.add_subcommand("run", "run every scenario of a config file");
    run->add_option("config", config_path, "config file")->required();
    run->add_option("--summary", opt.summary_path, "JSON summary path");

    Single hs;
    auto* hol = app.add_subcommand("holmstedt", "scan both sides of a Holmstedt-type formula");
    for (const char* k : {"case", "profile", "b0", "q0", "b1", "q1", "out"})
        hol->add_option(std::string("--") + k, hs.values[k])->required();
    for (const char* k : {"theta", "theta0", "theta1", "grid"}) hol->add_option(std::string("--") + k, hs.values[k]);

    Single nd;
    auto* neg = app.add_subcommand("negative-demo", "tabulate the incompatible bounds for an interior pair");
    for (const char* k : {"theta", "q0", "q1", "b0", "b1", "out"})
        neg->add_option(std::string("--") + k, nd.values[k])->required();
    neg->add_option("--points", nd.values["points"]);

    Single re;
    std::string profiles_file;
    auto* rei = app.add_subcommand("reiterate", "compare a reiterated space with its closed form");
    for (const char* k : {"side", "theta", "q", "b", "q0", "b0", "q1", "b1", "out"})
        rei->add_option(std::string("--") + k, re.values[k])->required();
    rei->add_option("--profiles", profiles_file, "file with one profile literal per line")->required();

    Single lk;
    std::string rearr_file;
    auto* lkc = app.add_subcommand("lk-check", "compare L_{inf,q;b} with (L1, L-inf)_{1,q;b}");
    for (const char* k : {"q", "b", "out"}) lkc->add_option(std::string("--") + k, lk.values[k])->required();
    lkc->add_option("--rearrangements", rearr_file, "file with one rearrangement literal per line");
    lkc->add_option("--random", lk.values["random"], "number of random step rearrangements");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    if (opt.seed_set) opt.seed = seed;

    try {
        if (*run) return execute(klab::cli::load_config(config_path), opt);
        if (*hol) return execute(hs.config("holmstedt"), opt);
        if (*neg) return execute(nd.config("negative-demo"), opt);
        if (*rei) {
            re.values["profiles"] = read_literal_list(profiles_file);
            return execute(re.config("reiterate"), opt);
        }
        if (*lkc) {
            if (!rearr_file.empty()) lk.values["rearrangements"] = read_literal_list(rearr_file);
            return execute(lk.config("lk-check"), opt);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
