#pragma once

// Scenario configs and their execution.
//
// Config grammar (line oriented, '#' starts a comment):
//
//   seed = 42                  # optional global keys before the first block
//   summary = out/summary.json
//
//   [scenario-name]
//   kind = holmstedt
//   key = value
//
// Every scenario is validated before any of them runs.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace klab::cli {

class ConfigError : public std::runtime_error {
public:
    ConfigError(std::size_t line, std::size_t column, const std::string& what);
    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

struct ConfigValue {
    std::string text;
    std::size_t line = 0;
    std::size_t column = 0;  // 1-based column of the value's first character
};

struct Scenario {
    std::string name;
    std::size_t line = 0;
    std::map<std::string, ConfigValue> params;
};

struct Config {
    std::map<std::string, ConfigValue> globals;
    std::vector<Scenario> scenarios;
};

Config parse_config(std::string_view text);
Config load_config(const std::string& path);

const std::vector<std::string>& scenario_kinds();

struct ScenarioResult {
    std::string name;
    std::string kind;
    bool pass = false;
    std::string message;
    std::string csv;
    std::string out;  // CSV path, empty for none
    nlohmann::json details = nlohmann::json::object();
};

struct PreparedScenario {
    std::string name;
    std::string kind;
    std::string out;
    std::function<ScenarioResult()> run;
};

struct RunOptions {
    std::uint64_t seed = 0;
    bool seed_set = false;  // command-line seed overrides the config
    unsigned threads = 0;
    std::string summary_path;  // overrides the config's summary key
};

/// Validates every scenario (throws ConfigError) and binds the computations.
std::vector<PreparedScenario> prepare(const Config& config, RunOptions& options);

/// Runs the scenarios (in parallel), writes CSV files and the JSON summary in
/// declaration order, and returns the exit code: 0 all pass, 1 any failure.
int run(const std::vector<PreparedScenario>& scenarios, const RunOptions& options, std::ostream& log);

/// "%.17g" with inf / nan spelled out.
std::string format_double(double v);

}  // namespace klab::cli
