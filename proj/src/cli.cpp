#include "klab/cli.hpp"

#include "klab/holmstedt.hpp"
#include "klab/interp_norms.hpp"
#include "klab/profile.hpp"
#include "klab/reiteration.hpp"
#include "klab/weight.hpp"
#include "klab/weighted_ineq.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

namespace klab::cli {

using nlohmann::json;

ConfigError::ConfigError(std::size_t line, std::size_t column, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
      line_(line),
      column_(column) {}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// ---------------------------------------------------------------- parsing

namespace {

std::size_t skip_space(std::string_view s, std::size_t i) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    return i;
}

std::size_t trim_end(std::string_view s, std::size_t end) {
    while (end > 0 && (s[end - 1] == ' ' || s[end - 1] == '\t' || s[end - 1] == '\r')) --end;
    return end;
}

bool valid_key(std::string_view k) {
    if (k.empty()) return false;
    return std::all_of(k.begin(), k.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

}  // namespace

Config parse_config(std::string_view text) {
    Config cfg;
    std::set<std::string> names;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(pos, nl - pos);
        ++line_no;
        pos = nl + 1;

        std::size_t hash = line.find('#');
        std::size_t end = trim_end(line, hash == std::string_view::npos ? line.size() : hash);
        std::size_t start = skip_space(line, 0);
        if (start >= end) {
            if (nl == text.size()) break;
            continue;
        }
        if (line[start] == '[') {
            std::size_t close = line.find(']', start);
            if (close == std::string_view::npos || close >= end)
                throw ConfigError(line_no, start + 1, "unterminated scenario header");
            if (skip_space(line, close + 1) < end)
                throw ConfigError(line_no, close + 2, "unexpected text after scenario header");
            std::size_t a = skip_space(line, start + 1);
            std::size_t b = trim_end(line, close);
            std::string name(line.substr(a, b > a ? b - a : 0));
            if (name.empty()) throw ConfigError(line_no, start + 2, "empty scenario name");
            if (!names.insert(name).second) throw ConfigError(line_no, a + 1, "duplicate scenario name '" + name + "'");
            cfg.scenarios.push_back(Scenario{name, line_no, {}});
        } else {
            std::size_t eq = line.find('=', start);
            if (eq == std::string_view::npos || eq >= end) throw ConfigError(line_no, start + 1, "expected key = value");
            std::string key(line.substr(start, trim_end(line, eq) - start));
            if (!valid_key(key)) throw ConfigError(line_no, start + 1, "invalid key '" + key + "'");
            std::size_t v = skip_space(line, eq + 1);
            if (v >= end) throw ConfigError(line_no, eq + 2, "missing value for '" + key + "'");
            ConfigValue value{std::string(line.substr(v, end - v)), line_no, v + 1};
            auto& target = cfg.scenarios.empty() ? cfg.globals : cfg.scenarios.back().params;
            if (!target.emplace(key, value).second)
                throw ConfigError(line_no, start + 1, "duplicate key '" + key + "'");
        }
        if (nl == text.size()) break;
    }
    return cfg;
}

Config load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(0, 0, "cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

const std::vector<std::string>& scenario_kinds() {
    static const std::vector<std::string> kinds{"sv-check",    "norm",     "holmstedt",   "negative-demo",
                                                "reiterate",   "lk-check", "hardy-check", "constants"};
    return kinds;
}

// ---------------------------------------------------------------- typed access

namespace {

std::string strip_column(const std::string& what) {
    auto p = what.rfind(" at column ");
    return p == std::string::npos ? what : what.substr(0, p);
}

std::vector<std::pair<std::string, std::size_t>> split_list(const std::string& text, char sep) {
    std::vector<std::pair<std::string, std::size_t>> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t e = text.find(sep, pos);
        if (e == std::string::npos) e = text.size();
        std::size_t a = pos;
        while (a < e && std::isspace(static_cast<unsigned char>(text[a]))) ++a;
        std::size_t b = e;
        while (b > a && std::isspace(static_cast<unsigned char>(text[b - 1]))) --b;
        if (b > a) out.emplace_back(text.substr(a, b - a), a);
        pos = e + 1;
    }
    return out;
}

class Params {
public:
    Params(const Scenario& s, const std::string& kind) : s_(s), kind_(kind) {}

    const ConfigValue* find(const std::string& key) {
        used_.insert(key);
        auto it = s_.params.find(key);
        return it == s_.params.end() ? nullptr : &it->second;
    }
    const ConfigValue& need(const std::string& key) {
        auto* v = find(key);
        if (!v)
            throw ConfigError(s_.line, 1, "scenario '" + s_.name + "' (" + kind_ + "): missing key '" + key + "'");
        return *v;
    }
    [[noreturn]] void fail(const ConfigValue& v, const std::string& msg, std::size_t offset = 0) {
        throw ConfigError(v.line, v.column + offset, msg);
    }

    std::string text(const std::string& key) { return need(key).text; }
    std::string text(const std::string& key, const std::string& fallback) {
        auto* v = find(key);
        return v ? v->text : fallback;
    }

    double number_of(const ConfigValue& v, const std::string& text, std::size_t offset) {
        std::string t = text;
        if (t == "inf" || t == "infinity" || t == "∞") return kInf;
        char* end = nullptr;
        double d = std::strtod(t.c_str(), &end);
        if (t.empty() || end != t.c_str() + t.size() || std::isnan(d)) fail(v, "not a number: '" + t + "'", offset);
        return d;
    }
    double number(const std::string& key) {
        const auto& v = need(key);
        return number_of(v, v.text, 0);
    }
    double number(const std::string& key, double fallback) {
        auto* v = find(key);
        return v ? number_of(*v, v->text, 0) : fallback;
    }
    double positive(const std::string& key) {
        double d = number(key);
        if (!(d > 0.0)) fail(need(key), "'" + key + "' must be positive");
        return d;
    }
    double positive(const std::string& key, double fallback) {
        double d = number(key, fallback);
        if (!(d > 0.0)) fail(need(key), "'" + key + "' must be positive");
        return d;
    }
    std::vector<double> numbers(const std::string& key, std::vector<double> fallback) {
        auto* v = find(key);
        if (!v) return fallback;
        std::vector<double> out;
        for (auto& [item, off] : split_list(v->text, ',')) out.push_back(number_of(*v, item, off));
        if (out.empty()) fail(*v, "empty list");
        return out;
    }
    int integer(const std::string& key, int fallback, int min_value) {
        auto* v = find(key);
        if (!v) return fallback;
        double d = number_of(*v, v->text, 0);
        if (d != std::floor(d) || d < min_value || d > 1e9)
            fail(*v, "'" + key + "' must be an integer >= " + std::to_string(min_value));
        return static_cast<int>(d);
    }
    WeightExpr weight(const std::string& key) {
        const auto& v = need(key);
        try {
            return parse_weight(v.text);
        } catch (const ParseError& e) {
            fail(v, "invalid weight expression for '" + key + "': " + strip_column(e.what()), e.position());
        }
    }
    KProfile profile_of(const ConfigValue& v, const std::string& text, std::size_t offset) {
        try {
            return parse_profile(text);
        } catch (const ParseError& e) {
            fail(v, "invalid profile: " + strip_column(e.what()), offset + e.position());
        }
    }
    Rearrangement rearrangement_of(const ConfigValue& v, const std::string& text, std::size_t offset) {
        try {
            return parse_rearrangement(text);
        } catch (const ParseError& e) {
            fail(v, "invalid rearrangement: " + strip_column(e.what()), offset + e.position());
        }
    }
    GridSpec grid(GridSpec fallback) {
        auto* v = find("grid");
        if (!v) return fallback;
        try {
            return GridSpec::parse(v->text);
        } catch (const std::invalid_argument& e) {
            fail(*v, e.what());
        }
    }
    /// Runs a module constructor, anchoring its precondition errors at the scenario header.
    template <class F>
    auto validated(F&& f) -> decltype(f()) {
        try {
            return f();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(s_.line, 1, "scenario '" + s_.name + "': " + e.what());
        } catch (const PreconditionError& e) {
            throw ConfigError(s_.line, 1, "scenario '" + s_.name + "': " + e.what());
        }
    }
    void finish() {
        for (const auto& [k, v] : s_.params)
            if (!used_.count(k)) throw ConfigError(v.line, 1, "unknown key '" + k + "' for kind " + kind_);
    }

private:
    const Scenario& s_;
    std::string kind_;
    std::set<std::string> used_;
};

std::string csv_row(std::initializer_list<double> values) {
    std::string out;
    bool first = true;
    for (double v : values) {
        if (!first) out += ',';
        out += format_double(v);
        first = false;
    }
    return out + "\n";
}

json num(double v) {
    if (std::isfinite(v)) return v;
    return format_double(v);
}

LogFn density(Params& p, const std::string& key) {
    const auto& v = p.need(key);
    const std::string& t = v.text;
    auto call = [&](const std::string& head) -> std::optional<double> {
        if (t.rfind(head + "(", 0) != 0 || t.back() != ')') return std::nullopt;
        return p.number_of(v, t.substr(head.size() + 1, t.size() - head.size() - 2), head.size() + 1);
    };
    if (auto c = call("expdecay")) {
        if (!(*c > 0.0)) p.fail(v, "expdecay rate must be positive");
        return LogFn::exp_decay(*c);
    }
    if (auto a = call("tpower")) return LogFn::power(*a);
    return p.weight(key).as_log_fn();
}

HardyCase hardy_case(Params& p) {
    const auto& v = p.need("case");
    for (auto c : {HardyCase::HET1, HardyCase::HET2, HardyCase::HET3plus, HardyCase::HET3})
        if (v.text == to_string(c)) return c;
    p.fail(v, "unknown Hardy case '" + v.text + "' (expected HET1, HET2, HET3plus or HET3)");
}

ConstantKind constant_kind(Params& p, const ConfigValue& v, const std::string& name, std::size_t off) {
    for (auto c : {ConstantKind::A1, ConstantKind::A2, ConstantKind::A3, ConstantKind::A4})
        if (name == to_string(c)) return c;
    p.fail(v, "unknown constant '" + name + "' (expected A1..A4)", off);
}

// ---------------------------------------------------------------- per-kind binding

using Job = std::function<ScenarioResult()>;

Job bind_sv_check(Params& p) {
    auto b = p.weight("b");
    auto eps = p.numbers("eps", {1.0, 0.5, 0.25, 0.125});
    for (double e : eps)
        if (!(e > 0.0)) p.fail(p.need("eps"), "eps values must be positive");
    double threshold = p.positive("threshold", 4.0);
    auto grid = p.grid({1e-8, 1e8, 64});
    return [=] {
        ScenarioResult r;
        r.csv = "eps,up_constant,down_constant,pass\n";
        r.pass = true;
        for (double e : eps) {
            auto c = sv_check(b, e, grid);
            bool ok = c.passes(threshold);
            r.pass = r.pass && ok;
            r.csv += csv_row({e, c.up_constant, c.down_constant, ok ? 1.0 : 0.0});
        }
        r.message = r.pass ? "slowly varying on the grid" : "quasi-monotonicity constant above threshold";
        return r;
    };
}

Job bind_norm(Params& p) {
    double theta = p.number("theta");
    double q = p.positive("q");
    auto b = p.weight("b");
    const auto& pv = p.need("profile");
    auto f = p.profile_of(pv, pv.text, 0);
    auto space = p.validated([&] { return SpaceSpec::make(theta, q, b); });
    return [=] {
        ScenarioResult r;
        double n = space_norm(f, space);
        r.csv = "theta,q,norm\n" + csv_row({theta, q, n});
        r.pass = std::isfinite(n);
        r.message = r.pass ? "finite norm" : "profile not in the space";
        r.details["norm"] = num(n);
        return r;
    };
}

Job bind_holmstedt(Params& p, unsigned threads) {
    auto kind = p.validated([&] { return parse_holmstedt_kind(p.text("case")); });
    const auto& pv = p.need("profile");
    auto f = p.profile_of(pv, pv.text, 0);
    WeightPair w{p.positive("q0"), p.weight("b0"), p.positive("q1"), p.weight("b1")};
    HolmstedtCase c = p.validated([&] {
        switch (kind) {
            case HolmstedtKind::limiting00: return HolmstedtCase::limiting00(w);
            case HolmstedtKind::limiting11: return HolmstedtCase::limiting11(w);
            case HolmstedtKind::interior_equal_q:
                if (w.q0 != w.q1) throw std::invalid_argument("interior_equal_q requires q0 = q1");
                return HolmstedtCase::interior_equal_q(p.number("theta"), w.q0, w.b0, w.b1);
            case HolmstedtKind::nonlimiting:
                return HolmstedtCase::nonlimiting(p.number("theta0"), p.number("theta1"), w);
        }
        throw std::invalid_argument("unknown case");
    });
    auto grid = p.grid({1e-6, 1e6, 13});
    double max_variation = p.positive("max_variation", 1e3);
    return [=] {
        ScenarioResult r;
        auto rep = equivalence_scan(c, f, grid, threads);
        r.csv = "t,lhs,rhs,ratio\n";
        for (const auto& row : rep.rows) r.csv += csv_row({row.t, row.lhs, row.rhs, row.ratio});
        double variation = rep.rows.empty() ? kInf : rep.ratio_max / rep.ratio_min;
        r.pass = !rep.rows.empty() && variation <= max_variation;
        r.message = "truncation K-functional vs right-hand side: variation " + format_double(variation);
        r.details["lhs_label"] = "truncation K-functional";
        r.details["ratio_min"] = num(rep.ratio_min);
        r.details["ratio_max"] = num(rep.ratio_max);
        r.details["variation"] = num(variation);
        r.details["rows"] = rep.rows.size();
        r.details["skipped"] = rep.skipped;
        return r;
    };
}

Job bind_negative_demo(Params& p) {
    double theta = p.number("theta");
    WeightPair w{p.positive("q0"), p.weight("b0"), p.positive("q1"), p.weight("b1")};
    int points = p.integer("points", 64, 8);
    if (!(theta > 0.0 && theta < 1.0)) p.fail(p.need("theta"), "theta must lie in (0,1)");
    if (w.q0 == w.q1) p.fail(p.need("q1"), "negative-demo requires q0 != q1");
    return [=] {
        ScenarioResult r;
        auto rep = negative_demo(theta, w, points);
        r.csv = "t,head_bound,upper_bound,M\n";
        for (const auto& row : rep.rows) r.csv += csv_row({row.t, row.head_bound, row.upper_bound, row.M});
        r.pass = rep.confirmed;
        r.message = rep.verdict;
        r.details["verdict"] = rep.verdict;
        r.details["swapped"] = rep.swapped;
        r.details["r"] = num(rep.r);
        r.details["note"] = "head bound uses the positive exponent r = q0 q1 / (q1 - q0)";
        return r;
    };
}

std::vector<NamedProfile> profile_list(Params& p, const std::string& key) {
    const auto& v = p.need(key);
    std::vector<NamedProfile> out;
    for (auto& [item, off] : split_list(v.text, ';')) out.push_back({item, p.profile_of(v, item, off)});
    if (out.empty()) p.fail(v, "empty profile list");
    return out;
}

Job bind_reiterate(Params& p, unsigned threads) {
    ReiterationSpec s;
    const auto& side = p.need("side");
    if (side.text == "0") s.side = LimitingSide::zero;
    else if (side.text == "1") s.side = LimitingSide::one;
    else p.fail(side, "side must be 0 or 1");
    s.theta = p.number("theta");
    s.q = p.positive("q");
    if (std::isinf(s.q))
        p.fail(p.need("q"), "q = inf is unsupported by the reiteration hypotheses (they require 0 < q < inf)");
    s.b = p.weight("b");
    s.w = WeightPair{p.positive("q0"), p.weight("b0"), p.positive("q1"), p.weight("b1")};
    if (std::isinf(s.w.q0) || std::isinf(s.w.q1))
        p.fail(p.need(std::isinf(s.w.q0) ? "q0" : "q1"),
               "q0, q1 = inf are unsupported by the reiteration hypotheses (they require finite exponents)");
    auto suite = profile_list(p, "profiles");
    double max_variation = p.positive("max_variation", 1e3);
    p.validated([&] {
        s.validate();
        return 0;
    });
    return [=] {
        ScenarioResult r;
        auto lg = log_derivative_check(s);
        auto rep = reiteration_check(s, suite, threads);
        r.csv = "name,lhs,rhs,ratio\n";
        for (const auto& row : rep.rows) {
            std::string name = row.name;
            if (name.find_first_of(",\"") != std::string::npos) {
                std::string quoted = "\"";
                for (char ch : name) quoted += ch == '"' ? std::string("\"\"") : std::string(1, ch);
                name = quoted + "\"";
            }
            r.csv += name + "," + csv_row({row.lhs, row.rhs, row.ratio});
        }
        double variation = rep.rows.empty() ? kInf : rep.ratio_max / rep.ratio_min;
        r.pass = rep.skipped == 0 && variation <= max_variation;
        r.message = "reiteration ratio variation " + format_double(variation);
        r.details["ratio_min"] = num(rep.ratio_min);
        r.details["ratio_max"] = num(rep.ratio_max);
        r.details["variation"] = num(variation);
        r.details["skipped"] = rep.skipped;
        r.details["log_derivative_band"] = {num(lg.lo), num(lg.hi)};
        r.details["reiterated_weight_at_1"] = num(reiterated_weight(s)(1.0));
        return r;
    };
}

Job bind_lk_check(Params& p, std::uint64_t seed) {
    double q = p.positive("q");
    auto b = p.weight("b");
    std::vector<Rearrangement> suite;
    if (auto* v = p.find("rearrangements"))
        for (auto& [item, off] : split_list(v->text, ';')) suite.push_back(p.rearrangement_of(*v, item, off));
    int random = p.integer("random", 0, 0);
    int cells = p.integer("cells", 6, 1);
    double max_ratio = p.positive("max_ratio", 1e2);
    if (suite.empty() && random == 0)
        throw ConfigError(p.need("q").line, 1, "lk-check needs 'rearrangements' or 'random'");
    p.validated([&] {
        SpaceSpec::make(1.0, q, b);
        return 0;
    });
    return [=] {
        auto all = suite;
        std::mt19937_64 rng(seed);
        for (int i = 0; i < random; ++i) all.push_back(random_rearrangement(rng, cells));
        auto rep = lk_embedding_check(all, q, b);
        ScenarioResult r;
        r.csv = "lk,interp,ratio\n";
        r.pass = true;
        for (const auto& row : rep.rows) {
            r.csv += csv_row({row.lk, row.interp, row.ratio});
            if (!std::isnan(row.ratio) && (row.ratio < 1.0 - 1e-9 || row.ratio > max_ratio)) r.pass = false;
        }
        r.message = "interpolation / Lorentz-Karamata ratio in [" + format_double(rep.ratio_min) + ", " +
                    format_double(rep.ratio_max) + "]";
        r.details["ratio_min"] = num(rep.ratio_min);
        r.details["ratio_max"] = num(rep.ratio_max);
        return r;
    };
}

Job bind_hardy(Params& p, std::uint64_t seed) {
    auto c = hardy_case(p);
    double alpha = p.positive("alpha");
    auto w = density(p, "w");
    auto phi = density(p, "phi");
    int samples = p.integer("samples", 50, 1);
    double bound = p.positive("bound", 10.0);
    return [=] {
        ScenarioResult r;
        auto rep = hardy_check(c, alpha, w, phi, static_cast<std::size_t>(samples), seed);
        r.csv = "max_ratio,samples\n" + csv_row({rep.max_ratio, static_cast<double>(rep.samples)});
        r.pass = rep.max_ratio <= bound;
        r.message = "max LHS/RHS " + format_double(rep.max_ratio);
        r.details["max_ratio"] = num(rep.max_ratio);
        return r;
    };
}

Job bind_constants(Params& p) {
    InequalitySpec spec{p.positive("p"), p.positive("q"), p.weight("v"), p.weight("w")};
    std::vector<ConstantKind> which;
    if (auto* v = p.find("which")) {
        for (auto& [item, off] : split_list(v->text, ',')) which.push_back(constant_kind(p, *v, item, off));
    } else {
        which = {ConstantKind::A1, ConstantKind::A2, ConstantKind::A3, ConstantKind::A4};
    }
    auto grid = p.grid({});
    return [=] {
        ScenarioResult r;
        r.csv = "which,value,argmax\n";
        r.pass = true;
        for (auto k : which) {
            auto c = compute_constant(spec, k, grid);
            r.csv += std::string(to_string(k)) + "," + csv_row({c.value, c.argmax});
            r.details[to_string(k)] = num(c.value);
            if (!std::isfinite(c.value)) r.pass = false;
        }
        r.message = r.pass ? "all constants finite" : "some constant is infinite";
        return r;
    };
}

}  // namespace

std::vector<PreparedScenario> prepare(const Config& config, RunOptions& options) {
    for (const auto& [k, v] : config.globals)
        if (k != "seed" && k != "summary") throw ConfigError(v.line, 1, "unknown global key '" + k + "'");
    if (!options.seed_set) {
        if (auto it = config.globals.find("seed"); it != config.globals.end()) {
            const auto& v = it->second;
            try {
                std::size_t used = 0;
                options.seed = std::stoull(v.text, &used);
                if (used != v.text.size()) throw std::invalid_argument("seed");
            } catch (const std::logic_error&) {
                throw ConfigError(v.line, v.column, "seed must be an unsigned integer");
            }
        }
    }
    if (options.summary_path.empty())
        if (auto it = config.globals.find("summary"); it != config.globals.end())
            options.summary_path = it->second.text;

    std::vector<PreparedScenario> out;
    for (std::size_t i = 0; i < config.scenarios.size(); ++i) {
        const auto& s = config.scenarios[i];
        auto kit = s.params.find("kind");
        if (kit == s.params.end()) throw ConfigError(s.line, 1, "scenario '" + s.name + "' has no kind");
        const auto& kinds = scenario_kinds();
        const std::string& kind = kit->second.text;
        if (std::find(kinds.begin(), kinds.end(), kind) == kinds.end())
            throw ConfigError(kit->second.line, kit->second.column, "unknown kind '" + kind + "'");
        Params p(s, kind);
        p.find("kind");
        std::string out_path = p.text("out", "");
        std::uint64_t seed = options.seed + i;
        Job job;
        if (kind == "sv-check") job = bind_sv_check(p);
        else if (kind == "norm") job = bind_norm(p);
        else if (kind == "holmstedt") job = bind_holmstedt(p, 1);
        else if (kind == "negative-demo") job = bind_negative_demo(p);
        else if (kind == "reiterate") job = bind_reiterate(p, 1);
        else if (kind == "lk-check") job = bind_lk_check(p, seed);
        else if (kind == "hardy-check") job = bind_hardy(p, seed);
        else job = bind_constants(p);
        p.finish();
        out.push_back(PreparedScenario{s.name, kind, out_path, std::move(job)});
    }
    return out;
}

// ---------------------------------------------------------------- execution

namespace {

void write_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    fs::path tmp = p;
    tmp += ".tmp";
    {
        std::ofstream o(tmp, std::ios::binary | std::ios::trunc);
        if (!o) throw std::runtime_error("cannot write '" + tmp.string() + "'");
        o << content;
    }
    fs::rename(tmp, p);
}

}  // namespace

int run(const std::vector<PreparedScenario>& scenarios, const RunOptions& options, std::ostream& log) {
    if (scenarios.empty()) return 0;
    std::vector<ScenarioResult> results(scenarios.size());
    unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(scenarios.size(), 1)));
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < threads; ++k)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < scenarios.size(); i = next++) {
                const auto& sc = scenarios[i];
                ScenarioResult r;
                try {
                    r = sc.run();
                } catch (const std::exception& e) {
                    r = ScenarioResult{};
                    r.pass = false;
                    r.message = e.what();
                }
                r.name = sc.name;
                r.kind = sc.kind;
                r.out = sc.out;
                results[i] = std::move(r);
            }
        });
    for (auto& th : pool) th.join();

    bool all = true;
    json summary;
    summary["seed"] = options.seed;
    summary["scenarios"] = json::array();
    for (auto& r : results) {
        if (!r.out.empty() && !r.csv.empty()) {
            try {
                write_atomic(r.out, r.csv);
            } catch (const std::exception& e) {
                r.pass = false;
                r.message += std::string("; ") + e.what();
            }
        }
        all = all && r.pass;
        log << (r.pass ? "PASS " : "FAIL ") << r.name << " [" << r.kind << "]: " << r.message << "\n";
        json j;
        j["name"] = r.name;
        j["kind"] = r.kind;
        j["status"] = r.pass ? "pass" : "fail";
        j["message"] = r.message;
        j["out"] = r.out;
        j["details"] = r.details;
        summary["scenarios"].push_back(j);
    }
    summary["passed"] = std::count_if(results.begin(), results.end(), [](const auto& r) { return r.pass; });
    summary["failed"] = results.size() - summary["passed"].get<std::size_t>();
    if (!options.summary_path.empty()) write_atomic(options.summary_path, summary.dump(2) + "\n");
    return all ? 0 : 1;
}

}  // namespace klab::cli
