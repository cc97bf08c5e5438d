// End-to-end acceptance checks. One line per criterion; exit code 1 if any fails.

#include "klab/cli.hpp"
#include "klab/holmstedt.hpp"
#include "klab/interp_norms.hpp"
#include "klab/profile.hpp"
#include "klab/quadrature.hpp"
#include "klab/reiteration.hpp"
#include "klab/weight.hpp"
#include "klab/weighted_ineq.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace klab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::string g(double v) { return fmt("%.6g", v); }

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

WeightExpr W(const char* text) { return parse_weight(text); }

std::vector<NamedProfile> profile_suite() {
    return {
        {"min1", KProfile::min1()},
        {"three-knot", KProfile::piecewise_power({{0.1, 0.1}, {1.0, 0.5}, {10.0, 1.0}})},
        {"wide", KProfile::piecewise_power({{1e-3, 1e-3}, {1.0, 0.05}, {1e3, 1.0}})},
        {"min10", KProfile::piecewise_power({{10.0, 10.0}})},
        {"four-knot", KProfile::piecewise_power({{0.01, 0.01}, {0.1, 0.05}, {1.0, 0.2}, {100.0, 1.0}})},
        {"step", K_from_rearrangement(Rearrangement::step({0.5, 5.0}, {4.0, 1.0, 0.0}))},
    };
}

Outcome c1() {
    double a = tail_qnorm(W("log(0,-2)"), 1.0, std::exp(1.0));
    double b = head_qnorm(W("log(-2,0)"), 1.0, std::exp(-1.0));
    return {rel(a, 0.5) <= 1e-9 && rel(b, 0.5) <= 1e-9, "tail=" + fmt("%.15g", a) + " head=" + fmt("%.15g", b)};
}

Outcome c2() {
    const char* weights[] = {"log(0,-2)", "log(2,-3)", "log(-2,0)", "explog(0.5)"};
    const double alphas[] = {0.5, 1.0, 2.0};
    auto xs = GridSpec{1e-8, 1e8, 8}.log_points();
    double lo = kInf, hi = 0.0;
    std::string at_lo, at_hi;
    for (const char* wt : weights) {
        WeightExpr b = W(wt);
        LogFn lb = b.as_log_fn();
        for (double alpha : alphas) {
            LogFn head = lb.times_power(alpha);
            LogFn tail = lb.times_power(-alpha);
            for (double x : xs) {
                double lh = log_qnorm_x(head, 1.0, -kInf, x) - (alpha * x + b.log_at(x));
                double lt = log_qnorm_x(tail, 1.0, x, kInf) - (-alpha * x + b.log_at(x));
                for (double l : {lh, lt}) {
                    double r = std::exp(l);
                    std::string where = std::string(wt) + " alpha=" + g(alpha) + " t=" + g(std::exp(x));
                    if (r < lo) {
                        lo = r;
                        at_lo = where;
                    }
                    if (r > hi) {
                        hi = r;
                        at_hi = where;
                    }
                }
            }
        }
    }
    return {lo >= 0.1 && hi <= 10.0, "ratio band [" + g(lo) + " at " + at_lo + ", " + g(hi) + " at " + at_hi + "]"};
}

Outcome c3() {
    InequalitySpec spec{1.0, 2.0, W("log(0,-2)"), W("log(0,-2)")};
    double a3 = compute_constant(spec, ConstantKind::A3).value;
    std::vector<double> xs = GridSpec{1e-6, 1e6, 8}.points();
    double probe = best_constant_probe(spec, xs).sup_ratio;
    bool pass = std::abs(a3 - 0.6124) <= 1e-3 && std::abs(probe - a3) <= 1e-3;
    return {pass, "A3=" + g(a3) + " probe=" + g(probe)};
}

Outcome c4() {
    WeightExpr w = W("log(0,-2)");
    double worst = 0.0;
    for (int i = 0; i < 40; ++i) {
        double lx = std::log(1e-6) + (std::log(1e6) - std::log(1e-6)) * i / 39.0;
        double a = log_extremal_mass(w, 2.0, lx);
        double b = log_extremal_direct(w, 2.0, lx);
        worst = std::max(worst, rel(std::exp(a - b), 1.0));
    }
    return {worst <= 1e-9, "max relative discrepancy " + g(worst)};
}

Outcome scan_suite(const HolmstedtCase& c, const std::string& prefix) {
    double lo = kInf, hi = 0.0, var = 0.0;
    for (const auto& p : profile_suite()) {
        ScanReport r = equivalence_scan(c, p.k);
        lo = std::min(lo, r.ratio_min);
        hi = std::max(hi, r.ratio_max);
        var = std::max(var, r.ratio_max / r.ratio_min);
    }
    bool pass = var <= 1e3 && lo >= 1e-3 && hi <= 1e3;
    return {pass, prefix + "max variation " + g(var) + ", ratios in [" + g(lo) + ", " + g(hi) + "]"};
}

Outcome c5() {
    WeightPair w{1.0, W("log(0,-2)"), 2.0, W("log(0,-2)")};
    auto cond = check_condition_monotone_index(IndexKind::rho_eps, w, {0.25});
    std::string pre = "condition constant at eps=1/4: " + g(cond.best_constant) + "; ";
    return scan_suite(HolmstedtCase::limiting00(w), pre);
}

Outcome c6() {
    WeightPair w{1.0, W("log(0,-2)"), 1.0, W("log(0,-3)")};
    auto c = HolmstedtCase::limiting00(w);
    double rhs = rhs_formula(c, KProfile::min1(), 1.0);
    ScanReport r = equivalence_scan(c, KProfile::min1());
    double var = r.ratio_max / r.ratio_min;
    return {std::abs(rhs - 2.0) <= 1e-6 && var <= 1e3, "RHS(1)=" + fmt("%.10g", rhs) + " variation " + g(var)};
}

Outcome c7() {
    WeightPair w{1.0, W("log(0,-2)"), 2.0, W("log(0,-1)")};
    auto cond = check_condition_monotone_index(IndexKind::rho_eps, w);
    bool all_fail = !cond.pass;
    for (const auto& [eps, constant] : cond.tried) all_fail = all_fail && constant > 4.0;

    bool refused = false;
    std::string message;
    try {
        equivalence_scan(HolmstedtCase::limiting00(w), KProfile::min1());
    } catch (const HypothesisError& e) {
        refused = true;
        message = e.what();
    }

    fs::path dir = fs::temp_directory_path() / "klab_acceptance_gate";
    fs::remove_all(dir);
    fs::create_directories(dir);
    fs::path cwd = fs::current_path();
    fs::current_path(dir);
    int code = -1;
    std::ostringstream log;
    try {
        cli::RunOptions opt;
        opt.threads = 1;
        auto cfg = cli::parse_config(
            "[gate]\nkind = holmstedt\ncase = limiting00\nprofile = min1\n"
            "q0 = 1\nb0 = log(0,-2)\nq1 = 2\nb1 = log(0,-1)\nout = gate.csv\n");
        code = cli::run(cli::prepare(cfg, opt), opt, log);
    } catch (const std::exception& e) {
        log << e.what();
    }
    fs::current_path(cwd);
    fs::remove_all(dir);

    bool named = message.find("rho_eps") != std::string::npos && log.str().find("rho_eps") != std::string::npos;
    bool pass = all_fail && cond.tried.size() > 0 && refused && named && code == 1;
    return {pass, std::to_string(cond.tried.size()) + " eps tried, best constant " + g(cond.best_constant) +
                      ", exit code " + std::to_string(code) + ", \"" + message + "\""};
}

Outcome c8() {
    WeightPair w{1.0, W("log(0,-2)"), 2.0, W("log(0,-2)")};
    WeightPair wf{w.q1, w.b1.flipped(), w.q0, w.b0.flipped()};
    auto c00 = HolmstedtCase::limiting00(w);
    auto c11 = HolmstedtCase::limiting11(wf);
    double worst_rhs = 0.0, worst_lhs = 0.0;
    std::size_t rows = 0, off = 0;
    std::string where;
    for (const auto& p : profile_suite()) {
        ScanReport a = equivalence_scan(c00, p.k);
        ScanReport b = equivalence_scan(c11, p.k.dual());
        if (a.rows.size() != b.rows.size()) return {false, "row counts differ for " + p.name};
        for (std::size_t i = 0; i < a.rows.size(); ++i) {
            const ScanRow& r0 = a.rows[i];
            const ScanRow& r1 = b.rows[b.rows.size() - 1 - i];
            worst_rhs = std::max({worst_rhs, rel(r1.t * r0.t, 1.0), rel(r1.rhs * r0.s, r0.rhs)});
            double dl = std::max(rel(r1.lhs * r0.s, r0.lhs), rel(r1.ratio, r0.ratio));
            if (dl > 1e-9) ++off;
            if (dl > worst_lhs) {
                worst_lhs = dl;
                where = p.name + " t=" + g(r0.t);
            }
            ++rows;
        }
    }
    std::string detail = std::to_string(rows) + " rows, rhs deviation " + g(worst_rhs) + ", lhs/ratio deviation " +
                         g(worst_lhs) + " (" + std::to_string(off) + " rows above 1e-9";
    detail += off ? ", worst at " + where + ")" : ")";
    return {worst_rhs <= 1e-9 && worst_lhs <= 1e-9, detail};
}

Outcome c9() {
    WeightPair w{1.0, W("log(-3,-3)"), 2.0, W("one")};
    double m3 = negative_demo_M(w, std::exp(-3.0));
    double m99 = negative_demo_M(w, std::exp(-99.0));
    NegativeReport r = negative_demo(0.5, w);
    bool pass = std::abs(m3 - 0.894) <= 1e-3 && std::abs(m99 - 4.472) <= 1e-3 && r.confirmed &&
                r.verdict.rfind("nonexistence confirmed", 0) == 0;
    return {pass, "M(e^-3)=" + g(m3) + " M(e^-99)=" + g(m99) + " verdict \"" + r.verdict + "\""};
}

Outcome c10() {
    WeightExpr b = W("log(0,-2)");
    // theta0 = theta1 = 0 is outside the interior factory's range; s(t) = b0/b1 = 1
    HolmstedtCase c{HolmstedtKind::interior_equal_q, 0.0, 0.0, WeightPair{1.0, b, 1.0, b}};
    double worst = 0.0;
    for (const auto& p : profile_suite()) {
        double exact = space_norm(p.k, SpaceSpec::make(0.0, 1.0, b));
        for (int i = 0; i < 20; ++i) {
            double t = std::pow(10.0, -6.0 + 12.0 * i / 19.0);
            if (std::abs(c.s(t) - 1.0) > 1e-15) return {false, "s(t) != 1 at t=" + g(t)};
            worst = std::max(worst, rel(lhs_decomposition(c, p.k, t), exact));
        }
    }
    return {worst <= 1e-9, "max relative discrepancy " + g(worst)};
}

Outcome c11() {
    ReiterationSpec s;
    s.side = LimitingSide::zero;
    s.theta = 0.5;
    s.q = 1.0;
    s.b = W("one");
    s.w = {1.0, W("log(-2,-2)"), 1.0, W("log(0,-3)")};
    double bt = build_tilde_b(s)(1.0);
    auto band = log_derivative_check(s);
    bool band_ok = band.lo >= 0.1 && band.hi <= 10.0;
    std::string head = "b~(1)=" + fmt("%.10g", bt) + " band [" + g(band.lo) + ", " + g(band.hi) + "]";
    try {
        auto r = reiteration_check(s, profile_suite());
        double var = r.ratio_max / r.ratio_min;
        bool pass = std::abs(bt - std::sqrt(2.0)) <= 1e-6 && band_ok && var <= 1e3 && r.skipped == 0;
        return {pass, head + " variation " + g(var)};
    } catch (const std::exception& e) {
        return {false, head + " reiteration_check refused: " + e.what()};
    }
}

Outcome c12() {
    WeightExpr b = W("log(-2,0)");
    std::vector<Rearrangement> suite{Rearrangement::indicator(1.0)};
    auto one = lk_embedding_check(suite, 1.0, b);
    double lk = one.rows[0].lk, in = one.rows[0].interp;
    std::mt19937_64 rng(20240601);
    std::vector<Rearrangement> random;
    for (int i = 0; i < 10; ++i) random.push_back(random_rearrangement(rng, 8));
    auto r = lk_embedding_check(random, 1.0, b);
    bool pass = std::abs(lk - 1.0) <= 1e-6 && std::abs(in - 2.0) <= 1e-6 && r.ratio_min >= 1.0 - 1e-9 &&
                r.ratio_max <= 100.0;
    return {pass, "norms " + fmt("%.10g", lk) + " and " + fmt("%.10g", in) + ", random ratios [" + g(r.ratio_min) +
                      ", " + g(r.ratio_max) + "]"};
}

Outcome c13() {
    LogFn w = LogFn::exp_decay(1.0), phi = LogFn::constant(1.0);
    LogFn v = hardy_build_v(HardyCase::HET1, 2.0, w, phi);
    HardySides s = hardy_sides(HardyCase::HET1, 2.0, w, phi, v, LogFn::constant(1.0));
    HardyReport r = hardy_check(HardyCase::HET1, 2.0, w, phi, 50, 20240601);
    bool pass = std::abs(s.lhs - 2.0) <= 1e-6 && std::abs(s.rhs - 1.0) <= 1e-6 && r.samples == 50 &&
                r.max_ratio <= 10.0;
    return {pass, "h=1: LHS=" + fmt("%.10g", s.lhs) + " RHS=" + fmt("%.10g", s.rhs) + ", C=" + g(r.max_ratio)};
}

Outcome c14() {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const char* weights[] = {"one", "log(0,-2)", "log(1,1)", "explog(0.5)"};
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
        double x = std::pow(10.0, -2.0 + 3.0 * u(rng));
        SeparableKernel psi{0.5 + 1.5 * u(rng), W(weights[rng() % 4]), 0.5 + 1.5 * u(rng), W(weights[rng() % 4]),
                            0.5 + 1.5 * u(rng)};
        double alpha = 0.25 + 0.75 * u(rng);
        LogFn w = LogFn::exp_decay(0.5 + u(rng));
        LogFn v = LogFn::exp_decay(0.5 + u(rng));
        HmtReport r = hmt_check(alpha, psi, w, v, {x});
        const HmtRow& row = r.rows.at(0);
        worst = std::max({worst, rel(row.inequality_lhs, row.condition_lhs), rel(row.inequality_rhs, row.condition_rhs)});
    }
    return {worst <= 1e-9, "20 samples, max relative discrepancy " + g(worst)};
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        std::ifstream in(e.path(), std::ios::binary);
        files[fs::relative(e.path(), dir).string()] =
            std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    }
    return files;
}

Outcome c15(const std::string& config_path) {
    cli::Config cfg;
    try {
        cfg = cli::load_config(config_path);
    } catch (const std::exception& e) {
        return {false, std::string("cannot load config: ") + e.what()};
    }
    fs::path cwd = fs::current_path();
    std::vector<std::map<std::string, std::string>> runs;
    int codes[2] = {-1, -1};
    for (int k = 0; k < 2; ++k) {
        fs::path dir = fs::temp_directory_path() / ("klab_acceptance_run" + std::to_string(k));
        fs::remove_all(dir);
        fs::create_directories(dir);
        fs::current_path(dir);
        std::ostringstream log;
        try {
            cli::RunOptions opt;
            codes[k] = cli::run(cli::prepare(cfg, opt), opt, log);
        } catch (const std::exception& e) {
            log << e.what();
        }
        fs::current_path(cwd);
        runs.push_back(snapshot(dir));
        fs::remove_all(dir);
    }
    bool same = runs[0] == runs[1] && !runs[0].empty();
    return {same && codes[0] == 0 && codes[1] == 0,
            std::to_string(runs[0].size()) + " files, " + (same ? "byte-identical" : "differ") + ", exit codes " +
                std::to_string(codes[0]) + "/" + std::to_string(codes[1])};
}

}  // namespace

int main(int argc, char** argv) {
    std::string config = argc > 1 ? argv[1] : "configs/full.cfg";
    std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"closed-form quadrature", c1},
        {"head/tail weight bands", c2},
        {"best constant A3", c3},
        {"extremal identity", c4},
        {"limiting00 scan", c5},
        {"limiting00 equal q", c6},
        {"condition gate", c7},
        {"limiting11 symmetry", c8},
        {"nonexistence demo", c9},
        {"equal spaces", c10},
        {"reiteration", c11},
        {"Lorentz-Karamata norms", c12},
        {"Hardy HET1", c13},
        {"hmt reduction", c14},
        {"determinism", [&] { return c15(config); }},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (!o.pass) ++failed;
        std::printf("[%s] criterion %2zu %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                    o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria failed\n", failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
