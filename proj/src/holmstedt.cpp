#include "klab/holmstedt.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

namespace klab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// ||u^{-theta-1/q} b K||_{q,(a,b)} in the du/u form, as a logarithm
// ||u^{-theta-1/q} b K||_{q,(e^xa, e^xb)} in the du/u form, as a logarithm
double log_window_norm(const KProfile& f, double theta, double q, const WeightExpr& b, double xa, double xb) {
    LogFn g = b.as_log_fn() * f.as_log_fn(-theta);
    if (std::isinf(q)) return log_sup_x(g, xa, xb);
    return log_qnorm_x(g, q, xa, xb);
}

double log_add(double a, double b) {
    if (a < b) std::swap(a, b);
    if (std::isinf(a)) return a;
    return a + std::log1p(std::exp(b - a));
}

double log_ratio_weight(const WeightExpr& b0, const WeightExpr& b1, double x) {
    double n = b0.log_at(x), d = b1.log_at(x);
    if (std::isinf(n) && std::isinf(d) && (n > 0) == (d > 0)) return kNaN;
    return n - d;
}

}  // namespace

const char* to_string(HolmstedtKind k) {
    switch (k) {
        case HolmstedtKind::limiting00: return "limiting00";
        case HolmstedtKind::limiting11: return "limiting11";
        case HolmstedtKind::interior_equal_q: return "interior_equal_q";
        case HolmstedtKind::nonlimiting: return "nonlimiting";
    }
    return "?";
}

HolmstedtKind parse_holmstedt_kind(const std::string& name) {
    for (auto k : {HolmstedtKind::limiting00, HolmstedtKind::limiting11, HolmstedtKind::interior_equal_q,
                   HolmstedtKind::nonlimiting})
        if (name == to_string(k)) return k;
    throw std::invalid_argument("unknown case '" + name +
                                "' (expected limiting00, limiting11, interior_equal_q or nonlimiting)");
}

HolmstedtCase HolmstedtCase::limiting00(const WeightPair& w) {
    HolmstedtCase c;
    c.kind = HolmstedtKind::limiting00;
    c.w = w;
    c.X0();
    c.X1();
    return c;
}

HolmstedtCase HolmstedtCase::limiting11(const WeightPair& w) {
    HolmstedtCase c;
    c.kind = HolmstedtKind::limiting11;
    c.theta0 = c.theta1 = 1.0;
    c.w = w;
    c.X0();
    c.X1();
    return c;
}

HolmstedtCase HolmstedtCase::interior_equal_q(double theta, double q, const WeightExpr& b0, const WeightExpr& b1) {
    if (!(theta > 0.0 && theta < 1.0)) throw std::invalid_argument("interior_equal_q: theta must lie in (0,1)");
    HolmstedtCase c;
    c.kind = HolmstedtKind::interior_equal_q;
    c.theta0 = c.theta1 = theta;
    c.w = WeightPair{q, b0, q, b1};
    c.X0();
    return c;
}

HolmstedtCase HolmstedtCase::nonlimiting(double theta0, double theta1, const WeightPair& w) {
    if (!(theta0 > 0.0 && theta0 < theta1 && theta1 < 1.0))
        throw std::invalid_argument("nonlimiting: need 0 < theta0 < theta1 < 1");
    HolmstedtCase c;
    c.kind = HolmstedtKind::nonlimiting;
    c.theta0 = theta0;
    c.theta1 = theta1;
    c.w = w;
    c.X0();
    c.X1();
    return c;
}

SpaceSpec HolmstedtCase::X0() const { return SpaceSpec::make(theta0, w.q0, w.b0); }
SpaceSpec HolmstedtCase::X1() const { return SpaceSpec::make(theta1, w.q1, w.b1); }

double HolmstedtCase::s(double t) const {
    if (!(t > 0.0) || !std::isfinite(t)) throw std::invalid_argument("index: t must be positive");
    return std::exp(log_s_x(std::log(t)));
}

double HolmstedtCase::log_s_x(double x) const {
    switch (kind) {
        case HolmstedtKind::limiting00: return index_log_fn(IndexKind::rho, w).log_at(x);
        case HolmstedtKind::limiting11: return index_log_fn(IndexKind::eta, w).log_at(x);
        case HolmstedtKind::interior_equal_q: return log_ratio_weight(w.b0, w.b1, x);
        case HolmstedtKind::nonlimiting: return (theta1 - theta0) * x + log_ratio_weight(w.b0, w.b1, x);
    }
    return kNaN;
}

void HolmstedtCase::check_hypotheses(const GridSpec& grid) const {
    const double mono_tol = 1.0 + 1e-6;
    auto name = [](IndexKind k) { return k == IndexKind::rho ? "rho" : "eta"; };
    switch (kind) {
        case HolmstedtKind::limiting00:
        case HolmstedtKind::limiting11: {
            bool zero = kind == HolmstedtKind::limiting00;
            IndexKind base = zero ? IndexKind::rho : IndexKind::eta;
            if (w.q0 == w.q1) {
                double c = index_monotone_constant(base, w, grid);
                if (!(c <= mono_tol))
                    throw HypothesisError(std::string("hypothesis failed: ") + name(base) +
                                          " is not nondecreasing (quasi-monotonicity constant " +
                                          std::to_string(c) + ")");
            } else {
                auto r = check_condition_monotone_index(zero ? IndexKind::rho_eps : IndexKind::eta_eps, w,
                                                        default_eps_grid(), 4.0, grid);
                if (!r.pass)
                    throw HypothesisError(std::string("hypothesis failed: ") + name(base) +
                                          "_eps is not equivalent to a nondecreasing function for any eps "
                                          "(best constant " + std::to_string(r.best_constant) + " at eps " +
                                          std::to_string(r.best_eps) + ")");
            }
            return;
        }
        case HolmstedtKind::interior_equal_q: {
            if (w.q0 != w.q1) throw HypothesisError("hypothesis failed: interior_equal_q requires q0 = q1");
            LogFn rho([b0 = w.b0, b1 = w.b1](double x) { return log_ratio_weight(b0, b1, x); });
            double c = quasi_monotone_constant(rho, grid, Direction::nondecreasing);
            if (!(c <= mono_tol))
                throw HypothesisError("hypothesis failed: b0/b1 is not nondecreasing (quasi-monotonicity constant " +
                                      std::to_string(c) + ")");
            return;
        }
        case HolmstedtKind::nonlimiting: return;
    }
}

double rhs_formula(const HolmstedtCase& c, const KProfile& f, double t) {
    if (!(t > 0.0) || !std::isfinite(t)) throw std::invalid_argument("rhs_formula: t must be positive");
    if (f.is_zero()) return 0.0;
    return std::exp(log_rhs_formula_x(c, f, std::log(t)));
}

double log_rhs_formula_x(const HolmstedtCase& c, const KProfile& f, double x) {
    if (f.is_zero()) return -kInf;
    double ls = c.log_s_x(x);
    if (std::isnan(ls)) return kNaN;
    double head = log_window_norm(f, c.theta0, c.w.q0, c.w.b0, -kInf, x);
    double tail = log_window_norm(f, c.theta1, c.w.q1, c.w.b1, x, kInf);
    // s * tail with 0 * inf read as 0
    double second = (ls == -kInf || tail == -kInf) ? -kInf : ls + tail;
    return log_add(head, second);
}

TruncationFamily::TruncationFamily(const HolmstedtCase& c, const KProfile& f)
    : case_(c), x0_(c.X0()), x1_(c.X1()) {
    if (f.is_zero()) return;
    fstar_ = realize_rearrangement(f);
    full0_ = space_norm(f, x0_);
    full1_ = space_norm(f, x1_);

    std::vector<double> levels = fstar_.level_values();
    double lo = kInf, hi = 0.0;
    for (double v : levels) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    for (double u : {1e-12, 1e12}) {
        double v = fstar_(u);
        if (std::isfinite(v) && v > 0.0) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    candidates_ = levels;
    if (hi > 0.0) {
        double a = std::log(lo) - std::log(100.0), b = std::log(hi) + std::log(100.0);
        const int n = 32;
        for (int i = 0; i < n; ++i) candidates_.push_back(std::exp(a + (b - a) * i / (n - 1)));
    }
    std::sort(candidates_.begin(), candidates_.end());
    candidates_.erase(std::unique(candidates_.begin(), candidates_.end()), candidates_.end());
}

TruncationFamily::Norms TruncationFamily::norms(double lambda) const {
    {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = cache_.find(lambda);
        if (it != cache_.end()) return it->second;
    }
    auto [f0, f1] = truncation_split(fstar_, lambda);
    Norms n;
    n.n0 = f0.is_zero() ? 0.0 : space_norm(K_from_rearrangement(f0), x0_);
    n.n1 = f1.is_zero() ? 0.0 : space_norm(K_from_rearrangement(f1), x1_);
    std::lock_guard<std::mutex> lock(mutex_);
    cache_.emplace(lambda, n);
    return n;
}

std::pair<double, double> TruncationFamily::minimize(double s) const {
    if (fstar_.is_zero()) return {0.0, 0.0};
    auto value = [&](double lambda) {
        Norms n = norms(lambda);
        double v1 = n.n1 == 0.0 ? 0.0 : s * n.n1;
        return n.n0 + v1;
    };
    // trivial decompositions: lambda = 0 (f0 = f) and lambda = inf (f1 = f)
    double best = full0_, arg = 0.0;
    double at_inf = full1_ == 0.0 ? 0.0 : s * full1_;
    if (at_inf < best) {
        best = at_inf;
        arg = kInf;
    }
    std::vector<double> vals(candidates_.size());
    std::size_t bi = candidates_.size();
    for (std::size_t i = 0; i < candidates_.size(); ++i) {
        vals[i] = value(candidates_[i]);
        if (vals[i] < best) {
            best = vals[i];
            arg = candidates_[i];
            bi = i;
        }
    }
    if (bi == candidates_.size()) return {best, arg};

    // golden section on ln(lambda) between the neighbours of every local
    // minimum of the candidate values; the objective need not be unimodal
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    const std::size_t n = candidates_.size();
    for (std::size_t i = 0; i < n; ++i) {
        bool local = (i == 0 || vals[i] <= vals[i - 1]) && (i + 1 == n || vals[i] <= vals[i + 1]);
        if (!local) continue;
        double a = std::log(i > 0 ? candidates_[i - 1] : candidates_[i] / 10.0);
        double b = std::log(i + 1 < n ? candidates_[i + 1] : candidates_[i] * 10.0);
        double x1 = b - g * (b - a), x2 = a + g * (b - a);
        double f1 = value(std::exp(x1)), f2 = value(std::exp(x2));
        for (int it = 0; it < 80 && b - a > 1e-9; ++it) {
            if (f1 <= f2) {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - g * (b - a);
                f1 = value(std::exp(x1));
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + g * (b - a);
                f2 = value(std::exp(x2));
            }
            // plateau: further refinement changes nothing at this precision
            if (std::fabs(f1 - f2) <= 1e-15 * std::max(f1, f2) && b - a < 1e-4) break;
        }
        for (auto [x, v] : {std::pair{x1, f1}, std::pair{x2, f2}}) {
            if (v < best) {
                best = v;
                arg = std::exp(x);
            }
        }
    }
    return {best, arg};
}

double TruncationFamily::lhs(double s) const {
    if (!(s > 0.0)) throw std::invalid_argument("lhs_decomposition: s must be positive");
    return minimize(s).first;
}

double TruncationFamily::argmin(double s) const { return minimize(s).second; }

double lhs_decomposition(const HolmstedtCase& c, const KProfile& f, double t) {
    double s = c.s(t);
    if (std::isnan(s)) return kNaN;
    return TruncationFamily(c, f).lhs(s);
}

ScanReport equivalence_scan(const HolmstedtCase& c, const KProfile& f, const GridSpec& grid, unsigned threads) {
    grid.validate();
    c.check_hypotheses();
    TruncationFamily fam(c, f);
    auto ts = grid.points();
    std::vector<ScanRow> rows(ts.size());
    std::vector<char> ok(ts.size(), 0);

    auto work = [&](std::size_t i) {
        ScanRow r;
        r.t = ts[i];
        r.s = c.s(r.t);
        if (!(r.s > 0.0) || !std::isfinite(r.s)) return;
        r.lhs = fam.lhs(r.s);
        r.rhs = rhs_formula(c, f, r.t);
        if (!(r.lhs > 0.0) || !std::isfinite(r.lhs) || !(r.rhs > 0.0) || !std::isfinite(r.rhs)) return;
        r.ratio = r.lhs / r.rhs;
        rows[i] = r;
        ok[i] = 1;
    };
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(ts.size()));
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < threads; ++k)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < ts.size(); i = next++) work(i);
        });
    for (auto& th : pool) th.join();

    ScanReport rep;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (!ok[i]) {
            ++rep.skipped;
            continue;
        }
        rep.rows.push_back(rows[i]);
        rep.ratio_min = std::min(rep.ratio_min, rows[i].ratio);
        rep.ratio_max = std::max(rep.ratio_max, rows[i].ratio);
    }
    return rep;
}

// ---------------------------------------------------------------- negative demo

namespace {

struct Oriented {
    WeightPair w;
    double r = 0.0;
    bool swapped = false;
};

Oriented orient(const WeightPair& in) {
    if (!(in.q0 > 0.0) || !(in.q1 > 0.0)) throw std::invalid_argument("negative_demo: q0, q1 must be positive");
    if (in.q0 == in.q1) throw std::invalid_argument("negative_demo: requires q0 != q1");
    Oriented o;
    o.w = in;
    if (in.q1 < in.q0) {
        o.w = WeightPair{in.q1, in.b1, in.q0, in.b0};
        o.swapped = true;
    }
    o.r = std::isinf(o.w.q1) ? o.w.q0 : o.w.q0 * o.w.q1 / (o.w.q1 - o.w.q0);
    return o;
}

NegativeRow demo_row(const Oriented& o, double t) {
    NegativeRow row;
    row.t = t;
    const WeightExpr b0 = o.w.b0, b1 = o.w.b1;
    LogFn ratio([b0, b1](double x) { return log_ratio_weight(b0, b1, x); }, [&] {
        auto br = b0.breaks();
        for (double b : b1.breaks()) br.push_back(b);
        return br;
    }());
    double lh = log_qnorm(ratio, o.r, 0.0, t);
    double lu = log_ratio_weight(b0, b1, std::log(t));
    row.head_bound = std::exp(lh);
    row.upper_bound = std::exp(lu);
    row.M = std::isinf(lh) && lh > 0 ? kInf : std::exp(lh - lu);
    return row;
}

}  // namespace

double negative_demo_M(const WeightPair& w, double t) { return demo_row(orient(w), t).M; }

NegativeReport negative_demo(double theta, const WeightPair& w, int points) {
    if (!(theta > 0.0 && theta < 1.0)) throw std::invalid_argument("negative_demo: theta must lie in (0,1)");
    if (points < 8) throw std::invalid_argument("negative_demo: at least 8 grid points");
    Oriented o = orient(w);
    NegativeReport rep;
    rep.swapped = o.swapped;
    rep.r = o.r;
    const double ya = std::log(0.01), yb = std::log(700.0);
    for (int i = 0; i < points; ++i) {
        double y = std::exp(ya + (yb - ya) * i / (points - 1));
        rep.rows.push_back(demo_row(o, std::exp(-y)));
    }

    bool all_inf = std::all_of(rep.rows.begin(), rep.rows.end(), [](const NegativeRow& r) { return std::isinf(r.M); });
    if (all_inf) {
        rep.confirmed = true;
        rep.verdict = "nonexistence confirmed: head integral diverges, M = +inf on the whole grid";
        return rep;
    }
    // from the geometric middle of the |ln t| range down to t_min
    std::size_t mid = rep.rows.size() / 2;
    bool monotone = true;
    for (std::size_t i = mid + 1; i < rep.rows.size(); ++i)
        if (rep.rows[i].M < rep.rows[i - 1].M * (1.0 - 1e-9)) monotone = false;
    double decades = std::log10(rep.rows[mid].t / rep.rows.back().t);
    double growth = rep.rows.back().M / rep.rows[mid].M;
    rep.confirmed = monotone && decades >= 6.0 && growth >= 3.0;
    rep.verdict = rep.confirmed ? "nonexistence confirmed: M grows without bound as t -> 0+ (M(t_min)/M(t_mid) = " +
                                      std::to_string(growth) + ")"
                                : "not confirmed: M(t_min)/M(t_mid) = " + std::to_string(growth) +
                                      (monotone ? "" : ", growth not monotone");
    return rep;
}

}  // namespace klab
