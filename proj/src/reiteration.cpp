#include "klab/reiteration.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

namespace klab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// ln of int_t^inf b^q du/u (side zero) or int_0^t b^q du/u (side one)
double log_mass(LimitingSide side, const WeightExpr& b, double q, double x) {
    double l = side == LimitingSide::zero ? log_tail_qnorm_x(b, q, x) : log_head_qnorm_x(b, q, x);
    return q * l;
}

std::vector<double> weight_breaks(const WeightPair& w) {
    auto br = w.b0.breaks();
    for (double b : w.b1.breaks()) br.push_back(b);
    return br;
}

// d ln(index) / d ln t by central differences
double log_index_slope(const ReiterationSpec& s, double x, double h) {
    return (s.log_index_x(x + h) - s.log_index_x(x - h)) / (2.0 * h);
}

// the same slope from d/dx int_x^inf b^q = -b(x)^q (heads: +b(x)^q)
double log_index_slope_exact(const ReiterationSpec& s, double x) {
    auto term = [&](const WeightExpr& b, double q) {
        double lm = log_mass(s.side, b, q, x);
        return std::exp(q * b.log_at(x) - lm) / q;
    };
    double d = term(s.w.b1, s.w.q1) - term(s.w.b0, s.w.q0);
    return s.side == LimitingSide::zero ? d : -d;
}

template <class F>
void parallel_for(std::size_t n, unsigned threads, F&& f) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < threads; ++k)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) f(i);
        });
    for (auto& th : pool) th.join();
}

}  // namespace

void ReiterationSpec::validate() const {
    if (!(theta > 0.0 && theta < 1.0)) throw std::invalid_argument("reiteration: theta must lie in (0,1)");
    if (!(q > 0.0)) throw std::invalid_argument("reiteration: q must be positive");
    if (std::isinf(q) || std::isinf(w.q0) || std::isinf(w.q1))
        throw PreconditionError("reiteration: q, q0, q1 must be finite (q = inf is not covered by the reiteration formulas)");
    inner();
}

HolmstedtCase ReiterationSpec::inner() const {
    return side == LimitingSide::zero ? HolmstedtCase::limiting00(w) : HolmstedtCase::limiting11(w);
}

double ReiterationSpec::log_index_x(double x) const {
    return index_log_fn(side == LimitingSide::zero ? IndexKind::rho : IndexKind::eta, w).log_at(x);
}

ReiterationSpec flip(const ReiterationSpec& s) {
    ReiterationSpec r = s;
    r.side = s.side == LimitingSide::zero ? LimitingSide::one : LimitingSide::zero;
    r.theta = 1.0 - s.theta;
    r.w.b0 = s.w.b0.flipped();
    r.w.b1 = s.w.b1.flipped();
    return r;
}

namespace {

LogFn build_weight(const ReiterationSpec& s, LimitingSide side) {
    s.validate();
    if (side != s.side) throw std::invalid_argument("reiteration weight requested for the other side");
    double lm = log_mass(side, s.w.b1, s.w.q1, 0.0);
    if (!std::isfinite(lm))
        throw PreconditionError(std::string("reiteration weight: divergent ") +
                                (side == LimitingSide::zero ? "tail" : "head") + " integral of b1^q1");
    const double index_power = side == LimitingSide::zero ? 1.0 - s.theta : s.theta;
    const double mass_power = 1.0 / s.w.q1 - 1.0 / s.q;
    ReiterationSpec spec = s;
    auto br = weight_breaks(s.w);
    for (double b : s.b.breaks()) br.push_back(b);
    return LogFn(
        [spec, side, index_power, mass_power](double x) {
            double li = spec.log_index_x(x);
            double v = index_power * li + spec.b.log_at(li) + spec.w.q1 / spec.q * spec.w.b1.log_at(x);
            if (mass_power != 0.0) v += mass_power * log_mass(side, spec.w.b1, spec.w.q1, x);
            return v;
        },
        br);
}

}  // namespace

LogFn build_tilde_b(const ReiterationSpec& s) { return build_weight(s, LimitingSide::zero); }
LogFn build_hat_b(const ReiterationSpec& s) { return build_weight(s, LimitingSide::one); }
LogFn reiterated_weight(const ReiterationSpec& s) { return build_weight(s, s.side); }

LogDerivativeReport log_derivative_check(const ReiterationSpec& s, const GridSpec& grid, double bound) {
    s.validate();
    grid.validate();
    LogDerivativeReport r;
    r.lo = kInf;
    const double h = 1e-3;
    for (double x : grid.log_points()) {
        double d = log_index_slope(s, x, h);
        double ld = s.w.q1 * s.w.b1.log_at(x) - log_mass(s.side, s.w.b1, s.w.q1, x);
        // the index' / index and the comparison both carry t^{-1}
        double ratio = d / std::exp(ld);
        r.t.push_back(std::exp(x));
        r.ratio.push_back(ratio);
        if (std::isnan(ratio)) {
            r.lo = 0.0;
            continue;
        }
        r.lo = std::min(r.lo, ratio);
        r.hi = std::max(r.hi, ratio);
    }
    r.pass = r.lo >= 1.0 / bound && r.hi <= bound;
    return r;
}

HypothesisReport check_reiteration_hypotheses(const ReiterationSpec& s) {
    s.validate();
    HypothesisReport r;
    const char* name = s.side == LimitingSide::zero ? "rho" : "eta";
    std::vector<double> v;
    for (double x = -1000.0; x <= 1000.0 + 1e-9; x += 5.0) v.push_back(s.log_index_x(x));
    r.index_at_min = std::exp(v.front());
    r.index_at_max = std::exp(v.back());
    bool nan = std::any_of(v.begin(), v.end(), [](double a) { return std::isnan(a); });
    r.monotone_constant = nan ? kInf : quasi_monotone_constant(v, Direction::nondecreasing);
    auto fail = [&](std::string what) {
        r.pass = false;
        r.failed = std::move(what);
        return r;
    };
    if (!(r.monotone_constant <= 1.0 + 1e-6)) return fail(std::string(name) + " is not increasing");
    if (!(r.index_at_min <= 1e-2)) return fail(std::string(name) + " does not tend to 0 at 0+");
    if (!(r.index_at_max >= 1e2)) return fail(std::string(name) + " does not tend to infinity at infinity");
    if (s.w.q0 != s.w.q1) {
        auto c = check_condition_monotone_index(s.side == LimitingSide::zero ? IndexKind::rho_eps : IndexKind::eta_eps,
                                                s.w);
        if (!c.pass) return fail(std::string(name) + "_eps is not equivalent to a nondecreasing function");
    } else {
        auto d = log_derivative_check(s);
        if (!d.pass) return fail(std::string("log-derivative estimate for ") + name + " fails");
    }
    return r;
}

NormPair reiteration_norms(const ReiterationSpec& s, const KProfile& f) {
    s.validate();
    NormPair r;
    if (f.is_zero()) return r;
    HolmstedtCase c = s.inner();
    std::vector<double> br;
    for (double k : f.knots()) br.push_back(std::log(k));
    for (double b : weight_breaks(s.w)) br.push_back(b);

    // int [s^{-theta} b(s) K(s)]^q ds/s with s = index(t), K(s) replaced by the Holmstedt right-hand side
    LogFn outer(
        [s, c, f](double x) {
            double li = s.log_index_x(x);
            if (!std::isfinite(li)) return -kInf;
            double d = log_index_slope_exact(s, x);
            if (!(d > 0.0)) return -kInf;
            double lr = log_rhs_formula_x(c, f, x);
            return s.q * (-s.theta * li + s.b.log_at(li) + lr) + std::log(d);
        },
        br);
    // the inner integrals carry ~1e-12 noise, so the outer rule cannot converge much below that
    IntegrationOptions opt;
    opt.tol = 1e-9;
    auto res = integrate_log_x(outer, 1.0, -kInf, kInf, opt);
    r.lhs = std::exp(res.log_value / s.q);

    LogFn w = reiterated_weight(s);
    double shift = s.side == LimitingSide::zero ? 0.0 : -1.0;
    r.rhs = std::exp(log_qnorm_x(w * f.as_log_fn(shift), s.q, -kInf, kInf));
    return r;
}

ReiterationReport reiteration_check(const ReiterationSpec& s, const std::vector<NamedProfile>& suite,
                                    unsigned threads) {
    auto h = check_reiteration_hypotheses(s);
    if (!h.pass) throw HypothesisError("hypothesis failed: " + h.failed);
    std::vector<ReiterationRow> rows(suite.size());
    std::vector<char> ok(suite.size(), 0);
    parallel_for(suite.size(), threads, [&](std::size_t i) {
        auto n = reiteration_norms(s, suite[i].k);
        rows[i] = ReiterationRow{suite[i].name, n.lhs, n.rhs, kNaN};
        if (n.lhs > 0.0 && std::isfinite(n.lhs) && n.rhs > 0.0 && std::isfinite(n.rhs)) {
            rows[i].ratio = n.lhs / n.rhs;
            ok[i] = 1;
        }
    });
    ReiterationReport rep;
    for (std::size_t i = 0; i < rows.size(); ++i) {
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

double lorentz_karamata_norm(const Rearrangement& f, const LKSpec& s) {
    if (!(s.p > 0.0) || !(s.q > 0.0)) throw std::invalid_argument("Lorentz-Karamata: p and q must be positive");
    if (f.is_zero()) return 0.0;
    LogFn g = s.b.as_log_fn() * f.as_log_fn();
    if (!std::isinf(s.p)) g = g.times_power(1.0 / s.p);
    if (std::isinf(s.q)) return sup_log(g, 0.0, kInf);
    return std::exp(log_qnorm(g, s.q, 0.0, kInf));
}

LKEmbeddingReport lk_embedding_check(const std::vector<Rearrangement>& suite, double q, const WeightExpr& b) {
    SpaceSpec x = SpaceSpec::make(1.0, q, b);
    LKEmbeddingReport rep;
    for (const auto& f : suite) {
        LKEmbeddingRow row;
        row.lk = lorentz_karamata_norm(f, LKSpec{kInf, q, b});
        row.interp = f.is_zero() ? 0.0 : space_norm(K_from_rearrangement(f), x);
        row.ratio = row.lk > 0.0 ? row.interp / row.lk : kNaN;
        if (!std::isnan(row.ratio)) {
            rep.ratio_min = std::min(rep.ratio_min, row.ratio);
            rep.ratio_max = std::max(rep.ratio_max, row.ratio);
        }
        rep.rows.push_back(row);
    }
    return rep;
}

Rearrangement random_rearrangement(std::mt19937_64& rng, int cells, double t_min, double t_max, double lo,
                                   double hi) {
    if (cells < 1) throw std::invalid_argument("random_rearrangement: at least one cell");
    std::uniform_real_distribution<double> ut(std::log(t_min), std::log(t_max));
    std::uniform_real_distribution<double> uv(std::log(lo), std::log(hi));
    std::vector<double> knots, values;
    for (int i = 0; i < cells; ++i) {
        knots.push_back(std::exp(ut(rng)));
        values.push_back(std::exp(uv(rng)));
    }
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
    values.resize(knots.size());
    std::sort(values.begin(), values.end(), std::greater<>());
    values.push_back(0.0);
    return Rearrangement::step(knots, values);
}

}  // namespace klab
