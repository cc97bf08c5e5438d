#include "klab/interp_norms.hpp"

#include <cmath>
#include <stdexcept>

namespace klab {

SpaceSpec SpaceSpec::make(double theta, double q, const WeightExpr& b) {
    if (!(theta >= 0.0 && theta <= 1.0)) throw std::invalid_argument("space: theta must lie in [0,1]");
    if (!(q > 0.0)) throw std::invalid_argument("space: q must be positive");
    if (theta == 0.0 && !classify(b, q).in_SV0q)
        throw PreconditionError("space: theta = 0 requires b in SV_{0,q}, got " + b.to_string());
    if (theta == 1.0 && !classify(b, q).in_SV1q)
        throw PreconditionError("space: theta = 1 requires b in SV_{1,q}, got " + b.to_string());
    return SpaceSpec{theta, q, b};
}

double log_space_norm(const KProfile& f, const SpaceSpec& s) {
    if (f.is_zero()) return -kInf;
    LogFn g = s.b.as_log_fn() * f.as_log_fn(-s.theta);
    if (std::isinf(s.q)) return log_sup(g, 0.0, kInf);
    return log_qnorm(g, s.q, 0.0, kInf);
}

double space_norm(const KProfile& f, const SpaceSpec& s) { return std::exp(log_space_norm(f, s)); }

PartialNorms partial_norms(const KProfile& f, double t, LimitingSide side, const WeightPair& w) {
    if (!(t > 0.0) || !std::isfinite(t)) throw std::invalid_argument("partial_norms: t must be positive");
    PartialNorms r;
    if (f.is_zero()) return r;
    LogFn k = f.as_log_fn(side == LimitingSide::one ? -1.0 : 0.0);
    LogFn g0 = w.b0.as_log_fn() * k;
    LogFn g1 = w.b1.as_log_fn() * k;
    r.I = std::exp(log_qnorm(g0, w.q0, 0.0, t));
    r.J = std::exp(log_qnorm(g1, w.q1, t, kInf));
    return r;
}

namespace {

bool is_eta(IndexKind k) { return k == IndexKind::eta || k == IndexKind::eta_eps; }

double power_of(IndexKind k, double eps) {
    if (k == IndexKind::rho_eps || k == IndexKind::eta_eps) {
        if (!(eps > 0.0)) throw std::invalid_argument("index: eps must be positive");
        return 1.0 + eps;
    }
    return 1.0;
}

// ln numerator base and ln denominator at x = ln t
std::pair<double, double> log_parts(IndexKind kind, const WeightPair& w, double x) {
    if (is_eta(kind)) return {log_head_qnorm_x(w.b0, w.q0, x), log_head_qnorm_x(w.b1, w.q1, x)};
    return {log_tail_qnorm_x(w.b0, w.q0, x), log_tail_qnorm_x(w.b1, w.q1, x)};
}

double combine(double ln_num, double ln_den) {
    if (std::isinf(ln_num) && std::isinf(ln_den) && (ln_num > 0) == (ln_den > 0))
        return std::numeric_limits<double>::quiet_NaN();
    return ln_num - ln_den;
}

}  // namespace

IndexPair index(double t, IndexKind kind, const WeightPair& w, double eps) {
    if (!(t > 0.0) || !std::isfinite(t)) throw std::invalid_argument("index: t must be positive");
    double p = power_of(kind, eps);
    auto [n, d] = log_parts(kind, w, std::log(t));
    IndexPair r;
    r.numerator = std::exp(p * n);
    r.denominator = std::exp(d);
    double v = combine(p * n, d);
    r.defined = !std::isnan(v);
    r.value = r.defined ? std::exp(v) : std::numeric_limits<double>::quiet_NaN();
    return r;
}

LogFn index_log_fn(IndexKind kind, const WeightPair& w, double eps) {
    double p = power_of(kind, eps);
    std::vector<double> br = w.b0.breaks();
    for (double b : w.b1.breaks()) br.push_back(b);
    return LogFn(
        [kind, w, p](double x) {
            auto [n, d] = log_parts(kind, w, x);
            return combine(p * n, d);
        },
        br);
}

std::vector<double> default_eps_grid() {
    std::vector<double> g;
    for (int k = 0; k <= 10; ++k) g.push_back(std::ldexp(1.0, -k));
    return g;
}

ConditionReport check_condition_monotone_index(IndexKind kind, const WeightPair& w,
                                               const std::vector<double>& eps_grid, double threshold,
                                               const GridSpec& grid) {
    if (kind != IndexKind::rho_eps && kind != IndexKind::eta_eps)
        throw std::invalid_argument("condition check applies to rho_eps or eta_eps");
    grid.validate();
    auto xs = grid.log_points();
    std::vector<double> num(xs.size()), den(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) std::tie(num[i], den[i]) = log_parts(kind, w, xs[i]);

    ConditionReport r;
    for (double eps : eps_grid) {
        double p = power_of(kind, eps);
        std::vector<double> v(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i) v[i] = combine(p * num[i], den[i]);
        double c = quasi_monotone_constant(v, Direction::nondecreasing);
        r.tried.emplace_back(eps, c);
        if (c < r.best_constant) {
            r.best_constant = c;
            r.best_eps = eps;
        }
    }
    r.pass = r.best_constant <= threshold;
    return r;
}

double index_monotone_constant(IndexKind kind, const WeightPair& w, const GridSpec& grid) {
    IndexKind base = is_eta(kind) ? IndexKind::eta : IndexKind::rho;
    grid.validate();
    std::vector<double> v;
    for (double x : grid.log_points()) {
        auto [n, d] = log_parts(base, w, x);
        v.push_back(combine(n, d));
    }
    return quasi_monotone_constant(v, Direction::nondecreasing);
}

}  // namespace klab
