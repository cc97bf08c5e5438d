#include "klab/weighted_ineq.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace klab {

namespace {

double log_add(double a, double b) {
    if (a == -kInf) return b;
    if (b == -kInf) return a;
    double m = std::max(a, b);
    if (m == kInf) return kInf;
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// ln int_x^inf b^q ds/s, +inf when divergent
double log_tail_mass(const WeightExpr& b, double q, double lx) { return q * log_tail_qnorm_x(b, q, lx); }

// ln int_{-inf}^{lx} of (s b(s))^q ds/s
double log_head_power_mass(const WeightExpr& b, double q, double lx) {
    auto r = integrate_log_x(b.as_log_fn().times_power(1.0), q, -kInf, lx);
    return r.divergent_end ? kInf : r.log_value;
}

void check_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string(what) + " must be positive and finite");
}

}  // namespace

const char* to_string(ConstantKind k) {
    switch (k) {
    case ConstantKind::A1: return "A1";
    case ConstantKind::A2: return "A2";
    case ConstantKind::A3: return "A3";
    case ConstantKind::A4: return "A4";
    }
    return "?";
}

double log_extremal_mass(const WeightExpr& w, double q, double lx) {
    return log_add(log_head_power_mass(w, q, lx), q * lx + log_tail_mass(w, q, lx));
}

double log_extremal_direct(const WeightExpr& w, double q, double lx) {
    auto lw = w.as_log_fn();
    std::vector<double> br = lw.breaks();
    br.push_back(lx);
    LogFn g([lw, lx](double x) { return std::min(x, lx) + lw.log_at(x); }, br);
    auto r = integrate_log_x(g, q, -kInf, kInf);
    return r.divergent_end ? kInf : r.log_value;
}

ConstantReport compute_constant(const InequalitySpec& s, ConstantKind which, const GridSpec& grid) {
    check_positive(s.p, "p");
    check_positive(s.q, "q");
    bool sup_form = which == ConstantKind::A1 || which == ConstantKind::A3;
    if (sup_form && !(s.p <= s.q)) throw std::invalid_argument(std::string(to_string(which)) + " requires p <= q");
    if (!sup_form && !(s.q < s.p)) throw std::invalid_argument(std::string(to_string(which)) + " requires q < p");
    bool general = which == ConstantKind::A1 || which == ConstantKind::A2;

    // ln of the two bracketed masses at x = e^lx
    auto mass_w = [s, general](double lx) {
        return general ? log_extremal_mass(s.w, s.q, lx) : log_tail_mass(s.w, s.q, lx);
    };
    auto mass_v = [s, general](double lx) {
        return general ? log_extremal_mass(s.v, s.p, lx) : log_tail_mass(s.v, s.p, lx);
    };
    std::vector<double> br = s.w.breaks();
    for (double b : s.v.breaks()) br.push_back(b);

    ConstantReport r;
    r.which = which;
    if (sup_form) {
        LogFn ratio([=](double lx) { return mass_w(lx) / s.q - mass_v(lx) / s.p; }, br);
        double best = log_sup_x(ratio, -kInf, kInf, grid);
        r.value = std::exp(best);
        // recover the argmax on the grid for reporting
        double arg = 0.0, top = -kInf;
        for (double x : grid.log_points()) {
            double v = ratio.log_at(x);
            if (v > top) {
                top = v;
                arg = x;
            }
        }
        r.argmax = std::exp(arg);
        return r;
    }
    double e = s.q / (s.p - s.q);
    auto lw = s.w.as_log_fn();
    LogFn integrand(
        [=](double lx) {
            double a = mass_w(lx), b = mass_v(lx);
            double lead = general ? s.q * lx : 0.0;
            double term = e * (a - b);
            if (std::isnan(term)) return -kInf;
            return term + lead + s.q * lw.log_at(lx);
        },
        br);
    auto res = integrate_log_x(integrand, 1.0, -kInf, kInf);
    r.value = res.divergent_end ? kInf : std::exp((1.0 / s.q - 1.0 / s.p) * res.log_value);
    r.argmax = std::numeric_limits<double>::quiet_NaN();
    return r;
}

double inequality_ratio(const InequalitySpec& s, const LogFn& h) {
    if (h.is_zero()) return 0.0;
    double lhs = log_qnorm(h * s.w.as_log_fn(), s.q, 0.0, kInf);
    double rhs = log_qnorm(h * s.v.as_log_fn(), s.p, 0.0, kInf);
    if (lhs == -kInf) return 0.0;
    return std::exp(lhs - rhs);
}

ProbeReport best_constant_probe(const InequalitySpec& s, const std::vector<double>& xs) {
    if (!(s.p <= s.q)) throw std::invalid_argument("probe requires p <= q");
    ProbeReport r;
    for (double x : xs) {
        check_positive(x, "probe point");
        double lx = std::log(x);
        double v = std::exp(log_extremal_direct(s.w, s.q, lx) / s.q - log_extremal_direct(s.v, s.p, lx) / s.p);
        if (v > r.sup_ratio) {
            r.sup_ratio = v;
            r.argmax = x;
        }
    }
    return r;
}

WindowReport window_condition(const InequalitySpec& s, WindowSide side, const LogFn& bound, const GridSpec& grid,
                              double threshold) {
    check_positive(s.p, "p");
    check_positive(s.q, "q");
    auto xs = grid.log_points();
    std::size_t n = xs.size();
    std::vector<double> cond(n);
    auto ratio = [s](double lx) { return log_tail_mass(s.w, s.q, lx) / s.q - log_tail_mass(s.v, s.p, lx) / s.p; };
    std::vector<double> br = s.w.breaks();
    for (double b : s.v.breaks()) br.push_back(b);

    if (s.p <= s.q) {
        LogFn rf(ratio, br);
        std::vector<double> vals(n);
        for (std::size_t i = 0; i < n; ++i) vals[i] = ratio(xs[i]);
        if (side == WindowSide::head) {
            double run = log_sup_x(rf, -kInf, xs.front(), grid);
            for (std::size_t i = 0; i < n; ++i) cond[i] = run = std::max(run, vals[i]);
        } else {
            double run = log_sup_x(rf, xs.back(), kInf, grid);
            for (std::size_t i = n; i-- > 0;) cond[i] = run = std::max(run, vals[i]);
        }
    } else {
        double e = s.q / (s.p - s.q);
        auto lw = s.w.as_log_fn();
        LogFn f(
            [=](double lx) {
                double term = e * (log_tail_mass(s.w, s.q, lx) - log_tail_mass(s.v, s.p, lx));
                return std::isnan(term) ? -kInf : term + s.q * lw.log_at(lx);
            },
            br);
        auto piece = [&](double a, double b) {
            auto r = integrate_log_x(f, 1.0, a, b);
            return r.divergent_end ? kInf : r.log_value;
        };
        double outer = 1.0 / s.q - 1.0 / s.p;
        if (side == WindowSide::head) {
            double acc = piece(-kInf, xs.front());
            cond[0] = outer * acc;
            for (std::size_t i = 1; i < n; ++i) {
                acc = log_add(acc, piece(xs[i - 1], xs[i]));
                cond[i] = outer * acc;
            }
        } else {
            double acc = piece(xs.back(), kInf);
            cond[n - 1] = outer * acc;
            for (std::size_t i = n - 1; i-- > 0;) {
                acc = log_add(acc, piece(xs[i], xs[i + 1]));
                cond[i] = outer * acc;
            }
        }
    }

    WindowReport r;
    double worst = -kInf;
    for (std::size_t i = 0; i < n; ++i) {
        double v = cond[i] - bound.log_at(xs[i]);
        if (std::isnan(v)) v = cond[i] == -kInf ? -kInf : kInf;
        worst = std::max(worst, v);
        r.t.push_back(std::exp(xs[i]));
        r.condition.push_back(std::exp(cond[i]));
    }
    r.constant = std::exp(worst);
    r.pass = r.constant <= threshold;
    return r;
}

// ---------------------------------------------------------------- Hardy lemmas

const char* to_string(HardyCase c) {
    switch (c) {
    case HardyCase::HET1: return "HET1";
    case HardyCase::HET2: return "HET2";
    case HardyCase::HET3plus: return "HET3plus";
    case HardyCase::HET3: return "HET3";
    }
    return "?";
}

namespace {

// ln int_{-inf}^{x} g(u) du or ln int_x^inf g(u) du (g a dt-density)
double log_du_head(const LogFn& g, double x) {
    auto r = integrate_log_x(g.times_power(1.0), 1.0, -kInf, x);
    return r.divergent_end ? kInf : r.log_value;
}

double log_du_tail(const LogFn& g, double x) {
    auto r = integrate_log_x(g.times_power(1.0), 1.0, x, kInf);
    return r.divergent_end ? kInf : r.log_value;
}

std::vector<double> merged(std::vector<double> a, const std::vector<double>& b) {
    a.insert(a.end(), b.begin(), b.end());
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    return a;
}

}  // namespace

LogFn hardy_build_v(HardyCase c, double alpha, const LogFn& w, const LogFn& phi) {
    bool outer = c == HardyCase::HET1 || c == HardyCase::HET2;
    if (outer && !(alpha > 1.0)) throw std::invalid_argument("HET1/HET2 require alpha > 1");
    if (!outer && !(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("HET3plus/HET3 require 0 < alpha < 1");
    if (w.is_zero()) return LogFn();
    if (phi.is_zero()) throw std::invalid_argument("phi must be positive");

    // the defining integrals must be finite
    auto probe = [](double v, const char* what) {
        if (!(v < kInf)) throw PreconditionError(std::string("divergent defining integral: ") + what);
    };
    switch (c) {
    case HardyCase::HET1: probe(log_du_tail(w, 0.0), "int_t^inf w"); break;
    case HardyCase::HET2: probe(log_du_head(w, 0.0), "int_0^t w"); break;
    case HardyCase::HET3plus:
        probe(log_du_head(phi, 0.0), "int_0^t phi");
        probe(log_du_tail(w, 0.0), "int_t^inf w");
        break;
    case HardyCase::HET3:
        probe(log_du_tail(phi, 0.0), "int_t^inf phi");
        probe(log_du_head(w, 0.0), "int_0^t w");
        break;
    }
    auto br = merged(w.breaks(), phi.breaks());
    return LogFn(
        [c, alpha, w, phi](double x) {
            double lw = w.log_at(x), lp = phi.log_at(x);
            double out = -kInf;
            switch (c) {
            case HardyCase::HET1: out = (1.0 - alpha) * lw + alpha * (lp + log_du_tail(w, x)); break;
            case HardyCase::HET2: out = (1.0 - alpha) * lw + alpha * (lp + log_du_head(w, x)); break;
            case HardyCase::HET3plus: out = lp + (alpha - 1.0) * log_du_head(phi, x) + log_du_tail(w, x); break;
            case HardyCase::HET3: out = lp + (alpha - 1.0) * log_du_tail(phi, x) + log_du_head(w, x); break;
            }
            // w underflowed together with its tail integral: v vanishes there
            return std::isnan(out) ? -kInf : out;
        },
        br);
}

HardySides hardy_sides(HardyCase c, double alpha, const LogFn& w, const LogFn& phi, const LogFn& v, const LogFn& h) {
    HardySides out;
    if (h.is_zero() || w.is_zero()) {
        if (!h.is_zero() && !v.is_zero()) out.rhs = integrate_log_x((h.pow(alpha) * v).times_power(1.0), 1.0, -kInf, kInf).value;
        return out;
    }
    LogFn ph = phi * h;
    bool head = c == HardyCase::HET1;
    // cumulative inner integral tabulated at the breaks of phi*h
    std::vector<double> knots = ph.breaks();
    std::vector<double> cum(knots.size());
    if (head) {
        double acc = -kInf;
        for (std::size_t i = 0; i < knots.size(); ++i) {
            double a = i == 0 ? -kInf : knots[i - 1];
            acc = log_add(acc, integrate_log_x(ph.times_power(1.0), 1.0, a, knots[i]).log_value);
            cum[i] = acc;
        }
    } else {
        double acc = -kInf;
        for (std::size_t i = knots.size(); i-- > 0;) {
            double b = i + 1 == knots.size() ? kInf : knots[i + 1];
            auto r = integrate_log_x(ph.times_power(1.0), 1.0, knots[i], b);
            if (r.divergent_end) throw PreconditionError("inner integral int_t^inf phi h diverges");
            acc = log_add(acc, r.log_value);
            cum[i] = acc;
        }
    }
    LogFn phd = ph.times_power(1.0);
    auto inner = [knots, cum, phd, head](double x) {
        if (head) {
            auto it = std::upper_bound(knots.begin(), knots.end(), x);
            double start = it == knots.begin() ? -kInf : *(it - 1);
            double base = it == knots.begin() ? -kInf : cum[it - knots.begin() - 1];
            return log_add(base, integrate_log_x(phd, 1.0, start, x).log_value);
        }
        auto it = std::lower_bound(knots.begin(), knots.end(), x);
        double end = it == knots.end() ? kInf : *it;
        double base = it == knots.end() ? -kInf : cum[it - knots.begin()];
        auto r = integrate_log_x(phd, 1.0, x, end);
        if (r.divergent_end) return kInf;
        return log_add(base, r.log_value);
    };
    auto br = merged(merged(w.breaks(), ph.breaks()), v.breaks());
    LogFn left([inner, alpha, w](double x) { return alpha * inner(x) + w.log_at(x) + x; }, br);
    auto l = integrate_log_x(left, 1.0, -kInf, kInf);
    out.lhs = l.divergent_end ? kInf : l.value;
    if (!v.is_zero()) {
        auto r = integrate_log_x((h.pow(alpha) * v).times_power(1.0), 1.0, -kInf, kInf);
        out.rhs = r.divergent_end ? kInf : r.value;
    }
    return out;
}

LogFn random_step_function(std::mt19937_64& rng, int cells, double t_min, double t_max, Monotone m, double lo,
                           double hi) {
    if (cells < 1 || !(t_min > 0.0) || !(t_max > t_min) || !(lo > 0.0) || !(hi >= lo))
        throw std::invalid_argument("random_step_function: bad parameters");
    std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
    std::vector<double> vals(cells);
    for (auto& v : vals) v = u(rng);
    if (m == Monotone::nondecreasing) std::sort(vals.begin(), vals.end());
    if (m == Monotone::nonincreasing) std::sort(vals.rbegin(), vals.rend());
    std::vector<double> knots;
    double a = std::log(t_min), b = std::log(t_max);
    for (int i = 1; i < cells; ++i) knots.push_back(a + (b - a) * i / cells);
    return LogFn(
        [knots, vals](double x) {
            auto it = std::upper_bound(knots.begin(), knots.end(), x);
            return vals[it - knots.begin()];
        },
        knots);
}

HardyReport hardy_check(HardyCase c, double alpha, const LogFn& w, const LogFn& phi, std::size_t samples,
                        std::uint64_t seed) {
    LogFn v = hardy_build_v(c, alpha, w, phi);
    Monotone m = c == HardyCase::HET3plus ? Monotone::nonincreasing
                 : c == HardyCase::HET3   ? Monotone::nondecreasing
                                          : Monotone::none;
    std::mt19937_64 rng(seed);
    HardyReport r;
    for (std::size_t i = 0; i < samples; ++i) {
        LogFn h = random_step_function(rng, 8, 1e-2, 1e2, m);
        auto s = hardy_sides(c, alpha, w, phi, v, h);
        double ratio = s.lhs == 0.0 ? 0.0 : s.lhs / s.rhs;
        r.max_ratio = std::max(r.max_ratio, ratio);
        ++r.samples;
    }
    return r;
}

// ---------------------------------------------------------------- kernel inequality

namespace {

LogFn damped(const WeightExpr& b, double c) {
    if (!(c >= 0.0)) throw std::invalid_argument("kernel decay rate must be nonnegative");
    auto lb = b.as_log_fn();
    return LogFn([lb, c](double x) { return lb.log_at(x) - (c == 0.0 ? 0.0 : c * std::exp(x)); }, lb.breaks());
}

LogFn indicator_above(double lx) {
    return LogFn([lx](double x) { return x > lx ? 0.0 : -kInf; }, {lx});
}

}  // namespace

LogFn SeparableKernel::t_factor() const { return damped(wt, ct); }
LogFn SeparableKernel::u_factor() const { return damped(wu, cu); }

HmtReport hmt_check(double alpha, const SeparableKernel& psi, const LogFn& w, const LogFn& v,
                    const std::vector<double>& xs, double threshold) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("hmt: alpha must lie in (0,1]");
    if (!(psi.scale > 0.0)) throw std::invalid_argument("hmt: kernel scale must be positive");
    LogFn tf = psi.t_factor(), uf = psi.u_factor();
    // int T(t)^alpha w(t) dt, common to both routes
    auto outer = integrate_log_x((tf.pow(alpha) * w).times_power(1.0), 1.0, -kInf, kInf);
    double log_outer = outer.divergent_end ? kInf : outer.log_value;
    double ls = std::log(psi.scale);

    HmtReport r;
    double cond_worst = -kInf, ineq_worst = -kInf;
    for (double x : xs) {
        if (!(x > 0.0)) throw std::invalid_argument("hmt: x must be positive");
        double lx = std::log(x);
        HmtRow row;
        row.x = x;
        // condition: direct integrals over (x, inf)
        double lu = integrate_log_x(uf.times_power(1.0), 1.0, lx, kInf).log_value;
        double c_lhs = w.is_zero() ? -kInf : alpha * (ls + lu) + log_outer;
        double c_rhs = v.is_zero() ? -kInf : integrate_log_x(v.times_power(1.0), 1.0, lx, kInf).log_value;
        // inequality at h = indicator of (x, inf), integrated over (0, inf)
        LogFn h = indicator_above(lx);
        double iu = integrate_log_x((uf * h).times_power(1.0), 1.0, -kInf, kInf).log_value;
        double i_lhs = w.is_zero() ? -kInf : alpha * (ls + iu) + log_outer;
        double i_rhs = v.is_zero() ? -kInf : integrate_log_x((h.pow(alpha) * v).times_power(1.0), 1.0, -kInf, kInf).log_value;
        row.condition_lhs = std::exp(c_lhs);
        row.condition_rhs = std::exp(c_rhs);
        row.inequality_lhs = std::exp(i_lhs);
        row.inequality_rhs = std::exp(i_rhs);
        auto ratio = [](double a, double b) { return a == -kInf ? -kInf : a - b; };
        cond_worst = std::max(cond_worst, ratio(c_lhs, c_rhs));
        ineq_worst = std::max(ineq_worst, ratio(i_lhs, i_rhs));
        r.rows.push_back(row);
    }
    r.condition_constant = std::exp(cond_worst);
    r.inequality_constant = std::exp(ineq_worst);
    r.condition_holds = r.condition_constant <= threshold;
    r.inequality_holds = r.inequality_constant <= threshold;
    return r;
}

}  // namespace klab
