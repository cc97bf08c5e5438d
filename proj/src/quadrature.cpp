#include "klab/quadrature.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace klab {

namespace {

constexpr double kSlopeMargin = 1e-6;
constexpr double kMaxSegment = 16.0;

boost::math::quadrature::tanh_sinh<double>& finite_rule() {
    thread_local boost::math::quadrature::tanh_sinh<double> rule;
    return rule;
}

boost::math::quadrature::exp_sinh<double>& tail_rule() {
    thread_local boost::math::quadrature::exp_sinh<double> rule;
    return rule;
}

std::vector<double> merge_breaks(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out;
    out.reserve(a.size() + b.size());
    out.insert(out.end(), a.begin(), a.end());
    out.insert(out.end(), b.begin(), b.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

[[noreturn]] void non_finite(double x, double v) {
    std::ostringstream msg;
    msg << "non-finite integrand: ln g = " << v << " at ln t = " << x;
    throw std::domain_error(msg.str());
}

// exp(q ln g(x) - shift), rejecting NaN and +inf.
struct ShiftedIntegrand {
    const LogFn* g;
    double q;
    double shift;

    double operator()(double x) const {
        double v = g->log_at(x);
        if (std::isnan(v) || v == kInf) non_finite(x, v);
        return std::exp(q * v - shift);
    }
};

struct Piece {
    double value = 0.0;
    double error = 0.0;
};

// Uniform pieces of at most 16 units for |x| <= 1024, geometric pieces
// (endpoints at +-1024 * 2^k) beyond, so long spans stay cheap.
std::vector<double> partition(double x0, double x1) {
    constexpr double kUniformSpan = 1024.0;
    std::vector<double> cuts{x0, x1};
    double lo = std::max(x0, -kUniformSpan), hi = std::min(x1, kUniformSpan);
    if (lo < hi) {
        cuts.push_back(lo);
        cuts.push_back(hi);
        int chunks = std::max(1, static_cast<int>(std::ceil((hi - lo) / kMaxSegment)));
        for (int i = 1; i < chunks; ++i) cuts.push_back(lo + (hi - lo) * i / chunks);
    }
    for (double m = kUniformSpan; m < 1e300; m *= 2.0) {
        if (m > x0 && m < x1) cuts.push_back(m);
        if (-m > x0 && -m < x1) cuts.push_back(-m);
        if (m > std::max(std::abs(x0), std::abs(x1))) break;
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    return cuts;
}

Piece integrate_finite(const ShiftedIntegrand& f, double x0, double x1, double tol) {
    Piece out;
    auto cuts = partition(x0, x1);
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        double err = 0.0;
        double l1 = 0.0;
        out.value += finite_rule().integrate(f, cuts[i], cuts[i + 1], tol, &err, &l1);
        out.error += err;
    }
    return out;
}

// Tail (c, inf) or (-inf, c) through x = c +- s (e^z - 1).
Piece integrate_tail(const ShiftedIntegrand& f, double c, bool right, double tol) {
    double s = std::max(1.0, std::abs(c));
    double sign = right ? 1.0 : -1.0;
    auto mapped = [&](double z) {
        double ez = std::exp(z);
        double x = c + sign * s * (ez - 1.0);
        if (!std::isfinite(x)) return 0.0;
        double v = f(x);
        if (v == 0.0) return 0.0;
        double out = v * s * ez;
        return std::isfinite(out) ? out : 0.0;
    };
    Piece out;
    double l1 = 0.0;
    out.value = tail_rule().integrate(mapped, 0.0, kInf, tol, &out.error, &l1);
    return out;
}

double slope_at(const LogFn& g, double q, double x1, double x2) {
    double v1 = q * g.log_at(x1);
    double v2 = q * g.log_at(x2);
    if (v2 == -kInf) return -kInf;
    if (v1 == -kInf) return kInf;
    return (v2 - v1) / std::log(std::abs(x2 / x1));
}

}  // namespace

// ---------------------------------------------------------------- GridSpec

void GridSpec::validate() const {
    if (!(t_min > 0.0) || !(t_max > t_min) || !std::isfinite(t_max))
        throw std::invalid_argument("grid: require 0 < t_min < t_max < inf");
    if (points_per_decade < 8) throw std::invalid_argument("grid: points_per_decade must be >= 8");
}

std::vector<double> GridSpec::log_points() const {
    validate();
    double lo = std::log(t_min);
    double hi = std::log(t_max);
    double decades = (hi - lo) / std::log(10.0);
    int n = std::max(1, static_cast<int>(std::ceil(decades * points_per_decade - 1e-9)));
    std::vector<double> xs(n + 1);
    for (int i = 0; i <= n; ++i) xs[i] = lo + (hi - lo) * i / n;
    xs.back() = hi;
    return xs;
}

std::vector<double> GridSpec::points() const {
    auto xs = log_points();
    for (double& x : xs) x = std::exp(x);
    xs.front() = t_min;
    xs.back() = t_max;
    return xs;
}

GridSpec GridSpec::parse(const std::string& text) {
    GridSpec g;
    std::istringstream in(text);
    std::string a, b, c;
    if (!std::getline(in, a, ',') || !std::getline(in, b, ',') || !std::getline(in, c))
        throw std::invalid_argument("grid: expected tmin,tmax,ppd");
    try {
        std::size_t used = 0;
        g.t_min = std::stod(a, &used);
        g.t_max = std::stod(b, &used);
        g.points_per_decade = std::stoi(c, &used);
    } catch (const std::logic_error&) {
        throw std::invalid_argument("grid: malformed number in '" + text + "'");
    }
    g.validate();
    return g;
}

// ------------------------------------------------------------------- LogFn

LogFn::LogFn() : log_at_([](double) { return -kInf; }), zero_(true) {}

LogFn::LogFn(Fn log_at, std::vector<double> breaks)
    : log_at_(std::move(log_at)), breaks_(std::move(breaks)) {
    std::sort(breaks_.begin(), breaks_.end());
    breaks_.erase(std::unique(breaks_.begin(), breaks_.end()), breaks_.end());
}

LogFn LogFn::constant(double c) {
    if (c == 0.0) return LogFn();
    if (!(c > 0.0) || !std::isfinite(c)) throw std::invalid_argument("LogFn::constant: c must be positive");
    double lc = std::log(c);
    return LogFn([lc](double) { return lc; });
}

LogFn LogFn::power(double a) {
    return LogFn([a](double x) { return a * x; });
}

LogFn LogFn::exp_decay(double c) {
    if (!(c > 0.0)) throw std::invalid_argument("LogFn::exp_decay: rate must be positive");
    return LogFn([c](double x) { return -c * std::exp(x); });
}

LogFn LogFn::from_linear(std::function<double(double)> g, std::vector<double> breaks) {
    return LogFn([g = std::move(g)](double x) { return std::log(g(std::exp(x))); }, std::move(breaks));
}

double LogFn::operator()(double t) const { return std::exp(log_at_(std::log(t))); }

LogFn LogFn::operator*(const LogFn& other) const {
    if (zero_ || other.zero_) return LogFn();
    return LogFn([a = log_at_, b = other.log_at_](double x) { return a(x) + b(x); },
                 merge_breaks(breaks_, other.breaks_));
}

LogFn LogFn::pow(double r) const {
    if (zero_) {
        if (r > 0.0) return LogFn();
        throw std::invalid_argument("LogFn::pow: non-positive power of the zero function");
    }
    return LogFn([a = log_at_, r](double x) { return r * a(x); }, breaks_);
}

LogFn LogFn::times_power(double p) const {
    if (zero_) return LogFn();
    return LogFn([a = log_at_, p](double x) { return a(x) + p * x; }, breaks_);
}

LogFn LogFn::flip() const {
    if (zero_) return LogFn();
    std::vector<double> br;
    br.reserve(breaks_.size());
    for (double b : breaks_) br.push_back(-b);
    return LogFn([a = log_at_](double x) { return a(-x); }, std::move(br));
}

// ------------------------------------------------------------- integration

double far_field_slope(const LogFn& g, double q, DivergentEnd end) {
    double s = end == DivergentEnd::at_infinity ? 1.0 : -1.0;
    double near = slope_at(g, q, s * 1e13, s * 1e14);
    double far = slope_at(g, q, s * 1e14, s * 1e15);
    // Power-log integrands have monotone far-field slopes; take the larger
    // so borderline cases are reported as divergent.
    if (std::isnan(near)) return far;
    if (std::isnan(far)) return near;
    return std::max(near, far);
}

IntegralResult integrate_log(const LogFn& g, double q, double a, double b,
                             const IntegrationOptions& opt) {
    if (!(a >= 0.0) || !(b >= a)) throw std::invalid_argument("integrate_log: require 0 <= a <= b");
    double xa = a > 0.0 ? std::log(a) : -kInf;
    double xb = std::isinf(b) ? kInf : std::log(b);
    return integrate_log_x(g, q, xa, xb, opt);
}

IntegralResult integrate_log_x(const LogFn& g, double q, double xa, double xb,
                               const IntegrationOptions& opt) {
    if (!(q > 0.0) || !std::isfinite(q)) throw std::invalid_argument("integrate_log: q must be positive and finite");
    if (std::isnan(xa) || std::isnan(xb) || xb < xa) throw std::invalid_argument("integrate_log: require a <= b");
    if (!(opt.tol > 0.0) || opt.tol > 1e-3) throw std::invalid_argument("integrate_log: tol must lie in (0, 1e-3]");

    IntegralResult res;
    if (g.is_zero() || xa == xb) return res;

    auto diverges = [&](Convergence hint, DivergentEnd end) {
        if (hint != Convergence::unknown) return hint == Convergence::diverges;
        double slope = far_field_slope(g, q, end);
        return !(slope < -1.0 - kSlopeMargin);
    };
    std::optional<DivergentEnd> bad;
    if (xa == -kInf && diverges(opt.at_zero, DivergentEnd::at_zero)) bad = DivergentEnd::at_zero;
    else if (xb == kInf && diverges(opt.at_infinity, DivergentEnd::at_infinity)) bad = DivergentEnd::at_infinity;
    if (bad) {
        res.value = kInf;
        res.log_value = kInf;
        res.error_bound = kInf;
        res.divergent_end = bad;
        return res;
    }

    std::vector<double> pts;
    pts.push_back(xa);
    for (double br : g.breaks())
        if (br > xa && br < xb) pts.push_back(br);
    pts.push_back(xb);
    // t = 1 is where the |ln t| based weights switch branches
    if (xa < 0.0 && xb > 0.0) pts.push_back(0.0);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

    // Shift so the largest sampled integrand value is O(1).
    double shift = -kInf;
    auto sample = [&](double x) {
        double v = q * g.log_at(x);
        if (std::isnan(v) || v == kInf) non_finite(x, v / q);
        shift = std::max(shift, v);
    };
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (std::isfinite(pts[i])) sample(pts[i]);
        if (i + 1 < pts.size() && std::isfinite(pts[i]) && std::isfinite(pts[i + 1])) {
            for (double w : {0.25, 0.5, 0.75}) sample(pts[i] + w * (pts[i + 1] - pts[i]));
        }
    }
    for (double z : {0.25, 1.0, 2.0, 3.0, 5.0}) {
        if (std::isinf(xa)) {
            double c = pts[1];
            sample(c - std::max(1.0, std::abs(c)) * std::expm1(z));
        }
        if (std::isinf(xb)) {
            double c = pts[pts.size() - 2];
            sample(c + std::max(1.0, std::abs(c)) * std::expm1(z));
        }
    }
    if (shift == -kInf) return res;

    ShiftedIntegrand f{&g, q, shift};
    double sum = 0.0;
    double err = 0.0;
    try {
        for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
            Piece p;
            if (std::isinf(pts[i])) p = integrate_tail(f, pts[i + 1], false, opt.tol);
            else if (std::isinf(pts[i + 1])) p = integrate_tail(f, pts[i], true, opt.tol);
            else p = integrate_finite(f, pts[i], pts[i + 1], opt.tol);
            sum += p.value;
            err += p.error;
        }
    } catch (const boost::math::evaluation_error& e) {
        throw std::domain_error(std::string("integrate_log: ") + e.what());
    }
    if (sum <= 0.0) return res;
    res.log_value = shift + std::log(sum);
    res.value = std::exp(res.log_value);
    res.error_bound = err * std::exp(shift);
    return res;
}

double log_qnorm(const LogFn& g, double q, double a, double b, const IntegrationOptions& opt) {
    if (!(a >= 0.0) || !(b >= a)) throw std::invalid_argument("qnorm: require 0 <= a <= b");
    double xa = a > 0.0 ? std::log(a) : -kInf;
    double xb = std::isinf(b) ? kInf : std::log(b);
    return log_qnorm_x(g, q, xa, xb, opt);
}

double log_qnorm_x(const LogFn& g, double q, double xa, double xb, const IntegrationOptions& opt) {
    if (std::isinf(q)) return xa == xb ? -kInf : log_sup_x(g, xa, xb);
    auto r = integrate_log_x(g, q, xa, xb, opt);
    if (r.divergent_end) return kInf;
    return r.log_value / q;
}

double qnorm(const LogFn& g, double q, double a, double b, const IntegrationOptions& opt) {
    return std::exp(log_qnorm(g, q, a, b, opt));
}

// ------------------------------------------------------------------ suprema

double log_sup(const LogFn& g, double a, double b, const GridSpec& grid) {
    if (!(a >= 0.0) || !(b > a)) throw std::invalid_argument("sup_log: require 0 <= a < b");
    double xa = a > 0.0 ? std::log(a) : -kInf;
    double xb = std::isinf(b) ? kInf : std::log(b);
    return log_sup_x(g, xa, xb, grid);
}

double log_sup_x(const LogFn& g, double xa, double xb, const GridSpec& grid) {
    if (!(xb > xa)) throw std::invalid_argument("sup_log: empty interval");
    if (g.is_zero()) return -kInf;

    std::vector<double> xs;
    for (double x : grid.log_points())
        if (x > xa && x < xb) xs.push_back(x);
    for (double br : g.breaks())
        if (br > xa && br < xb) xs.push_back(br);
    if (std::isfinite(xa)) xs.push_back(xa);
    if (std::isfinite(xb)) xs.push_back(xb);
    for (double p = 2; p <= 15; ++p) {
        double x = std::pow(10.0, p);
        if (x > xa && x < xb) xs.push_back(x);
        if (-x > xa && -x < xb) xs.push_back(-x);
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

    auto eval = [&](double x) {
        double v = g.log_at(x);
        if (std::isnan(v)) non_finite(x, v);
        return v;
    };
    // Unbounded growth toward an infinite end.
    if (std::isinf(xb) && slope_at(g, 1.0, 1e14, 1e15) > 1e-9 && eval(1e15) > eval(1e14)) return kInf;
    if (std::isinf(xa) && slope_at(g, 1.0, -1e14, -1e15) > 1e-9 && eval(-1e15) > eval(-1e14)) return kInf;

    std::size_t best = 0;
    std::vector<double> vals(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        vals[i] = eval(xs[i]);
        if (vals[i] == kInf) return kInf;
        if (vals[i] > vals[best]) best = i;
    }
    double best_val = vals[best];
    if (best_val == -kInf) return -kInf;

    // Golden-section refinement on the bracketing interval.
    if (best > 0 && best + 1 < xs.size()) {
        double lo = xs[best - 1];
        double hi = xs[best + 1];
        const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
        double c = hi - ratio * (hi - lo);
        double d = lo + ratio * (hi - lo);
        double fc = eval(c);
        double fd = eval(d);
        for (int it = 0; it < 80 && (hi - lo) > 1e-12 * std::max(1.0, std::abs(lo)); ++it) {
            if (fc > fd) {
                hi = d;
                d = c;
                fd = fc;
                c = hi - ratio * (hi - lo);
                fc = eval(c);
            } else {
                lo = c;
                c = d;
                fc = fd;
                d = lo + ratio * (hi - lo);
                fd = eval(d);
            }
        }
        best_val = std::max({best_val, fc, fd});
    }
    return best_val;
}

double sup_log(const LogFn& g, double a, double b, const GridSpec& grid) {
    return std::exp(log_sup(g, a, b, grid));
}

// ------------------------------------------------------- quasi-monotonicity

double quasi_monotone_constant(const std::vector<double>& log_values, Direction dir) {
    double worst = 0.0;
    double running = -kInf;
    for (double v : log_values) {
        if (std::isnan(v)) continue;
        double s = dir == Direction::nondecreasing ? v : -v;
        if (running > -kInf) {
            double d = running - s;
            if (d > worst) worst = d;
        }
        running = std::max(running, s);
    }
    return std::exp(worst);
}

double quasi_monotone_constant(const LogFn& g, const GridSpec& grid, Direction dir) {
    auto xs = grid.log_points();
    std::vector<double> vals;
    vals.reserve(xs.size());
    for (double x : xs) vals.push_back(g.log_at(x));
    return quasi_monotone_constant(vals, dir);
}

}  // namespace klab
