#include "klab/profile.hpp"

#include "klab/weight.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>

namespace klab {

namespace {

// coef * t^p with 0 * inf treated as 0
double term(double coef, double t, double p) {
    if (coef == 0.0) return 0.0;
    if (p == 0.0) return coef;
    return coef * std::pow(t, p);
}

double lin(double coef, double t) { return coef == 0.0 ? 0.0 : coef * t; }

double logterm(double coef, double t) { return coef == 0.0 ? 0.0 : coef * std::log(t); }

void check_tiling(double t0, double t1, double prev_end, std::size_t i, std::size_t n, const char* who) {
    if (i == 0 && t0 != 0.0) throw std::invalid_argument(std::string(who) + ": first piece must start at 0");
    if (i > 0 && t0 != prev_end) throw std::invalid_argument(std::string(who) + ": pieces must be contiguous");
    if (!(t1 > t0)) throw std::invalid_argument(std::string(who) + ": empty piece");
    if (i + 1 == n && !std::isinf(t1)) throw std::invalid_argument(std::string(who) + ": last piece must reach infinity");
}

bool close(double a, double b, double rel) {
    if (a == b) return true;
    return std::fabs(a - b) <= rel * std::max({std::fabs(a), std::fabs(b), 1e-300});
}

}  // namespace

double ProfileSegment::value(double t) const {
    double v = a + lin(b, t);
    return v + (log_term ? logterm(c, t) : term(c, t, g));
}

double ProfileSegment::derivative(double t) const {
    if (log_term) return b + (c == 0.0 ? 0.0 : c / t);
    return b + term(c * g, t, g - 1.0);
}

double ProfileSegment::log_value(double x, double shift) const {
    // terms as (sign, ln|term| including t^shift)
    std::pair<double, double> terms[3];
    int n = 0;
    if (a != 0.0) terms[n++] = {a > 0 ? 1.0 : -1.0, std::log(std::fabs(a)) + shift * x};
    if (b != 0.0) terms[n++] = {b > 0 ? 1.0 : -1.0, std::log(std::fabs(b)) + (1.0 + shift) * x};
    if (c != 0.0) {
        if (log_term) {
            if (x != 0.0) {
                double sg = (c > 0) == (x > 0) ? 1.0 : -1.0;
                terms[n++] = {sg, std::log(std::fabs(c)) + std::log(std::fabs(x)) + shift * x};
            }
        } else {
            terms[n++] = {c > 0 ? 1.0 : -1.0, std::log(std::fabs(c)) + (g + shift) * x};
        }
    }
    if (n == 0) return -kInf;
    double m = terms[0].second;
    for (int i = 1; i < n; ++i) m = std::max(m, terms[i].second);
    if (std::isinf(m)) return m;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += terms[i].first * std::exp(terms[i].second - m);
    return sum > 0.0 ? m + std::log(sum) : -kInf;
}

KProfile::KProfile() = default;

KProfile::KProfile(std::vector<ProfileSegment> segments) : segments_(std::move(segments)) {
    double prev = 0.0;
    for (std::size_t i = 0; i < segments_.size(); ++i) {
        const auto& s = segments_[i];
        check_tiling(s.t0, s.t1, prev, i, segments_.size(), "KProfile");
        prev = s.t1;
        if (!std::isfinite(s.a) || !std::isfinite(s.b) || !std::isfinite(s.c) || !std::isfinite(s.g))
            throw std::invalid_argument("KProfile: non-finite coefficient");
        if (s.a != 0.0 || s.b != 0.0 || s.c != 0.0) zero_ = false;
    }
}

KProfile KProfile::from_exponents(const std::vector<std::pair<double, double>>& nodes,
                                  const std::vector<double>& exponents, double left_exponent,
                                  double right_exponent) {
    if (nodes.empty()) throw std::invalid_argument("profile: at least one node required");
    if (exponents.size() + 1 != nodes.size()) throw std::invalid_argument("profile: one exponent per segment");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (!(nodes[i].first > 0.0) || !(nodes[i].second > 0.0) || !std::isfinite(nodes[i].first) ||
            !std::isfinite(nodes[i].second))
            throw std::invalid_argument("profile: nodes must be positive and finite");
        if (i > 0 && !(nodes[i].first > nodes[i - 1].first))
            throw std::invalid_argument("profile: node positions must increase");
    }
    auto seg = [](double t0, double t1, double tn, double kn, double theta) {
        ProfileSegment s;
        s.t0 = t0;
        s.t1 = t1;
        s.g = theta;
        s.c = kn * std::pow(tn, -theta);
        return s;
    };
    std::vector<ProfileSegment> segs;
    segs.push_back(seg(0.0, nodes.front().first, nodes.front().first, nodes.front().second, left_exponent));
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
        segs.push_back(seg(nodes[i].first, nodes[i + 1].first, nodes[i].first, nodes[i].second, exponents[i]));
    segs.push_back(seg(nodes.back().first, kInf, nodes.back().first, nodes.back().second, right_exponent));
    return KProfile(std::move(segs));
}

KProfile KProfile::piecewise_power(const std::vector<std::pair<double, double>>& nodes, double left_exponent,
                                   double right_exponent) {
    std::vector<double> ex;
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
        ex.push_back(std::log(nodes[i + 1].second / nodes[i].second) / std::log(nodes[i + 1].first / nodes[i].first));
    return from_exponents(nodes, ex, left_exponent, right_exponent);
}

KProfile KProfile::min1() { return piecewise_power({{1.0, 1.0}}, 1.0, 0.0); }

KProfile KProfile::power(double theta, double scale) {
    if (!(scale > 0.0)) throw std::invalid_argument("power profile: scale must be positive");
    ProfileSegment s;
    s.c = scale;
    s.g = theta;
    return KProfile({s});
}

const ProfileSegment& KProfile::segment_at(double t) const {
    auto it = std::lower_bound(segments_.begin(), segments_.end(), t,
                               [](const ProfileSegment& s, double v) { return s.t1 < v; });
    if (it == segments_.end()) --it;
    return *it;
}

double KProfile::operator()(double t) const {
    if (!(t > 0.0)) throw std::domain_error("profile evaluated at t <= 0");
    if (zero_) return 0.0;
    return segment_at(t).value(t);
}

double KProfile::log_at(double x) const { return log_at(x, 0.0); }

double KProfile::log_at(double x, double a) const {
    if (zero_) return -kInf;
    double t = std::exp(x);
    const auto& s = t > 0.0 ? segment_at(t) : segments_.front();
    if (s.a == 0.0 && s.b == 0.0 && !s.log_term && s.c > 0.0) return std::log(s.c) + (s.g + a) * x;
    // near the ends the plain value is accurate only while it is representable
    if (std::fabs(x) < 600.0) {
        double v = s.value(t);
        return v > 0.0 ? std::log(v) + a * x : -kInf;
    }
    return s.log_value(x, a);
}

double KProfile::derivative(double t) const {
    if (zero_) return 0.0;
    return segment_at(t).derivative(t);
}

LogFn KProfile::as_log_fn(double shift) const {
    if (zero_) return LogFn();
    KProfile copy = *this;
    std::vector<double> br;
    for (double k : knots()) br.push_back(std::log(k));
    return LogFn([copy, shift](double x) { return copy.log_at(x, shift); }, br);
}

std::vector<double> KProfile::knots() const {
    std::vector<double> out;
    for (std::size_t i = 0; i + 1 < segments_.size(); ++i) out.push_back(segments_[i].t1);
    return out;
}

KProfile KProfile::scaled(double c) const {
    if (!(c >= 0.0)) throw std::invalid_argument("profile scale must be nonnegative");
    if (c == 0.0) return KProfile();
    auto segs = segments_;
    for (auto& s : segs) {
        s.a *= c;
        s.b *= c;
        s.c *= c;
    }
    return KProfile(std::move(segs));
}

KProfile KProfile::dual() const {
    if (zero_) return KProfile();
    // t (a + b/t + c t^{-g}) = b + a t + c t^{1-g} on [1/t1, 1/t0]
    std::vector<ProfileSegment> out;
    for (auto it = segments_.rbegin(); it != segments_.rend(); ++it) {
        if (it->log_term) throw std::invalid_argument("dual profile: log segments are not supported");
        ProfileSegment s;
        s.t0 = std::isinf(it->t1) ? 0.0 : 1.0 / it->t1;
        s.t1 = it->t0 == 0.0 ? kInf : 1.0 / it->t0;
        s.a = it->b;
        s.b = it->a;
        s.c = it->c;
        s.g = 1.0 - it->g;
        out.push_back(s);
    }
    return KProfile(std::move(out));
}

QuasiConcavity check_quasiconcave(const KProfile& k) {
    QuasiConcavity r;
    if (k.is_zero()) return r;
    const auto& segs = k.segments();
    auto fail = [&](std::size_t i, double t, const char* why) {
        r.ok = false;
        r.segment = i;
        r.t = t;
        r.reason = why;
        return r;
    };
    const double tol = 1e-12;
    for (std::size_t i = 0; i < segs.size(); ++i) {
        const auto& s = segs[i];
        // k' and k - t k' are monotone on a segment, so the endpoints decide.
        for (double t : {s.t0, s.t1}) {
            double d = s.derivative(t);
            double scale = std::max(1.0, std::fabs(s.b));
            if (d < -tol * scale) return fail(i, t, "profile decreases");
            double rest = s.log_term ? s.a + logterm(s.c, t) - s.c : s.a + term(s.c * (1.0 - s.g), t, s.g);
            double ref = std::max({std::fabs(s.a), std::fabs(s.c), 1e-300});
            if (t > 0.0 && std::isfinite(t) && std::isfinite(rest)) ref = std::max(ref, std::fabs(s.value(t)));
            if (rest < -tol * ref) return fail(i, t, "profile divided by t increases");
        }
        double v0 = s.value(s.t0);
        if (v0 < 0.0 && !(std::fabs(v0) <= tol * std::max(std::fabs(s.a), 1.0)))
            return fail(i, s.t0, "profile is negative");
        if (i > 0) {
            double left = segs[i - 1].value(s.t0);
            if (!close(left, v0, 1e-10)) return fail(i, s.t0, "profile is discontinuous");
        }
    }
    return r;
}

double RearrangementPiece::value(double u) const { return d + term(e, u, -beta); }

Rearrangement::Rearrangement() = default;

Rearrangement::Rearrangement(std::vector<RearrangementPiece> pieces) : pieces_(std::move(pieces)) {
    double prev = 0.0;
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
        const auto& p = pieces_[i];
        check_tiling(p.t0, p.t1, prev, i, pieces_.size(), "Rearrangement");
        prev = p.t1;
        if (!std::isfinite(p.d) || !std::isfinite(p.e) || !std::isfinite(p.beta))
            throw std::invalid_argument("Rearrangement: non-finite coefficient");
        if (p.beta * p.e < 0.0) throw std::invalid_argument("Rearrangement: piece is increasing");
    }
}

Rearrangement Rearrangement::indicator(double a, double height) {
    if (!(a > 0.0) || !std::isfinite(a) || !(height >= 0.0))
        throw std::invalid_argument("indicator rearrangement: a must be positive, height nonnegative");
    return Rearrangement({{0.0, a, height, 0.0, 0.0}, {a, kInf, 0.0, 0.0, 0.0}});
}

Rearrangement Rearrangement::power(double beta, double scale) {
    if (!(beta >= 0.0) || !(scale > 0.0)) throw std::invalid_argument("power rearrangement: beta >= 0, scale > 0");
    return Rearrangement({{0.0, kInf, 0.0, scale, beta}});
}

Rearrangement Rearrangement::step(const std::vector<double>& knots, const std::vector<double>& values) {
    if (values.size() != knots.size() + 1) throw std::invalid_argument("step rearrangement: values must exceed knots by one");
    std::vector<RearrangementPiece> p;
    double t0 = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        double t1 = i < knots.size() ? knots[i] : kInf;
        if (!(values[i] >= 0.0)) throw std::invalid_argument("step rearrangement: negative value");
        if (i > 0 && values[i] > values[i - 1]) throw std::invalid_argument("step rearrangement: values must not increase");
        p.push_back({t0, t1, values[i], 0.0, 0.0});
        t0 = t1;
    }
    return Rearrangement(std::move(p));
}

double Rearrangement::operator()(double u) const {
    if (pieces_.empty()) return 0.0;
    auto it = std::lower_bound(pieces_.begin(), pieces_.end(), u,
                               [](const RearrangementPiece& p, double v) { return p.t1 < v; });
    if (it == pieces_.end()) --it;
    return it->value(u);
}

double Rearrangement::log_at(double x) const {
    if (pieces_.empty()) return -kInf;
    double u = std::exp(x);
    if (u == 0.0) {
        const auto& p = pieces_.front();
        if (p.d == 0.0 && p.e > 0.0) return std::log(p.e) - p.beta * x;
        u = std::numeric_limits<double>::min();
    }
    double v = (*this)(u);
    return v > 0.0 ? std::log(v) : -kInf;
}

LogFn Rearrangement::as_log_fn() const {
    if (is_zero()) return LogFn();
    Rearrangement copy = *this;
    std::vector<double> br;
    for (std::size_t i = 0; i + 1 < pieces_.size(); ++i) br.push_back(std::log(pieces_[i].t1));
    return LogFn([copy](double x) { return copy.log_at(x); }, br);
}

bool Rearrangement::is_zero() const {
    return std::all_of(pieces_.begin(), pieces_.end(), [](const auto& p) { return p.d == 0.0 && p.e == 0.0; });
}

Rearrangement Rearrangement::scaled(double c) const {
    if (!(c >= 0.0)) throw std::invalid_argument("rearrangement scale must be nonnegative");
    auto p = pieces_;
    for (auto& q : p) {
        q.d *= c;
        q.e *= c;
    }
    return Rearrangement(std::move(p));
}

std::vector<double> Rearrangement::level_values() const {
    std::vector<double> out;
    for (const auto& p : pieces_) {
        for (double u : {p.t0, p.t1}) {
            double v = p.value(u);
            if (std::isfinite(v) && v > 0.0) out.push_back(v);
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

KProfile K_from_rearrangement(const Rearrangement& f) {
    if (f.is_zero()) return KProfile();
    std::vector<ProfileSegment> segs;
    double acc = 0.0;
    for (const auto& p : f.pieces()) {
        ProfileSegment s;
        s.t0 = p.t0;
        s.t1 = p.t1;
        if (p.e == 0.0 || p.beta == 0.0) {
            s.b = p.d + p.e;
            s.a = acc - lin(s.b, p.t0);
            s.c = 0.0;
        } else if (p.beta == 1.0) {
            if (p.t0 == 0.0) throw PreconditionError("rearrangement is not integrable at 0");
            s.b = p.d;
            s.c = p.e;
            s.log_term = true;
            s.a = acc - lin(p.d, p.t0) - logterm(p.e, p.t0);
        } else {
            if (p.t0 == 0.0 && p.beta > 1.0) throw PreconditionError("rearrangement is not integrable at 0");
            s.g = 1.0 - p.beta;
            s.c = p.e / s.g;
            s.b = p.d;
            s.a = acc - lin(p.d, p.t0) - term(s.c, p.t0, s.g);
        }
        if (std::isfinite(p.t1)) acc = s.value(p.t1);
        segs.push_back(s);
    }
    return KProfile(std::move(segs));
}

namespace {

RearrangementPiece derivative_piece(const ProfileSegment& s, double t0, double t1) {
    RearrangementPiece p;
    p.t0 = t0;
    p.t1 = t1;
    p.d = s.b;
    if (s.log_term) {
        p.e = s.c;
        p.beta = 1.0;
    } else if (s.g == 1.0) {
        p.d += s.c;
    } else if (s.g != 0.0) {
        p.e = s.c * s.g;
        p.beta = 1.0 - s.g;
    }
    return p;
}

bool segment_concave(const ProfileSegment& s) {
    if (s.log_term) return s.c >= 0.0;
    return s.c * s.g * (s.g - 1.0) <= 0.0;
}

}  // namespace

Rearrangement realize_rearrangement(const KProfile& phi) {
    if (phi.is_zero()) return Rearrangement();
    auto qc = check_quasiconcave(phi);
    if (!qc.ok) throw PreconditionError("profile is not quasi-concave: " + qc.reason);
    const auto& segs = phi.segments();
    const auto& first = segs.front();
    bool vanishes = first.a == 0.0 && !first.log_term && (first.c == 0.0 || first.g > 0.0);
    if (!vanishes) throw PreconditionError("profile must vanish at 0 to be a K-functional on (L1, L-inf)");

    bool concave = std::all_of(segs.begin(), segs.end(), segment_concave);
    for (std::size_t i = 1; concave && i < segs.size(); ++i) {
        double t = segs[i].t0;
        double l = segs[i - 1].derivative(t), r = segs[i].derivative(t);
        if (l < r && !close(l, r, 1e-12)) concave = false;
    }
    if (concave) {
        std::vector<RearrangementPiece> p;
        for (const auto& s : segs) p.push_back(derivative_piece(s, s.t0, s.t1));
        return Rearrangement(std::move(p));
    }

    const auto& last = segs.back();
    if (!segment_concave(first) || !segment_concave(last))
        throw PreconditionError("profile tails must be concave");
    auto knots = phi.knots();
    double s0 = knots.front() * 1e-6, sN = knots.back() * 1e6;
    for (int attempt = 0; attempt < 8; ++attempt) {
        s0 = std::min(s0, first.t1);
        sN = std::max(sN, last.t0);
        std::vector<double> ts;
        double l0 = std::log(s0), l1 = std::log(sN);
        int n = std::max(2, static_cast<int>(std::ceil((l1 - l0) / std::log(10.0) * 32.0)));
        for (int i = 0; i <= n; ++i) ts.push_back(std::exp(l0 + (l1 - l0) * i / n));
        ts.front() = s0;
        ts.back() = sN;
        for (double k : knots) ts.push_back(k);
        std::sort(ts.begin(), ts.end());
        ts.erase(std::unique(ts.begin(), ts.end()), ts.end());

        // upper hull, left to right
        std::vector<std::pair<double, double>> hull;
        for (double t : ts) {
            std::pair<double, double> pt{t, phi(t)};
            while (hull.size() >= 2) {
                auto [x1, y1] = hull[hull.size() - 2];
                auto [x2, y2] = hull.back();
                // drop the middle point when it lies on or below the chord
                if ((y2 - y1) * (pt.first - x1) <= (pt.second - y1) * (x2 - x1)) hull.pop_back();
                else break;
            }
            hull.push_back(pt);
        }
        double first_slope = (hull[1].second - hull[0].second) / (hull[1].first - hull[0].first);
        double last_slope = (hull.back().second - hull[hull.size() - 2].second) /
                            (hull.back().first - hull[hull.size() - 2].first);
        bool left_ok = first.derivative(s0) >= first_slope;
        bool right_ok = last.derivative(sN) <= last_slope;
        if (!left_ok) s0 *= 1e-6;
        if (!right_ok) sN *= 1e6;
        if (!left_ok || !right_ok) continue;

        std::vector<RearrangementPiece> p;
        p.push_back(derivative_piece(first, 0.0, s0));
        for (std::size_t i = 0; i + 1 < hull.size(); ++i) {
            double slope = (hull[i + 1].second - hull[i].second) / (hull[i + 1].first - hull[i].first);
            p.push_back({hull[i].first, hull[i + 1].first, slope, 0.0, 0.0});
        }
        p.push_back(derivative_piece(last, sN, kInf));
        return Rearrangement(std::move(p));
    }
    throw PreconditionError("least concave majorant: tails do not join concavely");
}

std::pair<Rearrangement, Rearrangement> truncation_split(const Rearrangement& f, double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("truncation level must be positive");
    if (f.is_zero()) return {Rearrangement(), Rearrangement()};
    std::vector<RearrangementPiece> p0, p1;
    auto push = [&](const RearrangementPiece& p, double t0, double t1, bool above) {
        RearrangementPiece q = p;
        q.t0 = t0;
        q.t1 = t1;
        if (above) {
            p1.push_back({t0, t1, lambda, 0.0, 0.0});
            q.d -= lambda;
            p0.push_back(q);
        } else {
            p1.push_back(q);
            p0.push_back({t0, t1, 0.0, 0.0, 0.0});
        }
    };
    for (const auto& p : f.pieces()) {
        double lo = p.value(p.t1);  // nonincreasing: smallest value at the right end
        double hi = p.value(p.t0);
        if (lo >= lambda) {
            push(p, p.t0, p.t1, true);
        } else if (hi <= lambda) {
            push(p, p.t0, p.t1, false);
        } else {
            double u = std::pow(p.e / (lambda - p.d), 1.0 / p.beta);
            u = std::clamp(u, p.t0, p.t1);
            if (u > p.t0) push(p, p.t0, u, true);
            if (u < p.t1) push(p, u, p.t1, false);
        }
    }
    return {Rearrangement(std::move(p0)), Rearrangement(std::move(p1))};
}

namespace {

class LiteralParser {
public:
    explicit LiteralParser(std::string_view s) : s_(s) {}

    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool peek(char c) {
        skip();
        return pos_ < s_.size() && s_[pos_] == c;
    }
    void expect(char c) {
        if (!peek(c)) throw ParseError(pos_, std::string("expected '") + c + "'");
        ++pos_;
    }
    std::string word() {
        skip();
        std::size_t start = pos_;
        while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])))) ++pos_;
        return std::string(s_.substr(start, pos_ - start));
    }
    double number() {
        skip();
        std::size_t start = pos_;
        if (pos_ < s_.size() && s_[pos_] == '+') ++pos_;
        double v = 0.0;
        auto r = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
        if (r.ec != std::errc() || !std::isfinite(v)) throw ParseError(start, "expected a number");
        pos_ = static_cast<std::size_t>(r.ptr - s_.data());
        return v;
    }
    std::vector<std::pair<double, double>> pairs() {
        std::vector<std::pair<double, double>> out;
        expect('[');
        do {
            expect('(');
            double a = number();
            expect(',');
            double b = number();
            expect(')');
            out.emplace_back(a, b);
        } while (peek(',') && (++pos_, true));
        expect(']');
        return out;
    }
    void finish() {
        skip();
        if (pos_ != s_.size()) throw ParseError(pos_, "unexpected trailing input");
    }
    std::size_t pos() const { return pos_; }

private:
    std::string_view s_;
    std::size_t pos_ = 0;
};

KProfile powerlog_profile(double theta, double a0, double ainf) {
    // sampled at e^{x}, x in [-60, 60], joined by power segments
    std::vector<std::pair<double, double>> nodes;
    for (int i = -240; i <= 240; ++i) {
        double x = i * 0.25;
        double l = x <= 0.0 ? a0 * std::log1p(-x) : ainf * std::log1p(x);
        nodes.emplace_back(std::exp(x), std::exp(theta * x + l));
    }
    return KProfile::piecewise_power(nodes, theta, theta);
}

}  // namespace

KProfile parse_profile(std::string_view text) {
    LiteralParser p(text);
    p.skip();
    std::size_t start = p.pos();
    std::string w = p.word();
    KProfile k;
    if (w == "min1") {
        k = KProfile::min1();
    } else if (w == "power") {
        p.expect('(');
        std::size_t at = p.pos();
        double th = p.number();
        if (!(th > 0.0 && th <= 1.0)) throw ParseError(at, "power profile exponent must lie in (0,1]");
        p.expect(')');
        k = KProfile::power(th);
    } else if (w == "powerlog") {
        p.expect('(');
        std::size_t at = p.pos();
        double th = p.number();
        if (!(th > 0.0 && th < 1.0)) throw ParseError(at, "powerlog exponent must lie in (0,1)");
        p.expect(',');
        double a0 = p.number();
        p.expect(',');
        double ai = p.number();
        p.expect(')');
        k = powerlog_profile(th, a0, ai);
    } else if (w == "piecewise") {
        std::size_t at = p.pos();
        auto nodes = p.pairs();
        try {
            k = KProfile::piecewise_power(nodes);
        } catch (const std::invalid_argument& e) {
            throw ParseError(at, e.what());
        }
    } else {
        throw ParseError(start, "unknown profile '" + w + "'");
    }
    p.finish();
    auto qc = check_quasiconcave(k);
    if (!qc.ok) throw ParseError(start, "profile is not quasi-concave (" + qc.reason + ")");
    return k;
}

Rearrangement parse_rearrangement(std::string_view text) {
    LiteralParser p(text);
    p.skip();
    std::size_t start = p.pos();
    std::string w = p.word();
    Rearrangement r;
    try {
        if (w == "indicator") {
            p.expect('(');
            double a = p.number();
            p.expect(')');
            r = Rearrangement::indicator(a);
        } else if (w == "power") {
            p.expect('(');
            std::size_t at = p.pos();
            double b = p.number();
            if (!(b >= 0.0 && b < 1.0)) throw ParseError(at, "power rearrangement exponent must lie in [0,1)");
            p.expect(')');
            r = Rearrangement::power(b);
        } else if (w == "step") {
            auto pts = p.pairs();
            std::vector<double> knots, vals;
            for (auto [t, v] : pts) {
                knots.push_back(t);
                vals.push_back(v);
            }
            vals.push_back(0.0);
            for (std::size_t i = 1; i < knots.size(); ++i)
                if (!(knots[i] > knots[i - 1])) throw std::invalid_argument("step knots must increase");
            r = Rearrangement::step(knots, vals);
        } else {
            throw ParseError(start, "unknown rearrangement '" + w + "'");
        }
    } catch (const std::invalid_argument& e) {
        throw ParseError(start, e.what());
    }
    p.finish();
    return r;
}

}  // namespace klab
