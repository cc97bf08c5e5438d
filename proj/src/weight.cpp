#include "klab/weight.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>

namespace klab {

struct WeightExpr::Node {
    Kind kind = Kind::One;
    double a = 0.0;  // c, alpha0, alpha, r
    double b = 0.0;  // alphaInf
    std::shared_ptr<const Node> left;
    std::shared_ptr<const Node> right;
};

namespace {

using NodePtr = std::shared_ptr<const WeightExpr::Node>;

double eval(const WeightExpr::Node& n, double x) {
    using K = WeightExpr::Kind;
    switch (n.kind) {
    case K::One: return 0.0;
    case K::Const: return std::log(n.a);
    case K::PowerLog: {
        double e = x <= 0.0 ? n.a : n.b;
        if (e == 0.0) return 0.0;
        return e * std::log1p(std::fabs(x));
    }
    case K::ExpLog: return std::pow(std::fabs(x), n.a);
    case K::Product: {
        double l = eval(*n.left, x);
        double r = eval(*n.right, x);
        // +inf * 0 style clashes do not arise: factors are finite for finite x
        return l + r;
    }
    case K::Power: {
        double v = eval(*n.left, x);
        return n.a == 0.0 ? 0.0 : n.a * v;
    }
    case K::Flip: return eval(*n.left, -x);
    }
    return 0.0;
}

bool has_kink(const WeightExpr::Node& n) {
    using K = WeightExpr::Kind;
    switch (n.kind) {
    case K::PowerLog: return n.a != n.b;
    case K::ExpLog: return true;
    case K::Product: return has_kink(*n.left) || has_kink(*n.right);
    case K::Power:
    case K::Flip: return has_kink(*n.left);
    default: return false;
    }
}

EndAsymptotics asym(const WeightExpr::Node& n, DivergentEnd end) {
    using K = WeightExpr::Kind;
    EndAsymptotics out;
    switch (n.kind) {
    case K::One:
    case K::Const: break;
    case K::PowerLog: out.log_power = end == DivergentEnd::at_zero ? n.a : n.b; break;
    case K::ExpLog: out.stretched.emplace_back(n.a, 1.0); break;
    case K::Product: {
        auto l = asym(*n.left, end);
        auto r = asym(*n.right, end);
        out.log_power = l.log_power + r.log_power;
        std::map<double, double> merged;
        for (auto [d, g] : l.stretched) merged[d] += g;
        for (auto [d, g] : r.stretched) merged[d] += g;
        for (auto [d, g] : merged)
            if (g != 0.0) out.stretched.emplace_back(d, g);
        break;
    }
    case K::Power: {
        out = asym(*n.left, end);
        out.log_power *= n.a;
        std::vector<std::pair<double, double>> s;
        for (auto [d, g] : out.stretched)
            if (g * n.a != 0.0) s.emplace_back(d, g * n.a);
        out.stretched = std::move(s);
        break;
    }
    case K::Flip:
        out = asym(*n.left, end == DivergentEnd::at_zero ? DivergentEnd::at_infinity : DivergentEnd::at_zero);
        break;
    }
    return out;
}

std::string num(double v) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

std::string show(const WeightExpr::Node& n) {
    using K = WeightExpr::Kind;
    switch (n.kind) {
    case K::One: return "one";
    case K::Const: return "const(" + num(n.a) + ")";
    case K::PowerLog: return "log(" + num(n.a) + "," + num(n.b) + ")";
    case K::ExpLog: return "explog(" + num(n.a) + ")";
    case K::Product: return "mul(" + show(*n.left) + "," + show(*n.right) + ")";
    case K::Power: return "pow(" + show(*n.left) + "," + num(n.a) + ")";
    case K::Flip: return "flip(" + show(*n.left) + ")";
    }
    return "?";
}

// Largest stretched exponent with a nonzero coefficient decides.
const std::pair<double, double>* leading(const EndAsymptotics& a) {
    const std::pair<double, double>* best = nullptr;
    for (const auto& s : a.stretched)
        if (s.second != 0.0 && (!best || s.first > best->first)) best = &s;
    return best;
}

class Parser {
public:
    explicit Parser(std::string_view text) : s_(text) {}

    WeightExpr parse() {
        WeightExpr w = expr();
        skip();
        if (pos_ != s_.size()) throw ParseError(pos_, "unexpected trailing input");
        return w;
    }

private:
    std::string_view s_;
    std::size_t pos_ = 0;

    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    void expect(char c) {
        skip();
        if (pos_ >= s_.size() || s_[pos_] != c)
            throw ParseError(pos_, std::string("expected '") + c + "'");
        ++pos_;
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

    WeightExpr expr() {
        skip();
        std::size_t start = pos_;
        while (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        std::string name(s_.substr(start, pos_ - start));
        if (name.empty()) throw ParseError(start, "expected a weight");
        if (name == "one") return WeightExpr::one();
        if (name == "const") {
            expect('(');
            skip();
            std::size_t at = pos_;
            double c = number();
            if (!(c > 0.0)) throw ParseError(at, "const requires a positive value");
            expect(')');
            return WeightExpr::constant(c);
        }
        if (name == "log") {
            expect('(');
            double a0 = number();
            expect(',');
            double ai = number();
            expect(')');
            return WeightExpr::power_log(a0, ai);
        }
        if (name == "explog") {
            expect('(');
            skip();
            std::size_t at = pos_;
            double a = number();
            if (!(a > 0.0 && a < 1.0)) throw ParseError(at, "explog exponent must lie in (0,1)");
            expect(')');
            return WeightExpr::exp_log(a);
        }
        if (name == "mul") {
            expect('(');
            WeightExpr l = expr();
            expect(',');
            WeightExpr r = expr();
            expect(')');
            return WeightExpr::product(l, r);
        }
        if (name == "pow") {
            expect('(');
            WeightExpr b = expr();
            expect(',');
            double r = number();
            expect(')');
            return WeightExpr::power(b, r);
        }
        if (name == "flip") {
            expect('(');
            WeightExpr w = expr();
            expect(')');
            return WeightExpr::flip(w);
        }
        throw ParseError(start, "unknown weight '" + name + "'");
    }
};

IntegrationOptions options_for(const WeightExpr& b, double q) {
    IntegrationOptions opt;
    opt.at_zero = b.asymptotics(DivergentEnd::at_zero).integrable(q) ? Convergence::converges
                                                                     : Convergence::diverges;
    opt.at_infinity = b.asymptotics(DivergentEnd::at_infinity).integrable(q) ? Convergence::converges
                                                                             : Convergence::diverges;
    return opt;
}

void check_args(double q, double t, const char* who) {
    if (!(q > 0.0)) throw std::invalid_argument(std::string(who) + ": q must be positive");
    if (!(t > 0.0) || !std::isfinite(t)) throw std::invalid_argument(std::string(who) + ": t must be positive and finite");
}

double log_tail_x(const WeightExpr& b, double q, double x) {
    auto at_inf = b.asymptotics(DivergentEnd::at_infinity);
    if (std::isinf(q)) {
        if (at_inf.trend() > 0) return kInf;
        return log_sup_x(b.as_log_fn(), x, kInf);
    }
    if (!at_inf.integrable(q)) return kInf;
    return log_qnorm_x(b.as_log_fn(), q, x, kInf, options_for(b, q));
}

}  // namespace

bool EndAsymptotics::integrable(double q) const {
    if (std::isinf(q)) return trend() <= 0;
    if (auto* l = leading(*this)) return l->second < 0.0;
    return q * log_power < -1.0;
}

int EndAsymptotics::trend() const {
    if (auto* l = leading(*this)) return l->second > 0.0 ? 1 : -1;
    if (log_power > 0.0) return 1;
    if (log_power < 0.0) return -1;
    return 0;
}

WeightExpr::WeightExpr() : node_(std::make_shared<Node>()) {}
WeightExpr::WeightExpr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

WeightExpr WeightExpr::one() { return WeightExpr(); }

WeightExpr WeightExpr::constant(double c) {
    if (!(c > 0.0) || !std::isfinite(c)) throw std::invalid_argument("const weight requires c > 0");
    auto n = std::make_shared<Node>();
    n->kind = Kind::Const;
    n->a = c;
    return WeightExpr(n);
}

WeightExpr WeightExpr::power_log(double alpha0, double alpha_inf) {
    if (!std::isfinite(alpha0) || !std::isfinite(alpha_inf))
        throw std::invalid_argument("log weight exponents must be finite");
    auto n = std::make_shared<Node>();
    n->kind = Kind::PowerLog;
    n->a = alpha0;
    n->b = alpha_inf;
    return WeightExpr(n);
}

WeightExpr WeightExpr::exp_log(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("explog exponent must lie in (0,1)");
    auto n = std::make_shared<Node>();
    n->kind = Kind::ExpLog;
    n->a = alpha;
    return WeightExpr(n);
}

WeightExpr WeightExpr::product(const WeightExpr& left, const WeightExpr& right) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Product;
    n->left = left.node_;
    n->right = right.node_;
    return WeightExpr(n);
}

WeightExpr WeightExpr::power(const WeightExpr& base, double r) {
    if (!std::isfinite(r)) throw std::invalid_argument("pow exponent must be finite");
    auto n = std::make_shared<Node>();
    n->kind = Kind::Power;
    n->a = r;
    n->left = base.node_;
    return WeightExpr(n);
}

WeightExpr WeightExpr::flip(const WeightExpr& inner) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Flip;
    n->left = inner.node_;
    return WeightExpr(n);
}

WeightExpr::Kind WeightExpr::kind() const { return node_->kind; }

double WeightExpr::log_at(double x) const { return eval(*node_, x); }

double WeightExpr::operator()(double t) const {
    if (!(t > 0.0)) throw std::domain_error("weight evaluated at t <= 0");
    return std::exp(log_at(std::log(t)));
}

LogFn WeightExpr::as_log_fn() const {
    auto node = node_;
    return LogFn([node](double x) { return eval(*node, x); }, breaks());
}

std::vector<double> WeightExpr::breaks() const {
    if (has_kink(*node_)) return {0.0};
    return {};
}

EndAsymptotics WeightExpr::asymptotics(DivergentEnd end) const { return asym(*node_, end); }

std::string WeightExpr::to_string() const { return show(*node_); }

WeightExpr parse_weight(std::string_view text) { return Parser(text).parse(); }

double log_tail_qnorm(const WeightExpr& b, double q, double t) {
    check_args(q, t, "tail_qnorm");
    return log_tail_x(b, q, std::log(t));
}

double log_head_qnorm(const WeightExpr& b, double q, double t) {
    check_args(q, t, "head_qnorm");
    return log_tail_x(b.flipped(), q, -std::log(t));
}

double log_tail_qnorm_x(const WeightExpr& b, double q, double x) {
    if (!(q > 0.0)) throw std::invalid_argument("tail_qnorm: q must be positive");
    return log_tail_x(b, q, x);
}

double log_head_qnorm_x(const WeightExpr& b, double q, double x) {
    if (!(q > 0.0)) throw std::invalid_argument("head_qnorm: q must be positive");
    return log_tail_x(b.flipped(), q, -x);
}

double tail_qnorm(const WeightExpr& b, double q, double t) { return std::exp(log_tail_qnorm(b, q, t)); }
double head_qnorm(const WeightExpr& b, double q, double t) { return std::exp(log_head_qnorm(b, q, t)); }

SVClassReport classify(const WeightExpr& b, double q) {
    SVClassReport r;
    r.q = q;
    r.tail_value_at_1 = tail_qnorm(b, q, 1.0);
    r.head_value_at_1 = tail_qnorm(b.flipped(), q, 1.0);
    r.in_SV0q = std::isfinite(r.tail_value_at_1);
    r.in_SV1q = std::isfinite(r.head_value_at_1);
    return r;
}

LogFn tilde_construction(const WeightExpr& b) {
    if (!b.asymptotics(DivergentEnd::at_infinity).integrable(1.0))
        throw PreconditionError("tilde construction: integral of b(u)/u over (1,inf) diverges");
    WeightExpr copy = b;
    std::vector<double> br = b.breaks();
    return LogFn([copy](double x) { return log_tail_x(copy, 1.0, x); }, br);
}

SVCheck sv_check(const WeightExpr& b, double eps, const GridSpec& grid) {
    if (!(eps > 0.0)) throw std::invalid_argument("sv_check: eps must be positive");
    grid.validate();
    auto xs = grid.log_points();
    std::vector<double> up(xs.size()), down(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double l = b.log_at(xs[i]);
        up[i] = l + eps * xs[i];
        down[i] = l - eps * xs[i];
    }
    SVCheck c;
    c.eps = eps;
    c.up_constant = quasi_monotone_constant(up, Direction::nondecreasing);
    c.down_constant = quasi_monotone_constant(down, Direction::nonincreasing);
    return c;
}

}  // namespace klab
