#pragma once

// Slowly varying weights as combinator expressions.
//
// Grammar (whitespace insignificant, decimal literals):
//   w := one | const(c) | log(a0,aInf) | explog(a) | mul(w,w) | pow(w,r) | flip(w)
//
// log(a0,aInf) is the broken logarithm
//   (1 - ln t)^a0 on (0,1],  (1 + ln t)^aInf on (1,inf),
// explog(a) is exp(|ln t|^a) with 0 < a < 1 and flip(w)(t) = w(1/t).

#include "klab/quadrature.hpp"

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace klab {

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t position, const std::string& what)
        : std::runtime_error(what + " at column " + std::to_string(position + 1)), position_(position) {}
    /// Zero-based offset into the parsed text.
    std::size_t position() const { return position_; }

private:
    std::size_t position_;
};

/// A precondition of an operation does not hold (divergent defining
/// integral, wrong SV class, ...).
class PreconditionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Leading behaviour of ln b along |ln t| -> inf at one end:
///   ln b ~ log_power * ln|ln t| + sum gamma_k |ln t|^delta_k.
struct EndAsymptotics {
    double log_power = 0.0;
    std::vector<std::pair<double, double>> stretched;  // (delta, gamma), delta in (0,1)

    /// Whether int b(u)^q du/u converges toward this end.
    bool integrable(double q) const;
    /// -1: b -> 0, 0: b tends to a positive constant, +1: b -> inf.
    int trend() const;
};

class WeightExpr {
public:
    enum class Kind { One, Const, PowerLog, ExpLog, Product, Power, Flip };

    WeightExpr();  // One

    static WeightExpr one();
    static WeightExpr constant(double c);
    static WeightExpr power_log(double alpha0, double alpha_inf);
    static WeightExpr exp_log(double alpha);
    static WeightExpr product(const WeightExpr& left, const WeightExpr& right);
    static WeightExpr power(const WeightExpr& base, double r);
    static WeightExpr flip(const WeightExpr& inner);

    Kind kind() const;
    /// ln b(e^x).
    double log_at(double x) const;
    double operator()(double t) const;
    LogFn as_log_fn() const;
    std::vector<double> breaks() const;

    EndAsymptotics asymptotics(DivergentEnd end) const;
    std::string to_string() const;

    WeightExpr flipped() const { return flip(*this); }

    struct Node;  // opaque

private:
    explicit WeightExpr(std::shared_ptr<const Node> node);
    std::shared_ptr<const Node> node_;
};

/// Parses the grammar above; throws ParseError with the offending column.
WeightExpr parse_weight(std::string_view text);

/// || u^{-1/q} b(u) ||_{q,(t,inf)}; +inf when divergent.
double tail_qnorm(const WeightExpr& b, double q, double t);
/// || u^{-1/q} b(u) ||_{q,(0,t)}; +inf when divergent.
double head_qnorm(const WeightExpr& b, double q, double t);
/// Logarithmic versions, usable where the values leave the double range.
double log_tail_qnorm(const WeightExpr& b, double q, double t);
double log_head_qnorm(const WeightExpr& b, double q, double t);
/// Same with x = ln t, for arguments beyond the double range of t.
double log_tail_qnorm_x(const WeightExpr& b, double q, double x);
double log_head_qnorm_x(const WeightExpr& b, double q, double x);

struct SVClassReport {
    double q = 1.0;
    bool in_SV0q = false;
    bool in_SV1q = false;
    double tail_value_at_1 = kInf;
    double head_value_at_1 = kInf;
};

SVClassReport classify(const WeightExpr& b, double q);

/// b~(t) = || u^{-1} b(u) ||_{1,(t,inf)}; throws PreconditionError when the
/// defining integral diverges.
LogFn tilde_construction(const WeightExpr& b);

/// Quasi-monotonicity constants of t^eps b(t) (toward nondecreasing) and
/// t^{-eps} b(t) (toward nonincreasing) on a grid.
struct SVCheck {
    double eps = 0.0;
    double up_constant = 1.0;
    double down_constant = 1.0;
    bool passes(double threshold) const { return up_constant <= threshold && down_constant <= threshold; }
};

SVCheck sv_check(const WeightExpr& b, double eps, const GridSpec& grid = {1e-8, 1e8, 64});

}  // namespace klab
