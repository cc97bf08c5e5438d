#pragma once

// K-profiles on the couple (L1, L-inf) and their rearrangements.
//
// A profile is stored segment-wise as
//   k(t) = a + b t + c t^g        (power segment)
//   k(t) = a + b t + c ln t       (log segment)
// and a rearrangement piece-wise as f*(u) = d + e u^{-beta}. The two forms are
// mapped onto each other by d/dt, so truncations of f* and their K-profiles
// stay exact.

#include "klab/quadrature.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace klab {

struct ProfileSegment {
    double t0 = 0.0;
    double t1 = kInf;
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    double g = 1.0;
    bool log_term = false;

    double value(double t) const;
    double derivative(double t) const;
    /// ln(t^shift value(t)) at t = e^x, summing the terms in log space.
    double log_value(double x, double shift) const;
};

class KProfile {
public:
    KProfile();  // k = 0

    /// Segments must tile (0, inf) in order.
    explicit KProfile(std::vector<ProfileSegment> segments);

    /// Nodes (t_i, k_i) joined by power segments; tails k_0 (t/t_0)^left and
    /// k_n (t/t_n)^right.
    static KProfile piecewise_power(const std::vector<std::pair<double, double>>& nodes,
                                    double left_exponent = 1.0, double right_exponent = 0.0);
    /// Same, with explicit segment exponents: k = k_i (t/t_i)^{theta_i} on [t_i, t_{i+1}].
    static KProfile from_exponents(const std::vector<std::pair<double, double>>& nodes,
                                   const std::vector<double>& exponents, double left_exponent,
                                   double right_exponent);
    static KProfile min1();
    /// scale * t^theta.
    static KProfile power(double theta, double scale = 1.0);

    double operator()(double t) const;
    double log_at(double x) const;
    /// ln(t^a k(t)) at t = e^x without cancellation for large |x|.
    double log_at(double x, double a) const;
    double derivative(double t) const;
    /// t^shift k(t) as a LogFn.
    LogFn as_log_fn(double shift = 0.0) const;
    /// Interior knots (t values).
    std::vector<double> knots() const;
    const std::vector<ProfileSegment>& segments() const { return segments_; }
    bool is_zero() const { return zero_; }
    KProfile scaled(double c) const;
    /// t k(1/t); defined for power segments (throws on log segments).
    KProfile dual() const;

private:
    std::vector<ProfileSegment> segments_;
    bool zero_ = true;
    const ProfileSegment& segment_at(double t) const;
};

struct QuasiConcavity {
    bool ok = true;
    std::optional<std::size_t> segment;  // first offending segment
    double t = 0.0;                      // where it was detected
    std::string reason;
};

QuasiConcavity check_quasiconcave(const KProfile& k);

struct RearrangementPiece {
    double t0 = 0.0;
    double t1 = kInf;
    double d = 0.0;
    double e = 0.0;
    double beta = 0.0;

    double value(double u) const;
};

class Rearrangement {
public:
    Rearrangement();  // f* = 0
    /// Pieces must tile (0, inf) in order.
    explicit Rearrangement(std::vector<RearrangementPiece> pieces);

    /// height on (0, a), zero afterwards.
    static Rearrangement indicator(double a, double height = 1.0);
    /// scale * u^{-beta}.
    static Rearrangement power(double beta, double scale = 1.0);
    /// Piecewise constant: values[i] on (knots[i-1], knots[i]); values.size() == knots.size() + 1.
    static Rearrangement step(const std::vector<double>& knots, const std::vector<double>& values);

    double operator()(double u) const;
    double log_at(double x) const;
    LogFn as_log_fn() const;
    const std::vector<RearrangementPiece>& pieces() const { return pieces_; }
    bool is_zero() const;
    Rearrangement scaled(double c) const;
    /// Values at piece boundaries and limits, used as candidate truncation levels.
    std::vector<double> level_values() const;

private:
    std::vector<RearrangementPiece> pieces_;
};

/// K(t) = int_0^t f*(u) du as an exact piecewise antiderivative.
KProfile K_from_rearrangement(const Rearrangement& f);

/// Derivative of the least concave majorant of phi; exact when phi is concave.
Rearrangement realize_rearrangement(const KProfile& phi);

/// (f0, f1) = ((f - lambda)_+, min(f, lambda)).
std::pair<Rearrangement, Rearrangement> truncation_split(const Rearrangement& f, double lambda);

/// Profile literals: min1 | power(theta) | powerlog(theta,a0,aInf) | piecewise[(t,k),...]
KProfile parse_profile(std::string_view text);

/// Rearrangement literals: indicator(a) | power(beta) | step[(t,v),...] (value v up to t, 0 after the last).
Rearrangement parse_rearrangement(std::string_view text);

}  // namespace klab
