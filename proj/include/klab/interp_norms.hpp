#pragma once

// Interpolation quasi-norms over a K-profile and the indices rho / eta.

#include "klab/profile.hpp"
#include "klab/quadrature.hpp"
#include "klab/weight.hpp"

#include <vector>

namespace klab {

/// Space (A0, A1)_{theta,q;b}.
struct SpaceSpec {
    double theta = 0.0;
    double q = 1.0;
    WeightExpr b;

    /// Validates 0 <= theta <= 1, q > 0 and, for theta = 0 or 1, the SV class of b.
    static SpaceSpec make(double theta, double q, const WeightExpr& b);
};

/// || t^{-theta-1/q} b(t) K(t) ||_{q,(0,inf)}.
double space_norm(const KProfile& f, const SpaceSpec& s);
double log_space_norm(const KProfile& f, const SpaceSpec& s);

/// The two weight/exponent pairs of a limiting Holmstedt problem.
struct WeightPair {
    double q0 = 1.0;
    WeightExpr b0;
    double q1 = 1.0;
    WeightExpr b1;
};

enum class LimitingSide { zero, one };

struct PartialNorms {
    double I = 0.0;
    double J = 0.0;
};

/// side zero: I = ||u^{-1/q0} b0 K||_{q0,(0,t)}, J = ||u^{-1/q1} b1 K||_{q1,(t,inf)};
/// side one: the same with an extra factor u^{-1}.
PartialNorms partial_norms(const KProfile& f, double t, LimitingSide side, const WeightPair& w);

enum class IndexKind { rho, rho_eps, eta, eta_eps };

struct IndexPair {
    double value = 0.0;
    double numerator = 0.0;
    double denominator = 0.0;
    bool defined = true;  // false for 0/0 and inf/inf
};

IndexPair index(double t, IndexKind kind, const WeightPair& w, double eps = 0.0);

/// ln of the index as a function of ln t (-inf / +inf where undefined).
LogFn index_log_fn(IndexKind kind, const WeightPair& w, double eps = 0.0);

struct ConditionReport {
    bool pass = false;
    double best_eps = 0.0;
    double best_constant = kInf;
    std::vector<std::pair<double, double>> tried;  // (eps, constant)
};

std::vector<double> default_eps_grid();

/// Whether rho_eps (or eta_eps) is equivalent to a nondecreasing function for
/// some eps in the grid, judged by the quasi-monotonicity constant <= threshold.
ConditionReport check_condition_monotone_index(IndexKind kind, const WeightPair& w,
                                               const std::vector<double>& eps_grid = default_eps_grid(),
                                               double threshold = 4.0, const GridSpec& grid = {});

/// Quasi-monotonicity constant of rho (or eta) itself, toward nondecreasing.
double index_monotone_constant(IndexKind kind, const WeightPair& w, const GridSpec& grid = {});

}  // namespace klab
