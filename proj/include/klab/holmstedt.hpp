#pragma once

// Holmstedt-type formulas for the K-functional between two interpolation
// spaces of the couple (L1, L-inf).
//
// For X0 = (.,.)_{theta0,q0;b0}, X1 = (.,.)_{theta1,q1;b1} and a given f the
// right-hand side is
//   ||u^{-theta0-1/q0} b0 K||_{q0,(0,t)} + s(t) ||u^{-theta1-1/q1} b1 K||_{q1,(t,inf)}
// with s(t) the case-specific index, and the left-hand side
//   K(s(t), f; X0, X1)
// is estimated from above by the truncation family f = (f - lambda)_+ + min(f, lambda).

#include "klab/interp_norms.hpp"
#include "klab/profile.hpp"
#include "klab/weight.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

namespace klab {

enum class HolmstedtKind { limiting00, limiting11, interior_equal_q, nonlimiting };

const char* to_string(HolmstedtKind k);
HolmstedtKind parse_holmstedt_kind(const std::string& name);

/// A hypothesis of a formula is not met for the given weights.
class HypothesisError : public PreconditionError {
public:
    using PreconditionError::PreconditionError;
};

struct HolmstedtCase {
    HolmstedtKind kind = HolmstedtKind::limiting00;
    double theta0 = 0.0;
    double theta1 = 0.0;
    WeightPair w;

    /// limiting00 / limiting11: theta fixed at 0 / 1; interior_equal_q: theta0 = theta1 = theta, q0 = q1;
    /// nonlimiting: 0 < theta0 < theta1 < 1.
    static HolmstedtCase limiting00(const WeightPair& w);
    static HolmstedtCase limiting11(const WeightPair& w);
    static HolmstedtCase interior_equal_q(double theta, double q, const WeightExpr& b0, const WeightExpr& b1);
    static HolmstedtCase nonlimiting(double theta0, double theta1, const WeightPair& w);

    SpaceSpec X0() const;
    SpaceSpec X1() const;

    /// s(t); NaN where the index is 0/0 or inf/inf.
    double s(double t) const;
    /// ln s(e^x).
    double log_s_x(double x) const;

    /// Throws HypothesisError naming the failed condition.
    void check_hypotheses(const GridSpec& grid = {}) const;
};

double rhs_formula(const HolmstedtCase& c, const KProfile& f, double t);
/// ln of the right-hand side at t = e^x.
double log_rhs_formula_x(const HolmstedtCase& c, const KProfile& f, double x);

/// Upper estimate of K(s, f; X0, X1) for a fixed f over the truncation family.
/// Norms per truncation level are cached, so repeated calls with different s
/// are cheap. Thread-safe.
class TruncationFamily {
public:
    TruncationFamily(const HolmstedtCase& c, const KProfile& f);

    double lhs(double s) const;
    /// Level at which the minimum was attained by the last lhs() call's logic (0 and inf allowed).
    double argmin(double s) const;
    const Rearrangement& rearrangement() const { return fstar_; }

private:
    struct Norms {
        double n0 = 0.0;
        double n1 = 0.0;
    };
    Norms norms(double lambda) const;
    std::pair<double, double> minimize(double s) const;

    HolmstedtCase case_;
    SpaceSpec x0_, x1_;
    Rearrangement fstar_;
    std::vector<double> candidates_;
    double full0_ = 0.0;  // ||f||_{X0}
    double full1_ = 0.0;  // ||f||_{X1}
    mutable std::mutex mutex_;
    mutable std::map<double, Norms> cache_;
};

double lhs_decomposition(const HolmstedtCase& c, const KProfile& f, double t);

struct ScanRow {
    double t = 0.0;
    double s = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;  // lhs / rhs
};

struct ScanReport {
    std::vector<ScanRow> rows;
    std::size_t skipped = 0;  // t where s(t) is undefined or either side is 0/inf
    double ratio_min = kInf;
    double ratio_max = 0.0;
};

/// Checks hypotheses, then evaluates both sides on the grid (parallel, rows in grid order).
ScanReport equivalence_scan(const HolmstedtCase& c, const KProfile& f, const GridSpec& grid = {1e-6, 1e6, 13},
                            unsigned threads = 0);

// ---------------------------------------------------------------- negative demo

struct NegativeRow {
    double t = 0.0;
    double head_bound = 0.0;   // ( int_0^t (b0/b1)^r du/u )^{1/r}
    double upper_bound = 0.0;  // b0(t)/b1(t)
    double M = 0.0;            // head_bound / upper_bound
};

struct NegativeReport {
    bool swapped = false;  // q1 < q0: (b0, q0) and (b1, q1) exchanged
    double r = 0.0;
    std::vector<NegativeRow> rows;  // ordered toward the singular end
    bool confirmed = false;
    std::string verdict;
};

/// M at a single t.
double negative_demo_M(const WeightPair& w, double t);

/// Interior pair with q0 != q1: M(t) evaluated on a log-log grid |ln t| in
/// [0.01, 700] toward t -> 0, after exchanging the roles when q1 < q0.
NegativeReport negative_demo(double theta, const WeightPair& w, int points = 64);

}  // namespace klab
