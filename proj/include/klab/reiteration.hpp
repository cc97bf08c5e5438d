#pragma once

// Reiteration for limiting spaces and the Lorentz-Karamata application.
//
//   (A_{0,q0;b0}, A_{0,q1;b1})_{theta,q;b} = A_{0,q;b~}   (side zero)
//   (A_{1,q0;b0}, A_{1,q1;b1})_{theta,q;b} = A_{1,q;b^}   (side one)

#include "klab/holmstedt.hpp"
#include "klab/interp_norms.hpp"
#include "klab/profile.hpp"
#include "klab/quadrature.hpp"
#include "klab/weight.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace klab {

struct ReiterationSpec {
    LimitingSide side = LimitingSide::zero;
    double theta = 0.5;
    double q = 1.0;
    WeightExpr b;
    WeightPair w;

    /// Validates ranges and SV classes (0 < q < inf, 0 < theta < 1).
    void validate() const;
    /// The Holmstedt case of the inner couple (limiting00 or limiting11).
    HolmstedtCase inner() const;
    /// ln rho (side zero) or ln eta (side one) at x = ln t.
    double log_index_x(double x) const;
};

/// Side exchanged, b0 and b1 flipped, theta -> 1 - theta, b kept:
/// build_hat_b(s)(t) == build_tilde_b(flip(s))(1/t).
ReiterationSpec flip(const ReiterationSpec& s);

/// b~ of the side-zero formula (throws PreconditionError on a divergent tail integral).
LogFn build_tilde_b(const ReiterationSpec& s);
/// b^ of the side-one formula.
LogFn build_hat_b(const ReiterationSpec& s);
/// build_tilde_b or build_hat_b according to the side.
LogFn reiterated_weight(const ReiterationSpec& s);

struct HypothesisReport {
    bool pass = true;
    std::string failed;  // name of the first failed condition
    double index_at_min = 0.0;  // index at ln t = -1000
    double index_at_max = 0.0;  // index at ln t = +1000
    double monotone_constant = 1.0;
};

/// Index increasing with limits 0 and inf (checked on ln t in [-1000, 1000]),
/// plus the condition on rho_eps / eta_eps (q0 != q1) or the log-derivative band (q0 = q1).
HypothesisReport check_reiteration_hypotheses(const ReiterationSpec& s);

struct LogDerivativeReport {
    double lo = 0.0;  // band of (index'/index) / (t^{-1} b1^q1 / integral)
    double hi = 0.0;
    bool pass = false;  // band inside [1/bound, bound]
    std::vector<double> t;
    std::vector<double> ratio;
};

LogDerivativeReport log_derivative_check(const ReiterationSpec& s, const GridSpec& grid = {1e-6, 1e6, 16},
                                         double bound = 10.0);

struct NormPair {
    double lhs = 0.0;  // ||f|| in (X0, X1)_{theta,q;b}, Holmstedt right-hand side as K
    double rhs = 0.0;  // ||f|| in the reiterated space
};

NormPair reiteration_norms(const ReiterationSpec& s, const KProfile& f);

struct ReiterationRow {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
};

struct ReiterationReport {
    std::vector<ReiterationRow> rows;
    std::size_t skipped = 0;
    double ratio_min = kInf;
    double ratio_max = 0.0;
};

struct NamedProfile {
    std::string name;
    KProfile k;
};

/// Checks hypotheses (HypothesisError on failure), then evaluates the suite in parallel.
ReiterationReport reiteration_check(const ReiterationSpec& s, const std::vector<NamedProfile>& suite,
                                    unsigned threads = 0);

// ---------------------------------------------------------------- Lorentz-Karamata

struct LKSpec {
    double p = kInf;
    double q = 1.0;
    WeightExpr b;
};

/// || t^{1/p - 1/q} b(t) f*(t) ||_{q,(0,inf)}.
double lorentz_karamata_norm(const Rearrangement& f, const LKSpec& s);

struct LKEmbeddingRow {
    double lk = 0.0;      // L_{inf,q;b} norm
    double interp = 0.0;  // (L1, L-inf)_{1,q;b} norm
    double ratio = 0.0;   // interp / lk
};

struct LKEmbeddingReport {
    std::vector<LKEmbeddingRow> rows;
    double ratio_min = kInf;
    double ratio_max = 0.0;
};

LKEmbeddingReport lk_embedding_check(const std::vector<Rearrangement>& suite, double q, const WeightExpr& b);

/// Step rearrangement with `cells` log-uniform knots in [t_min, t_max] and
/// decreasing values log-uniform in [lo, hi], zero after the last knot.
Rearrangement random_rearrangement(std::mt19937_64& rng, int cells, double t_min = 1e-3, double t_max = 1e3,
                                   double lo = 0.1, double hi = 10.0);

}  // namespace klab
