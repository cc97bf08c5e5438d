#pragma once

// Weighted inequalities over quasi-concave functions and Hardy-type lemmas.
//
//   ( int [h w]^q ds/s )^{1/q} <= C ( int [h v]^p ds/s )^{1/p}
//
// A1/A2 are the constants for general positive weights, A3/A4 their forms
// for weights in SV_{0,p}, SV_{0,q}.

#include "klab/quadrature.hpp"
#include "klab/weight.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace klab {

struct InequalitySpec {
    double p = 1.0;
    double q = 1.0;
    WeightExpr v;
    WeightExpr w;
};

enum class ConstantKind { A1, A2, A3, A4 };

const char* to_string(ConstantKind k);

struct ConstantReport {
    ConstantKind which = ConstantKind::A1;
    double value = 0.0;
    double argmax = 0.0;  // maximizing x for the sup forms, NaN for integral forms
};

ConstantReport compute_constant(const InequalitySpec& spec, ConstantKind which, const GridSpec& grid = {});

/// int_0^x s^q w^q ds/s + x^q int_x^inf w^q ds/s, as a logarithm; x = e^lx.
double log_extremal_mass(const WeightExpr& w, double q, double lx);

/// int_0^inf [min(s,x) w(s)]^q ds/s by direct quadrature (logarithm).
double log_extremal_direct(const WeightExpr& w, double q, double lx);

struct ProbeReport {
    double sup_ratio = 0.0;
    double argmax = 0.0;
};

/// sup over x in the grid of LHS/RHS at h_x(s) = min(s, x), both sides by direct quadrature.
ProbeReport best_constant_probe(const InequalitySpec& spec, const std::vector<double>& xs);

/// LHS/RHS for an arbitrary quasi-concave h (given by its logarithm).
double inequality_ratio(const InequalitySpec& spec, const LogFn& h);

enum class WindowSide { head, tail };

struct WindowReport {
    bool pass = false;
    double constant = 0.0;  // max over t of condition(t)/bound(t)
    std::vector<double> t;
    std::vector<double> condition;
};

/// Head (h restricted to (0,t)) or tail ((t,inf)) variant of the inequality:
/// evaluates the window condition on the grid against the bound.
WindowReport window_condition(const InequalitySpec& spec, WindowSide side, const LogFn& bound,
                              const GridSpec& grid = {1e-6, 1e6, 16}, double threshold = 4.0);

// ---------------------------------------------------------------- Hardy lemmas

enum class HardyCase { HET1, HET2, HET3plus, HET3 };

const char* to_string(HardyCase c);

/// The weight v making the Hardy-type inequality hold. w and phi are densities
/// with respect to dt.
LogFn hardy_build_v(HardyCase c, double alpha, const LogFn& w, const LogFn& phi);

struct HardySides {
    double lhs = 0.0;
    double rhs = 0.0;
};

/// Both sides for a given h (integrals with respect to dt).
HardySides hardy_sides(HardyCase c, double alpha, const LogFn& w, const LogFn& phi, const LogFn& v,
                       const LogFn& h);

/// Piecewise constant function on log-spaced cells of [t_min, t_max], values
/// log-uniform in [lo, hi], constant beyond the cells.
enum class Monotone { none, nondecreasing, nonincreasing };
LogFn random_step_function(std::mt19937_64& rng, int cells, double t_min, double t_max, Monotone m,
                           double lo = 0.1, double hi = 10.0);

struct HardyReport {
    double max_ratio = 0.0;
    std::size_t samples = 0;
};

/// Max LHS/RHS over `samples` random h of the class required by the case
/// (arbitrary for HET1/HET2, nonincreasing for HET3plus, nondecreasing for HET3).
HardyReport hardy_check(HardyCase c, double alpha, const LogFn& w, const LogFn& phi, std::size_t samples,
                        std::uint64_t seed);

// ---------------------------------------------------------------- kernel inequality

/// psi(t,u) = scale * wt(t) e^{-ct t} * wu(u) e^{-cu u}.
struct SeparableKernel {
    double scale = 1.0;
    WeightExpr wt;
    double ct = 1.0;
    WeightExpr wu;
    double cu = 1.0;

    LogFn t_factor() const;
    LogFn u_factor() const;
};

struct HmtRow {
    double x = 0.0;
    double condition_lhs = 0.0;   // int (int_x^inf psi du)^alpha w dt
    double condition_rhs = 0.0;   // int_x^inf v
    double inequality_lhs = 0.0;  // LHS of the inequality at h = indicator of (x, inf)
    double inequality_rhs = 0.0;
};

struct HmtReport {
    bool condition_holds = false;
    bool inequality_holds = false;
    double condition_constant = 0.0;
    double inequality_constant = 0.0;
    std::vector<HmtRow> rows;
};

HmtReport hmt_check(double alpha, const SeparableKernel& psi, const LogFn& w, const LogFn& v,
                    const std::vector<double>& xs, double threshold = 4.0);

}  // namespace klab
