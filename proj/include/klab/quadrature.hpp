#pragma once

// Integration and suprema on (0, inf) in logarithmic coordinates.
//
// Every quantity in the library is a quasi-norm of the form
//   || u^{-1/q} g(u) ||_{q,(a,b)} = ( int_a^b g(u)^q du/u )^{1/q},
// so all functions are handled through x = ln u and their logarithm
// ln g(e^x). Working with logarithms keeps evaluation finite at
// |x| ~ 1e15, which the tail convergence test relies on.

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace klab {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Logarithmic grid over [t_min, t_max].
struct GridSpec {
    double t_min = 1e-12;
    double t_max = 1e12;
    int points_per_decade = 64;

    void validate() const;
    /// Grid points in x = ln t, increasing, endpoints included.
    std::vector<double> log_points() const;
    std::vector<double> points() const;
    /// Parses "tmin,tmax,ppd".
    static GridSpec parse(const std::string& text);
};

enum class DivergentEnd { at_zero, at_infinity };

struct IntegralResult {
    double value = 0.0;      // +inf when divergent or overflowing
    double log_value = -kInf;
    double error_bound = 0.0;
    std::optional<DivergentEnd> divergent_end;

    bool finite() const { return !divergent_end && log_value < kInf; }
};

/// Positive function g on (0, inf) stored as x -> ln g(e^x).
///
/// `-inf` is a legal value (g = 0). Breaks are x positions of kinks; the
/// integrator splits there.
class LogFn {
public:
    using Fn = std::function<double(double)>;

    LogFn();  // g = 0
    explicit LogFn(Fn log_at, std::vector<double> breaks = {});

    static LogFn constant(double c);
    /// g(t) = t^a.
    static LogFn power(double a);
    /// g(t) = exp(-c t), c > 0.
    static LogFn exp_decay(double c);
    /// Wraps a function given in linear coordinates.
    static LogFn from_linear(std::function<double(double)> g, std::vector<double> breaks = {});

    double log_at(double x) const { return log_at_(x); }
    double operator()(double t) const;
    const std::vector<double>& breaks() const { return breaks_; }
    bool is_zero() const { return zero_; }

    LogFn operator*(const LogFn& other) const;
    LogFn pow(double r) const;
    /// t^a g(t).
    LogFn times_power(double a) const;
    /// g(1/t).
    LogFn flip() const;

private:
    Fn log_at_;
    std::vector<double> breaks_;
    bool zero_ = false;
};

enum class Convergence { unknown, converges, diverges };

struct IntegrationOptions {
    double tol = 1e-12;
    /// Known behaviour of the integral near 0 and near infinity.
    Convergence at_zero = Convergence::unknown;
    Convergence at_infinity = Convergence::unknown;
};

/// int_a^b g(u)^q du/u; a = 0 and b = inf allowed. Divergence near an
/// infinite end of the log axis is detected from the far-field slope of
/// ln g unless supplied in `opt`.
IntegralResult integrate_log(const LogFn& g, double q, double a, double b,
                             const IntegrationOptions& opt = {});

/// Same integral with endpoints given as xa = ln a, xb = ln b (+-inf allowed).
IntegralResult integrate_log_x(const LogFn& g, double q, double xa, double xb,
                               const IntegrationOptions& opt = {});

/// ( int_a^b g^q du/u )^{1/q} for q < inf, ess sup_{(a,b)} g for q = inf.
double qnorm(const LogFn& g, double q, double a, double b,
             const IntegrationOptions& opt = {});

/// Logarithm of qnorm; finite for results beyond the double range.
double log_qnorm(const LogFn& g, double q, double a, double b,
                 const IntegrationOptions& opt = {});
double log_qnorm_x(const LogFn& g, double q, double xa, double xb,
                   const IntegrationOptions& opt = {});

/// Supremum of g over (a, b): grid search, far-field growth test, then
/// golden-section refinement around the best grid point.
double sup_log(const LogFn& g, double a, double b, const GridSpec& grid = {});
double log_sup(const LogFn& g, double a, double b, const GridSpec& grid = {});
double log_sup_x(const LogFn& g, double xa, double xb, const GridSpec& grid = {});

/// Far-field slope d(ln g)/d(ln |x|) at the given end of the log axis;
/// integrals of g du/u converge iff the slope is below -1.
double far_field_slope(const LogFn& g, double q, DivergentEnd end);

enum class Direction { nondecreasing, nonincreasing };

/// sup over grid pairs x < t of g(x)/g(t) (nondecreasing) or g(t)/g(x)
/// (nonincreasing); 1 for monotone data. Samples are ln g values.
double quasi_monotone_constant(const std::vector<double>& log_values, Direction dir);
double quasi_monotone_constant(const LogFn& g, const GridSpec& grid, Direction dir);

}  // namespace klab
