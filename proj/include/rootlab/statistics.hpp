#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rootlab/ensembles.hpp"
#include "rootlab/polynomial.hpp"
#include "rootlab/rootfind.hpp"

namespace rootlab {

/**
 * Test function f with its Fourier data, certified on the strip |Im z| <= C0.
 *
 * f(x) = int fhat(t) e^{itx} dt with fhat(t) = (1/2pi) int f(u) e^{-itu} du.
 * Two closed-form families are built in:
 *   gauss    f(z) = exp(-z^2/2),  fhat(t) = exp(-t^2/2)/sqrt(2pi)
 *   poisson  f(z) = 1/(1+z^2),    fhat(t) = exp(-|t|)/2, admitted for 3 C0 < 1
 */
class TestFunction {
public:
    static TestFunction gaussian(double strip = 0.0);
    static TestFunction poisson(double strip = 0.0);
    static TestFunction by_name(std::string_view name, double strip = 0.0);

    const std::string& name() const noexcept { return name_; }
    double strip() const noexcept { return strip_; }

    Complex operator()(Complex z) const { return eval_(z); }
    Complex fourier_density(double t) const { return density_(t); }

    /// sup |f| and sup |f'| over the strip.
    double sup_bound() const noexcept { return sup_bound_; }
    double deriv_bound() const noexcept { return deriv_bound_; }

    /// int |fhat(t)| e^{3 C0 |t|} dt
    double bound_integral(double c0) const;
    double bound_integral() const { return bound_integral_; }

    /// int |fhat(t)| psi(C0, t) e^{C0 |t|} dt with psi(C0, t) = (e^{2 C0 |t|} - 1)/(2 C0), psi(0, t) = |t|.
    double moment_integral(double c0) const;
    double moment_integral() const { return moment_integral_; }

    /// Largest C0 for which the Fourier integrals above stay finite (infinity if none).
    double admissible_strip() const noexcept { return admissible_; }

private:
    TestFunction(std::string name, std::function<Complex(Complex)> eval, std::function<Complex(double)> density,
                 double strip, double sup_bound, double deriv_bound, double admissible);

    std::string name_;
    std::function<Complex(Complex)> eval_;
    std::function<Complex(double)> density_;
    double strip_;
    double sup_bound_;
    double deriv_bound_;
    double admissible_;
    double bound_integral_ = 0.0;
    double moment_integral_ = 0.0;
};

enum class AssumptionMode { A2, A3, A4 };

std::string to_string(AssumptionMode mode);
AssumptionMode parse_assumption_mode(std::string_view text);

/// Requested ell needs a scaling sequence the plan does not carry.
class MissingScalingError : public DomainError {
public:
    using DomainError::DomainError;
};

/// A positive sequence n -> s_n given as "n", "sqrt(n)", "log(n)" or a positive constant.
class ScalingSequence {
public:
    static ScalingSequence parse(std::string_view expr);

    double operator()(Index n) const;
    const std::string& expr() const noexcept { return expr_; }

private:
    ScalingSequence(std::string expr, std::function<double(double)> fn) : expr_(std::move(expr)), fn_(std::move(fn)) {}
    std::string expr_;
    std::function<double(double)> fn_;
};

class ScalingPlan {
public:
    ScalingPlan(std::optional<ScalingSequence> a, std::optional<ScalingSequence> b,
                std::optional<AssumptionMode> mode = std::nullopt);

    /// From tokens such as "a=n", "b=sqrt(n)"; the mode defaults to A2 (a only),
    /// A3 (b only) or A4 (both).
    static ScalingPlan parse(const std::vector<std::string>& tokens, std::optional<AssumptionMode> mode = std::nullopt);

    bool has_a() const noexcept { return a_.has_value(); }
    bool has_b() const noexcept { return b_.has_value(); }
    double a(Index n) const;
    double b(Index n) const;
    AssumptionMode mode() const noexcept { return mode_; }
    const std::optional<ScalingSequence>& a_sequence() const noexcept { return a_; }
    const std::optional<ScalingSequence>& b_sequence() const noexcept { return b_; }
    std::string describe() const;

private:
    std::optional<ScalingSequence> a_;
    std::optional<ScalingSequence> b_;
    AssumptionMode mode_;
};

struct LinearStatisticRecord {
    Index n = 0;
    Index k = 0;
    int ell = 1;
    Complex value;
    bool centered = false;
    std::optional<Complex> center;
    std::uint64_t seed = 0;
};

/// ell = 1: (1/a_{n-k}) sum f(x_j); ell = 2: sum f(x_j / b_{n-k}); ell = 3: both scalings.
Complex linear_statistic(const ZeroConfiguration& level, const TestFunction& f, const ScalingPlan& plan, int ell,
                         Index n, Index k);

class InsufficientReplicasError : public DomainError {
public:
    using DomainError::DomainError;
};

/// Subtracts the mean of an independent reference batch, matched on (n, k, ell).
std::vector<LinearStatisticRecord> center_empirical(std::vector<LinearStatisticRecord> target,
                                                    std::span<const LinearStatisticRecord> reference);

/// E[f(Z / scale)] for Z drawn from a Type 1 zero law, by adaptive quadrature.
Complex expected_value(const Law& law, const TestFunction& f, double scale);

/// Subtracts E[L_{n,ell}] = n E[f(Z/b_n)] / a_n for i.i.d. Type 1 zeros. Level-0 records only.
std::vector<LinearStatisticRecord> center_analytic(std::vector<LinearStatisticRecord> records, const Law& law,
                                                   const TestFunction& f, const ScalingPlan& plan);

/// Finite-n bound on |L_{n,1}(f) - L^{(1)}_{n,1}(f)|:
///   |f|/a_n + n |a_{n-1} - a_n| |f| / (a_{n-1} a_n) + moment(C0) (|Z_1| + mean |Z_j|) / a_{n-1}.
double theorem1_bound(const ZeroConfiguration& roots, const TestFunction& f, const ScalingPlan& plan, Index n);

/// Sum of per-level bounds for |L_{n,1} - L^{(k)}_{n,1}|.
double telescoped_bound(const DerivativeTower& tower, const TestFunction& f, const ScalingPlan& plan, Index k);

struct AssumptionSeries {
    std::string expression;  ///< e.g. "an2"
    Index k = 0;
    std::vector<Index> n;
    std::vector<double> value;
    bool required = true;    ///< false for reported alternatives such as remark1
    bool trend_ok = false;
};

struct AssumptionReport {
    AssumptionMode mode;
    double threshold;
    std::vector<AssumptionSeries> series;

    /// All required series decay and end below the threshold. A finite-n diagnostic only.
    bool passed() const;
};

inline constexpr double kDefaultAssumptionThreshold = 1e-2;

/// Finite-n values of the scaling assumptions of plan.mode() on samples with increasing n.
AssumptionReport check_assumptions(const ScalingPlan& plan, std::span<const ZeroConfiguration> samples, Index k_max,
                                   double threshold = kDefaultAssumptionThreshold);

/// sup_x |F_m(x) - F(x)| for the empirical CDF of `sample`.
double kolmogorov_distance(std::span<const double> sample, const std::function<double(double)>& cdf);

/// sup_x |F_a(x) - F_b(x)| for two empirical CDFs.
double sup_distance(std::span<const double> a, std::span<const double> b);

/// Levy distance between two empirical CDFs, bisection to 1e-9.
double levy_distance(std::span<const double> a, std::span<const double> b);

/// Every inner point lies in the convex hull of outer or within tol of it.
bool hull_contains(const ZeroConfiguration& outer, const ZeroConfiguration& inner, double tol);

std::vector<double> real_parts(const ZeroConfiguration& z);

} // namespace rootlab
