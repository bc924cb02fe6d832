#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

namespace rootlab {

using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using Index = Eigen::Index;

/// Input violates an operation's precondition.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical procedure could not deliver a result of the promised quality.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Evaluation point too close to one of the zeros.
class PoleProximityError : public NumericalError {
public:
    PoleProximityError(const std::string& what, double distance)
        : NumericalError(what), distance_(distance) {}
    double distance() const noexcept { return distance_; }

private:
    double distance_;
};

/**
 * Ordered multiset of complex zeros together with a declared bound C0 on
 * their imaginary parts.
 *
 * The bound is checked at construction with a slack of 1e-9 * scale so that
 * computed zeros (critical points, eigenvalues) whose imaginary parts carry
 * rounding noise can still be declared under the bound of their parent.
 */
class ZeroConfiguration {
public:
    static constexpr double kImSlack = 1e-9;

    ZeroConfiguration(ComplexVector zeros, double im_bound);

    /// Configuration whose bound is the observed max |Im z_j|.
    static ZeroConfiguration tight(ComplexVector zeros);
    static ZeroConfiguration real(const Eigen::VectorXd& zeros);

    const ComplexVector& zeros() const noexcept { return zeros_; }
    Index size() const noexcept { return zeros_.size(); }
    const Complex& operator[](Index j) const { return zeros_[j]; }

    double im_bound() const noexcept { return im_bound_; }
    bool is_real() const noexcept { return im_bound_ == 0.0; }

    /// max(1, max_j |z_j|)
    double scale() const noexcept { return scale_; }
    Complex mean() const { return zeros_.mean(); }
    double mean_abs() const { return zeros_.cwiseAbs().mean(); }
    double max_abs_imag() const;

private:
    ComplexVector zeros_;
    double im_bound_;
    double scale_;
};

/// Polynomial in coefficient form, ascending degree order.
class CoefficientPolynomial {
public:
    explicit CoefficientPolynomial(ComplexVector coeffs);

    const ComplexVector& coeffs() const noexcept { return coeffs_; }
    Index degree() const noexcept { return coeffs_.size() - 1; }
    const Complex& operator[](Index j) const { return coeffs_[j]; }
    const Complex& leading() const { return coeffs_[degree()]; }

private:
    ComplexVector coeffs_;
};

inline constexpr std::size_t kDefaultMaxDegree = 2048;

/// Monic polynomial with the given zeros. Factors are multiplied in a fixed
/// pseudo-random order. Throws DomainError above `max_degree`.
CoefficientPolynomial coeffs_from_roots(const ZeroConfiguration& roots,
                                        std::size_t max_degree = kDefaultMaxDegree);

Complex horner_eval(const CoefficientPolynomial& p, Complex x);

/// (p(x), p'(x)) in one pass.
std::pair<Complex, Complex> horner_eval_with_derivative(const CoefficientPolynomial& p, Complex x);

CoefficientPolynomial differentiate(const CoefficientPolynomial& p);

struct LogDerivativeSums {
    Complex s1;  ///< sum 1/(x - z_j) = p'(x)/p(x)
    Complex s2;  ///< sum 1/(x - z_j)^2; p''/p = s1^2 - s2
};

inline constexpr double kDefaultPoleEps = 1e-12;

/// Throws PoleProximityError if min_j |x - z_j| < pole_eps * roots.scale().
LogDerivativeSums log_derivative_sums(const ZeroConfiguration& roots, Complex x,
                                      double pole_eps = kDefaultPoleEps);

/// prod_j (x - z_j)
Complex eval_from_roots(const ZeroConfiguration& roots, Complex x);

/// p'(x) as sum_j prod_{k != j} (x - z_k); valid at the zeros themselves.
Complex derivative_from_roots(const ZeroConfiguration& roots, Complex x);

namespace detail {

/// 1/z without the overflow-guarded library division; callers keep z away from 0.
inline Complex fast_reciprocal(Complex z) noexcept
{
    const double re = z.real();
    const double im = z.imag();
    const double d = re * re + im * im;
    return {re / d, -im / d};
}

} // namespace detail

} // namespace rootlab
