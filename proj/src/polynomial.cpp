#include "rootlab/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "rootlab/rng.hpp"

namespace rootlab {

namespace {

double compute_scale(const ComplexVector& z)
{
    double s = 1.0;
    for (Index j = 0; j < z.size(); ++j) s = std::max(s, std::abs(z[j]));
    return s;
}

// Fixed key for the factor shuffle; the order only needs to be reproducible.
constexpr std::uint64_t kShuffleKey = 0x5EED0F5A11F4C7E5ULL;

} // namespace

ZeroConfiguration::ZeroConfiguration(ComplexVector zeros, double im_bound)
    : zeros_(std::move(zeros)), im_bound_(im_bound), scale_(compute_scale(zeros_))
{
    if (zeros_.size() < 1) throw DomainError("ZeroConfiguration: need at least one zero");
    if (!(im_bound_ >= 0.0) || !std::isfinite(im_bound_))
        throw DomainError("ZeroConfiguration: im_bound must be finite and non-negative");
    for (Index j = 0; j < zeros_.size(); ++j) {
        if (!std::isfinite(zeros_[j].real()) || !std::isfinite(zeros_[j].imag()))
            throw DomainError("ZeroConfiguration: non-finite zero");
    }
    const double worst = max_abs_imag();
    if (worst > im_bound_ + kImSlack * scale_)
        throw DomainError("ZeroConfiguration: |Im z| = " + std::to_string(worst) +
                          " exceeds declared bound " + std::to_string(im_bound_));
}

ZeroConfiguration ZeroConfiguration::tight(ComplexVector zeros)
{
    double worst = 0.0;
    for (Index j = 0; j < zeros.size(); ++j) worst = std::max(worst, std::abs(zeros[j].imag()));
    return ZeroConfiguration(std::move(zeros), worst);
}

ZeroConfiguration ZeroConfiguration::real(const Eigen::VectorXd& zeros)
{
    return ZeroConfiguration(zeros.cast<Complex>(), 0.0);
}

double ZeroConfiguration::max_abs_imag() const
{
    double worst = 0.0;
    for (Index j = 0; j < zeros_.size(); ++j) worst = std::max(worst, std::abs(zeros_[j].imag()));
    return worst;
}

CoefficientPolynomial::CoefficientPolynomial(ComplexVector coeffs) : coeffs_(std::move(coeffs))
{
    if (coeffs_.size() < 1) throw DomainError("CoefficientPolynomial: empty coefficient list");
    if (coeffs_[coeffs_.size() - 1] == Complex(0.0, 0.0))
        throw DomainError("CoefficientPolynomial: leading coefficient is zero");
}

CoefficientPolynomial coeffs_from_roots(const ZeroConfiguration& roots, std::size_t max_degree)
{
    const Index n = roots.size();
    if (static_cast<std::size_t>(n) > max_degree)
        throw DomainError("coeffs_from_roots: degree " + std::to_string(n) + " exceeds conditioning ceiling " +
                          std::to_string(max_degree));

    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    RngStream rng(kShuffleKey);
    for (std::size_t i = order.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(order[i - 1], order[j]);
    }

    ComplexVector c = ComplexVector::Zero(n + 1);
    c[0] = 1.0;
    Index deg = 0;
    for (Index idx : order) {
        const Complex z = roots[idx];
        // c(x) <- (x - z) c(x)
        c[deg + 1] = c[deg];
        for (Index i = deg; i > 0; --i) c[i] = c[i - 1] - z * c[i];
        c[0] = -z * c[0];
        ++deg;
    }
    return CoefficientPolynomial(std::move(c));
}

Complex horner_eval(const CoefficientPolynomial& p, Complex x)
{
    const ComplexVector& c = p.coeffs();
    Complex v = c[c.size() - 1];
    for (Index i = c.size() - 2; i >= 0; --i) v = v * x + c[i];
    return v;
}

std::pair<Complex, Complex> horner_eval_with_derivative(const CoefficientPolynomial& p, Complex x)
{
    const ComplexVector& c = p.coeffs();
    Complex v = c[c.size() - 1];
    Complex d = 0.0;
    for (Index i = c.size() - 2; i >= 0; --i) {
        d = d * x + v;
        v = v * x + c[i];
    }
    return {v, d};
}

CoefficientPolynomial differentiate(const CoefficientPolynomial& p)
{
    if (p.degree() < 1) throw DomainError("differentiate: constant polynomial has an empty derivative");
    ComplexVector d(p.degree());
    for (Index i = 1; i <= p.degree(); ++i) d[i - 1] = static_cast<double>(i) * p[i];
    return CoefficientPolynomial(std::move(d));
}

LogDerivativeSums log_derivative_sums(const ZeroConfiguration& roots, Complex x, double pole_eps)
{
    const double eps = pole_eps * roots.scale();
    LogDerivativeSums out{0.0, 0.0};
    for (Index j = 0; j < roots.size(); ++j) {
        const Complex d = x - roots[j];
        const double dist = std::abs(d);
        if (dist < eps)
            throw PoleProximityError("log_derivative_sums: evaluation point within pole tolerance of a zero", dist);
        const Complex r = detail::fast_reciprocal(d);
        out.s1 += r;
        out.s2 += r * r;
    }
    return out;
}

Complex eval_from_roots(const ZeroConfiguration& roots, Complex x)
{
    Complex v = 1.0;
    for (Index j = 0; j < roots.size(); ++j) v *= x - roots[j];
    return v;
}

Complex derivative_from_roots(const ZeroConfiguration& roots, Complex x)
{
    Complex total = 0.0;
    for (Index j = 0; j < roots.size(); ++j) {
        Complex term = 1.0;
        for (Index k = 0; k < roots.size(); ++k)
            if (k != j) term *= x - roots[k];
        total += term;
    }
    return total;
}

} // namespace rootlab
