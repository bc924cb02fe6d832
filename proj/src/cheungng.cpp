#include "rootlab/cheungng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rootlab {

namespace {

constexpr Complex kI{0.0, 1.0};

void require_pair(const ZeroConfiguration& roots, const char* who)
{
    if (roots.size() < 2) throw DomainError(std::string(who) + ": need at least two zeros");
}

// e^z - 1 without cancellation for small |z|.
Complex expm1_complex(Complex z)
{
    const double a = z.real();
    const double b = z.imag();
    const double half_sin = std::sin(0.5 * b);
    const double re = std::expm1(a) * std::cos(b) - 2.0 * half_sin * half_sin;
    const double im = std::exp(a) * std::sin(b);
    return {re, im};
}

// Relative slack on the bound checks for rounding in the evaluated quantities.
constexpr double kBoundSlack = 1e-12;

} // namespace

CheungNgMatrix build_matrix(const ZeroConfiguration& roots)
{
    require_pair(roots, "build_matrix");
    const Index n = roots.size();
    const Index m = n - 1;
    CheungNgMatrix out;
    out.n = n;
    out.z1 = roots[0];
    out.diag = roots.zeros().tail(m);
    // (z1 I - D) J has row i constant equal to z1 - z_{i+2}.
    const ComplexVector row_weight = (out.z1 - out.diag.array()).matrix() / static_cast<double>(n);
    out.entries = row_weight * Eigen::RowVectorXcd::Ones(m);
    out.entries.diagonal() += out.diag;
    return out;
}

Eigen::MatrixXcd jtilde_matrix(const ZeroConfiguration& roots)
{
    require_pair(roots, "jtilde_matrix");
    const Index m = roots.size() - 1;
    const ComplexVector w = (roots[0] - roots.zeros().tail(m).array()).matrix();
    return w * Eigen::RowVectorXcd::Ones(m);
}

double char_poly_residual(const CheungNgMatrix& m, const ZeroConfiguration& roots, Complex x)
{
    const Index dim = m.entries.rows();
    const Eigen::MatrixXcd shifted = x * Eigen::MatrixXcd::Identity(dim, dim) - m.entries;
    const Complex det = Eigen::PartialPivLU<Eigen::MatrixXcd>(shifted).determinant();

    Complex dp;
    try {
        const LogDerivativeSums s = log_derivative_sums(roots, x);
        dp = eval_from_roots(roots, x) * s.s1;
    } catch (const PoleProximityError&) {
        dp = derivative_from_roots(roots, x);
    }
    return std::abs(static_cast<double>(m.n) * det - dp) / (1.0 + std::abs(dp));
}

Complex s_tilde(const ZeroConfiguration& roots)
{
    require_pair(roots, "s_tilde");
    Complex s = 0.0;
    for (Index j = 1; j < roots.size(); ++j) s += roots[0] - roots[j];
    return s;
}

Complex c_factor(const ZeroConfiguration& roots, double t)
{
    const double n = static_cast<double>(roots.size());
    const Complex w = s_tilde(roots) / n;
    const double eps_switch = 1e-8 * (1.0 + std::abs(t));
    if (std::abs(w) > eps_switch) return expm1_complex(kI * t * w) / (kI * w);

    // t * sum_k (i w t)^k / (k+1)!
    const Complex x = kI * w * t;
    Complex term = t;
    Complex sum = term;
    for (int k = 1; k < 64; ++k) {
        term *= x / static_cast<double>(k + 1);
        sum += term;
        if (std::abs(term) <= 1e-16 * std::abs(sum)) break;
    }
    return sum;
}

Complex jtilde_trace(const ZeroConfiguration& roots, double t)
{
    require_pair(roots, "jtilde_trace");
    const double n = static_cast<double>(roots.size());
    Complex mean_exp = 0.0;
    Complex mean_zexp = 0.0;
    for (Index j = 0; j < roots.size(); ++j) {
        const Complex e = std::exp(kI * t * roots[j]);
        mean_exp += e;
        mean_zexp += roots[j] * e;
    }
    return roots[0] * (mean_exp / n) - mean_zexp / n;
}

Complex jtilde_trace_direct(const ZeroConfiguration& roots, double t)
{
    require_pair(roots, "jtilde_trace_direct");
    Complex sum = 0.0;
    for (Index j = 1; j < roots.size(); ++j) sum += (roots[0] - roots[j]) * std::exp(kI * t * roots[j]);
    return sum / static_cast<double>(roots.size());
}

double c_bound(double c0, double t)
{
    const double at = std::abs(t);
    if (c0 < 1e-8) {
        const double x = 2.0 * c0 * at;
        return at * (1.0 + x / 2.0 + x * x / 6.0);
    }
    return std::expm1(2.0 * c0 * at) / (2.0 * c0);
}

double jtilde_trace_bound(const ZeroConfiguration& roots, double c0, double t)
{
    return std::exp(c0 * std::abs(t)) * (std::abs(roots[0]) + roots.mean_abs());
}

ComparisonCertificate lemma3_check(const ZeroConfiguration& roots, double t, const DerivativeTower& tower)
{
    require_pair(roots, "lemma3_check");
    if (tower.depth() < 1) throw DomainError("lemma3_check: tower has no critical-point level");
    const ZeroConfiguration& crit = tower.level(1);
    if (crit.size() != roots.size() - 1) throw DomainError("lemma3_check: tower does not match the configuration");

    ComparisonCertificate cert;
    cert.t = t;

    Complex trace_m = 0.0;
    for (Index j = 0; j < crit.size(); ++j) trace_m += std::exp(kI * t * crit[j]);
    Complex trace_d = 0.0;
    for (Index j = 1; j < roots.size(); ++j) trace_d += std::exp(kI * t * roots[j]);
    cert.lhs = trace_m - trace_d;

    cert.s_tilde = s_tilde(roots);
    cert.c_value = c_factor(roots, t);
    cert.trace_value = jtilde_trace(roots, t);
    cert.rhs = kI * cert.c_value * cert.trace_value;
    cert.residual = std::abs(cert.lhs - cert.rhs);

    const double c0 = roots.im_bound();
    cert.bound_c_ok = std::abs(cert.c_value) <= c_bound(c0, t) * (1.0 + kBoundSlack) + kBoundSlack;
    const double tb = jtilde_trace_bound(roots, c0, t);
    cert.bound_trace_ok = std::abs(cert.trace_value) <= tb * (1.0 + kBoundSlack) + kBoundSlack;
    return cert;
}

namespace detail {

Complex matrix_exp_trace_impl(const Eigen::MatrixXcd& m, double t)
{
    const Index dim = m.rows();
    if (dim == 0) return 0.0;
    const Eigen::MatrixXcd a = (kI * t) * m;
    const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();

    int squarings = 0;
    if (norm1 > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm1 / 0.5)));
    const Eigen::MatrixXcd scaled = a / std::ldexp(1.0, squarings);

    Eigen::MatrixXcd result = Eigen::MatrixXcd::Identity(dim, dim);
    Eigen::MatrixXcd term = Eigen::MatrixXcd::Identity(dim, dim);
    for (int k = 1; k <= 40; ++k) {
        term = (term * scaled) / static_cast<double>(k);
        result += term;
        if (term.cwiseAbs().sum() <= 1e-18 * result.cwiseAbs().sum()) break;
    }
    for (int s = 0; s < squarings; ++s) result = (result * result).eval();
    return result.trace();
}

} // namespace detail

} // namespace rootlab
