#pragma once

#include <cmath>
#include <complex>

#include <Eigen/Dense>

#include "rootlab/polynomial.hpp"
#include "rootlab/rootfind.hpp"

namespace rootlab {

/**
 * The (n-1) x (n-1) matrix
 *
 *     M = D + (1/n) (z1 I - D) J,    D = diag(z_2, ..., z_n),  J = all-ones,
 *
 * whose eigenvalues are the critical points of prod_j (z - z_j).
 */
struct CheungNgMatrix {
    Eigen::MatrixXcd entries;
    ComplexVector diag;  ///< z_2 .. z_n
    Complex z1;
    Index n;
};

CheungNgMatrix build_matrix(const ZeroConfiguration& roots);

/// J~ = diag(z1 - z_2, ..., z1 - z_n) J, dense.
Eigen::MatrixXcd jtilde_matrix(const ZeroConfiguration& roots);

/// |n det(xI - M) - p'(x)| / (1 + |p'(x)|), determinant by partial-pivot LU.
double char_poly_residual(const CheungNgMatrix& m, const ZeroConfiguration& roots, Complex x);

/// S~ = sum_{j >= 2} (z1 - z_j)
Complex s_tilde(const ZeroConfiguration& roots);

/// c(t) = int_0^t exp(i u S~/n) du
Complex c_factor(const ZeroConfiguration& roots, double t);

/// (1/n) Tr(J~ e^{itD}) in the symmetric form z1 * mean(e^{itz}) - mean(z e^{itz}).
Complex jtilde_trace(const ZeroConfiguration& roots, double t);

/// (1/n) sum_{j >= 2} (z1 - z_j) e^{itz_j}, the trace read off J~ directly.
Complex jtilde_trace_direct(const ZeroConfiguration& roots, double t);

/// (e^{2 C0 |t|} - 1) / (2 C0), continuous at C0 = 0 with value |t|.
double c_bound(double c0, double t);

/// e^{C0 |t|} (|z1| + mean |z_j|)
double jtilde_trace_bound(const ZeroConfiguration& roots, double c0, double t);

struct ComparisonCertificate {
    double t = 0.0;
    Complex lhs;        ///< Tr e^{itM} - Tr e^{itD}
    Complex rhs;        ///< i c(t) (1/n) Tr(J~ e^{itD})
    Complex s_tilde;
    Complex c_value;
    Complex trace_value;  ///< (1/n) Tr(J~ e^{itD})
    double residual = 0.0;
    bool bound_c_ok = false;
    bool bound_trace_ok = false;

    static constexpr double kTolerance = 1e-9;

    bool identity_ok() const { return residual <= kTolerance * (1.0 + std::abs(lhs)); }
    bool passed() const { return identity_ok() && bound_c_ok && bound_trace_ok; }
};

/// Evaluates both sides of the trace comparison identity at t. The critical
/// points are taken from tower level 1.
ComparisonCertificate lemma3_check(const ZeroConfiguration& roots, double t, const DerivativeTower& tower);

inline constexpr Index kMatrixExpMaxDim = 64;

namespace detail {
Complex matrix_exp_trace_impl(const Eigen::MatrixXcd& m, double t);
}

/// Tr exp(itM) by scaling and squaring with a truncated Taylor series.
/// Oracle-scale only: throws DomainError above kMatrixExpMaxDim.
template <typename Derived>
Complex matrix_exp_trace(const Eigen::MatrixBase<Derived>& m, double t)
{
    if (m.rows() != m.cols()) throw DomainError("matrix_exp_trace: matrix must be square");
    if (m.rows() > kMatrixExpMaxDim) throw DomainError("matrix_exp_trace: dimension over oracle limit");
    return detail::matrix_exp_trace_impl(m.template cast<Complex>(), t);
}

} // namespace rootlab
