#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rootlab/polynomial.hpp"

namespace rootlab {

struct SolverOptions {
    /// Acceptance threshold on min(|s1| / sum_j m_j/|x - w_j|, |Newton step| / scale).
    double tol_newton = 1e-10;
    int max_iter = 200;
    /// Zeros closer than duplicate_tol * scale are one zero with multiplicity.
    double duplicate_tol = 1e-12;
    /// Radius of the initial-guess jitter, relative to scale.
    double jitter = 1e-3;
    std::uint64_t seed = 0xC0FFEE1234ULL;
};

/// Iteration did not reach the promised residual.
class ConvergenceError : public NumericalError {
public:
    ConvergenceError(const std::string& what, double worst_residual, std::vector<Index> unconverged)
        : NumericalError(what), worst_residual_(worst_residual), unconverged_(std::move(unconverged)) {}

    double worst_residual() const noexcept { return worst_residual_; }
    const std::vector<Index>& unconverged() const noexcept { return unconverged_; }

private:
    double worst_residual_;
    std::vector<Index> unconverged_;
};

/// Solver failure while building a tower, tagged with the level being produced.
class TowerError : public NumericalError {
public:
    TowerError(const std::string& what, int level) : NumericalError(what), level_(level) {}
    int level() const noexcept { return level_; }

private:
    int level_;
};

/// Zeros of p, p', ..., p^(K). levels[k] holds n - k zeros.
class DerivativeTower {
public:
    DerivativeTower(std::vector<ZeroConfiguration> levels, int requested_depth);

    const ZeroConfiguration& level(int k) const { return levels_.at(static_cast<std::size_t>(k)); }
    const std::vector<ZeroConfiguration>& levels() const noexcept { return levels_; }
    Index source_n() const { return levels_.front().size(); }
    /// Depth actually reached; smaller than requested only when the request ran past degree 1.
    int depth() const noexcept { return static_cast<int>(levels_.size()) - 1; }
    int requested_depth() const noexcept { return requested_depth_; }

private:
    std::vector<ZeroConfiguration> levels_;
    int requested_depth_;
};

/// Critical points of a real-rooted polynomial by bisection on the
/// logarithmic derivative between consecutive distinct zeros. Sorted output.
ZeroConfiguration critical_points_real(const ZeroConfiguration& roots);

/// Critical points of an arbitrary complex configuration by simultaneous
/// Aberth iteration on p'/p. Zeros of multiplicity m contribute m - 1
/// copies of themselves directly.
ZeroConfiguration critical_points_complex(const ZeroConfiguration& roots, const SolverOptions& options = {});

/// Real solver when im_bound == 0, complex solver otherwise.
ZeroConfiguration critical_points(const ZeroConfiguration& roots, const SolverOptions& options = {});

DerivativeTower derivative_tower(const ZeroConfiguration& roots, int depth, const SolverOptions& options = {});

/// Zeros of a polynomial in coefficient form (Aberth-Ehrlich, Newton-polygon
/// starting radii). The returned bound is the observed max |Im|.
ZeroConfiguration polyroots_coeff(const CoefficientPolynomial& p, const SolverOptions& options = {});

namespace detail {

struct DistinctZeros {
    std::vector<Complex> values;
    std::vector<int> multiplicity;
};

DistinctZeros group_duplicates(const ComplexVector& zeros, double tol);

} // namespace detail

} // namespace rootlab
