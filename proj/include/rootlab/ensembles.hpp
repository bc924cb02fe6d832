#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "rootlab/polynomial.hpp"
#include "rootlab/rng.hpp"

namespace rootlab {

enum class EnsembleKind { Type1, Type2, Type3 };

std::string to_string(EnsembleKind kind);
EnsembleKind parse_ensemble_kind(std::string_view text);

/// A named law with numeric parameters, written as `name` or `name(key=value, ...)`.
struct Law {
    std::string name;
    std::map<std::string, double> params;

    static Law parse(std::string_view text);
    std::string to_string() const;
    double param(const std::string& key, double fallback) const;
};

/// Unknown law name or a law used with the wrong ensemble kind.
class UnknownLawError : public DomainError {
public:
    using DomainError::DomainError;
};

struct EnsembleSpec {
    EnsembleKind kind = EnsembleKind::Type1;
    Law law;
    int n = 1;
    std::optional<double> declared_c0;
};

/// Certified imaginary-part bound of a Type 1 zero law: 1 for "circle", 0 for the real laws.
double type1_im_bound(const Law& law);

/// n i.i.d. zeros. Laws: "circle", "uniform[-1,1]", "gauss", "rademacher(jitter=1e-6)".
ZeroConfiguration sample_type1(const EnsembleSpec& spec, RngStream& rng);

/// Kac polynomial with n + 1 i.i.d. coefficients. Laws: "kac-gauss", "kac-rademacher".
CoefficientPolynomial sample_kac(const EnsembleSpec& spec, RngStream& rng);

struct TridiagonalMatrix {
    Eigen::VectorXd diagonal;
    Eigen::VectorXd offdiagonal;

    Index size() const { return diagonal.size(); }
    double norm_inf() const;
};

/// Tridiagonal beta-Hermite model scaled so the spectrum fills [-2, 2].
TridiagonalMatrix sample_beta_tridiag(int n, int beta, RngStream& rng);

/// All eigenvalues, ascending, by Sturm-count bisection.
ZeroConfiguration eigenvalues_sturm(const TridiagonalMatrix& t);

/// Number of eigenvalues strictly less than x.
Index sturm_count(const TridiagonalMatrix& t, double x);

double semicircle_cdf(double x);

} // namespace rootlab
