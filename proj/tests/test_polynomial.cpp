#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "rootlab/polynomial.hpp"
#include "rootlab/rng.hpp"

using namespace rootlab;
using Catch::Approx;

namespace {

ComplexVector cv(std::initializer_list<Complex> z)
{
    ComplexVector v(static_cast<Index>(z.size()));
    Index i = 0;
    for (const Complex& c : z) v[i++] = c;
    return v;
}

bool close(Complex a, Complex b, double tol) { return std::abs(a - b) <= tol; }

} // namespace

TEST_CASE("ZeroConfiguration validates its bound", "[polynomial]")
{
    CHECK_THROWS_AS(ZeroConfiguration(ComplexVector(0), 0.0), DomainError);
    CHECK_THROWS_AS(ZeroConfiguration(cv({{0.0, 0.5}}), 0.1), DomainError);
    CHECK_THROWS_AS(ZeroConfiguration(cv({{1.0, 0.0}}), -1.0), DomainError);
    CHECK_THROWS_AS(ZeroConfiguration(cv({{std::nan(""), 0.0}}), 1.0), DomainError);

    const ZeroConfiguration z(cv({{0.0, 1.0}, {3.0, -0.5}}), 1.0);
    CHECK(z.size() == 2);
    CHECK(z.scale() == Approx(std::abs(Complex(3.0, -0.5))));
    CHECK(z.max_abs_imag() == 1.0);
    CHECK_FALSE(z.is_real());

    const auto t = ZeroConfiguration::tight(cv({{0.0, 0.25}, {1.0, -0.5}}));
    CHECK(t.im_bound() == 0.5);
    const auto r = ZeroConfiguration::real(Eigen::VectorXd::LinSpaced(3, -1.0, 1.0));
    CHECK(r.is_real());
    CHECK(r.scale() == 1.0);
}

TEST_CASE("coeffs_from_roots examples", "[polynomial]")
{
    SECTION("{1, -1} -> z^2 - 1")
    {
        const auto p = coeffs_from_roots(ZeroConfiguration::real(Eigen::Vector2d(1.0, -1.0)));
        REQUIRE(p.degree() == 2);
        CHECK(close(p[0], -1.0, 1e-15));
        CHECK(close(p[1], 0.0, 1e-15));
        CHECK(close(p[2], 1.0, 0.0));
    }
    SECTION("{0, 0, 0} -> z^3")
    {
        const auto p = coeffs_from_roots(ZeroConfiguration::real(Eigen::Vector3d::Zero()));
        REQUIRE(p.degree() == 3);
        for (Index i = 0; i < 3; ++i) CHECK(p[i] == Complex(0.0, 0.0));
        CHECK(p[3] == Complex(1.0, 0.0));
    }
    SECTION("{1, 2, 3} matches the symbolic expansion")
    {
        // (z-1)(z-2)(z-3) by Vieta: e1 = 6, e2 = 11, e3 = 6.
        const double e1 = 1 + 2 + 3, e2 = 1 * 2 + 1 * 3 + 2 * 3, e3 = 1 * 2 * 3;
        const auto p = coeffs_from_roots(ZeroConfiguration::real(Eigen::Vector3d(1.0, 2.0, 3.0)));
        CHECK(close(p[0], -e3, 1e-13));
        CHECK(close(p[1], e2, 1e-13));
        CHECK(close(p[2], -e1, 1e-13));
        CHECK(close(p[3], 1.0, 0.0));
    }
}

TEST_CASE("coeffs_from_roots degree guard", "[polynomial]")
{
    const auto z = ZeroConfiguration::real(Eigen::VectorXd::Zero(10));
    CHECK_THROWS_AS(coeffs_from_roots(z, 9), DomainError);
    CHECK_NOTHROW(coeffs_from_roots(z, 10));
}

TEST_CASE("horner evaluation", "[polynomial]")
{
    const CoefficientPolynomial sq(cv({-1.0, 0.0, 1.0}));
    CHECK(close(horner_eval(sq, 2.0), 3.0, 1e-15));

    const CoefficientPolynomial cube(cv({0.0, 0.0, 0.0, 1.0}));
    CHECK(close(horner_eval(cube, Complex(0.0, 1.0)), Complex(0.0, -1.0), 1e-15));

    const CoefficientPolynomial p(cv({-6.0, 11.0, -6.0, 1.0}));
    CHECK(close(horner_eval(p, 2.0), 0.0, 1e-14));

    const auto [v, dv] = horner_eval_with_derivative(p, 4.0);
    CHECK(close(v, 64.0 - 96.0 + 44.0 - 6.0, 1e-12));
    CHECK(close(dv, 3.0 * 16.0 - 12.0 * 4.0 + 11.0, 1e-12));
}

TEST_CASE("differentiate examples", "[polynomial]")
{
    const auto d1 = differentiate(CoefficientPolynomial(cv({-1.0, 0.0, 1.0})));
    REQUIRE(d1.degree() == 1);
    CHECK(d1[0] == Complex(0.0));
    CHECK(d1[1] == Complex(2.0));

    const auto d2 = differentiate(CoefficientPolynomial(cv({0.0, 2.0, -3.0, 1.0})));
    REQUIRE(d2.degree() == 2);
    CHECK(d2[0] == Complex(2.0));
    CHECK(d2[1] == Complex(-6.0));
    CHECK(d2[2] == Complex(3.0));

    CHECK_THROWS_AS(differentiate(CoefficientPolynomial(cv({5.0}))), DomainError);
    CHECK_THROWS_AS(CoefficientPolynomial(cv({1.0, 0.0})), DomainError);
}

TEST_CASE("log_derivative_sums examples", "[polynomial]")
{
    const auto a = log_derivative_sums(ZeroConfiguration::real(Eigen::Vector2d(1.0, -1.0)), 0.0);
    CHECK(close(a.s1, 0.0, 1e-15));
    CHECK(close(a.s2, 2.0, 1e-15));

    const auto b = log_derivative_sums(ZeroConfiguration::real(Eigen::VectorXd::Zero(1)), 2.0);
    CHECK(close(b.s1, 0.5, 1e-15));
    CHECK(close(b.s2, 0.25, 1e-15));

    // 3x^2 - 6x + 2 = 0 by the quadratic formula.
    const double x = (6.0 + std::sqrt(36.0 - 24.0)) / 6.0;
    const auto c = log_derivative_sums(ZeroConfiguration::real(Eigen::Vector3d(0.0, 1.0, 2.0)), x);
    CHECK(std::abs(c.s1) < 1e-14);
}

TEST_CASE("log_derivative_sums rejects points on a zero", "[polynomial]")
{
    const auto z = ZeroConfiguration::real(Eigen::Vector2d(0.0, 1.0));
    CHECK_THROWS_AS(log_derivative_sums(z, 1.0), PoleProximityError);
    CHECK_THROWS_AS(log_derivative_sums(z, 1.0 + 1e-13), PoleProximityError);
    CHECK_NOTHROW(log_derivative_sums(z, 1.0 + 1e-9));
}

TEST_CASE("root representation round trips", "[polynomial][property]")
{
    for (int trial = 0; trial < 50; ++trial) {
        auto rng = rng_stream(11, static_cast<std::uint64_t>(trial), "roundtrip");
        const int n = 1 + static_cast<int>(rng() % 20);
        ComplexVector z(n);
        for (int j = 0; j < n; ++j) z[j] = std::polar(2.0 * rng.uniform(), 2.0 * std::numbers::pi * rng.uniform());
        const auto roots = ZeroConfiguration::tight(z);
        const auto p = coeffs_from_roots(roots);
        const double scale = std::pow(roots.scale(), n);

        for (int j = 0; j < n; ++j) REQUIRE(std::abs(horner_eval(p, z[j])) <= 1e-10 * scale);

        // Mean identity: sum of zeros = -(second-highest coefficient).
        const Complex sum = z.sum();
        REQUIRE(std::abs(sum + p[n - 1]) <= 1e-12 * std::max(1.0, std::abs(sum)) * n);

        const auto dp = differentiate(p);
        for (int k = 0; k < 20; ++k) {
            const Complex x(rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0));
            const Complex direct = horner_eval(dp, x);
            const Complex via_sums = log_derivative_sums(roots, x).s1 * eval_from_roots(roots, x);
            REQUIRE(std::abs(direct - via_sums) <= 1e-9 * std::max(1.0, std::abs(direct)));
            REQUIRE(std::abs(derivative_from_roots(roots, x) - direct) <= 1e-9 * std::max(1.0, std::abs(direct)));
        }
    }
}

TEST_CASE("derivative_from_roots at a zero", "[polynomial]")
{
    // p = z(z-1)(z-2): p'(0) = 2, p'(1) = -1.
    const auto z = ZeroConfiguration::real(Eigen::Vector3d(0.0, 1.0, 2.0));
    CHECK(close(derivative_from_roots(z, 0.0), 2.0, 1e-15));
    CHECK(close(derivative_from_roots(z, 1.0), -1.0, 1e-15));
}
