#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "rootlab/rng.hpp"
#include "rootlab/statistics.hpp"

using namespace rootlab;

namespace {

ComplexVector cv(std::initializer_list<Complex> z)
{
    ComplexVector v(static_cast<Index>(z.size()));
    Index i = 0;
    for (const Complex& c : z) v[i++] = c;
    return v;
}

// Composite Simpson for a real or complex integrand on [lo, hi].
template <typename F>
auto simpson(F f, double lo, double hi, int panels)
{
    const double h = (hi - lo) / panels;
    auto acc = f(lo) + f(hi);
    for (int j = 1; j < panels; ++j) acc += (j % 2 ? 4.0 : 2.0) * f(lo + j * h);
    return acc * (h / 3.0);
}

// Right-continuous empirical CDF, written without the library helpers.
double cdf_of(const std::vector<double>& s, double x)
{
    double c = 0.0;
    for (double v : s) c += v <= x ? 1.0 : 0.0;
    return c / static_cast<double>(s.size());
}

// Smallest eps on a grid such that the Levy inequalities hold on a dense x grid.
double levy_brute(const std::vector<double>& a, const std::vector<double>& b, double step)
{
    for (double eps = 0.0; eps <= 1.0 + 1e-12; eps += step) {
        bool ok = true;
        for (double x = -3.0; x <= 3.0 && ok; x += 1e-3) {
            const double fb = cdf_of(b, x);
            if (cdf_of(a, x - eps) - eps > fb + 1e-12 || fb > cdf_of(a, x + eps) + eps + 1e-12) ok = false;
        }
        if (ok) return eps;
    }
    return 1.0;
}

LinearStatisticRecord record(Index n, Index k, Complex v)
{
    LinearStatisticRecord r;
    r.n = n;
    r.k = k;
    r.value = v;
    return r;
}

} // namespace

TEST_CASE("test functions reconstruct from their Fourier density", "[statistics]")
{
    for (const auto& f : {TestFunction::gaussian(), TestFunction::poisson()}) {
        for (int i = 0; i <= 40; ++i) {
            const double x = -5.0 + 0.25 * i;
            const auto g = [&](double t) { return f.fourier_density(t) * std::exp(Complex(0.0, t * x)); };
            const Complex recon = simpson(g, -40.0, 0.0, 40000) + simpson(g, 0.0, 40.0, 40000);
            REQUIRE(std::abs(recon - f(x)) < 1e-8);
        }
    }
}

TEST_CASE("test function constants at C0 = 0", "[statistics]")
{
    const auto g = TestFunction::gaussian();
    CHECK(g.sup_bound() == Catch::Approx(1.0).margin(1e-12));
    CHECK(g.bound_integral(0.0) == Catch::Approx(1.0).margin(1e-10));
    CHECK(g.moment_integral(0.0) == Catch::Approx(std::sqrt(2.0 / std::numbers::pi)).margin(1e-10));

    const auto p = TestFunction::poisson();
    CHECK(p.bound_integral(0.0) == Catch::Approx(1.0).margin(1e-10));
    CHECK(p.moment_integral(0.0) == Catch::Approx(1.0).margin(1e-10));
    CHECK(std::abs(p(Complex(0.0, 0.0)) - 1.0) < 1e-15);

    CHECK_THROWS_AS(TestFunction::poisson(0.5), DomainError);
    CHECK_NOTHROW(TestFunction::poisson(0.3));
    CHECK_THROWS_AS(TestFunction::by_name("boxcar"), DomainError);
    CHECK(TestFunction::by_name("gauss", 1.0).strip() == 1.0);
}

TEST_CASE("scaling sequences and plans", "[statistics]")
{
    CHECK(ScalingSequence::parse("n")(7) == 7.0);
    CHECK(ScalingSequence::parse("sqrt(n)")(16) == 4.0);
    CHECK(ScalingSequence::parse("log(n)")(10) == Catch::Approx(std::log(10.0)));
    CHECK(ScalingSequence::parse("2.5")(99) == 2.5);
    CHECK_THROWS_AS(ScalingSequence::parse("n^2"), DomainError);
    CHECK_THROWS_AS(ScalingSequence::parse("-1"), DomainError);

    CHECK(ScalingPlan::parse({"a=n"}).mode() == AssumptionMode::A2);
    CHECK(ScalingPlan::parse({"b=sqrt(n)"}).mode() == AssumptionMode::A3);
    CHECK(ScalingPlan::parse({"a=n", "b=n"}).mode() == AssumptionMode::A4);
    CHECK_THROWS_AS(ScalingPlan::parse({"a=n"}, AssumptionMode::A3), MissingScalingError);
    CHECK_THROWS_AS(ScalingPlan::parse({}), DomainError);
}

TEST_CASE("linear_statistic examples", "[statistics]")
{
    const auto f = TestFunction::gaussian();
    const auto a_n = ScalingPlan::parse({"a=n"});
    CHECK(std::abs(linear_statistic(ZeroConfiguration::real(Eigen::Vector2d::Zero()), f, a_n, 1, 2, 0) - 1.0) < 1e-15);

    const auto level = ZeroConfiguration::real(Eigen::Vector3d(0.0, 1.0, 2.0));
    const auto b1 = ScalingPlan::parse({"b=1"});
    const Complex l2 = linear_statistic(level, f, b1, 2, 3, 0);
    CHECK(std::abs(l2 - (1.0 + std::exp(-0.5) + std::exp(-2.0))) < 1e-15);
    CHECK(std::abs(l2 - 1.74187) < 1e-5);

    const auto both = ScalingPlan::parse({"a=1", "b=1"});
    CHECK(linear_statistic(level, f, both, 3, 3, 0) == l2);

    // The plan is evaluated at n - k.
    const Complex l1 = linear_statistic(level, f, a_n, 1, 4, 1);
    CHECK(std::abs(l1 - l2 / 3.0) < 1e-15);

    CHECK_THROWS_AS(linear_statistic(level, f, a_n, 2, 3, 0), MissingScalingError);
    CHECK_THROWS_AS(linear_statistic(level, f, a_n, 1, 5, 0), DomainError);
    CHECK_THROWS_AS(linear_statistic(level, f, a_n, 4, 3, 0), DomainError);
}

TEST_CASE("empirical centering", "[statistics]")
{
    std::vector<LinearStatisticRecord> reference{record(10, 0, 3.0), record(10, 0, 3.0), record(10, 1, 2.0),
                                                 record(10, 1, 4.0)};
    const auto out = center_empirical({record(10, 0, 3.0), record(10, 1, 5.0)}, reference);
    CHECK(out[0].value == Complex(0.0));
    CHECK(out[0].centered);
    CHECK(*out[0].center == Complex(3.0));
    CHECK(out[1].value == Complex(2.0));

    // Matching is on (n, k, ell).
    CHECK_THROWS_AS(center_empirical({record(20, 0, 1.0)}, reference), InsufficientReplicasError);
    const std::vector<LinearStatisticRecord> single{record(10, 0, 3.0)};
    CHECK_THROWS_AS(center_empirical({record(10, 0, 3.0)}, single), InsufficientReplicasError);
}

TEST_CASE("expected value against an independent quadrature", "[statistics]")
{
    const auto f = TestFunction::gaussian();
    const double oracle = 0.5 * simpson([](double x) { return std::exp(-0.5 * x * x); }, -1.0, 1.0, 2000);
    const Complex e = expected_value(Law::parse("uniform[-1,1]"), f, 1.0);
    CHECK(std::abs(e - oracle) < 1e-12);
    CHECK(std::abs(e - 0.85562) < 1e-5);

    // Circle: mean of exp(-e^{2i theta}/2) over theta is 1.
    CHECK(std::abs(expected_value(Law::parse("circle"), f, 1.0) - 1.0) < 1e-12);
    // Standard normal: E exp(-Z^2/2) = 1/sqrt(2).
    CHECK(std::abs(expected_value(Law::parse("gauss"), f, 1.0) - 1.0 / std::sqrt(2.0)) < 1e-10);
    CHECK(std::abs(expected_value(Law::parse("rademacher(jitter=0)"), f, 2.0) - std::exp(-0.125)) < 1e-15);
    CHECK_THROWS_AS(expected_value(Law::parse("cauchy"), f, 1.0), UnknownLawError);
}

TEST_CASE("analytic and empirical centers agree", "[statistics]")
{
    const auto f = TestFunction::gaussian();
    const auto plan = ScalingPlan::parse({"a=sqrt(n)"});
    const int n = 50, m = 200;
    double sum = 0.0, sum2 = 0.0;
    for (int r = 0; r < m; ++r) {
        auto rng = rng_stream(51, static_cast<std::uint64_t>(r), "zeros");
        Eigen::VectorXd x(n);
        for (int j = 0; j < n; ++j) x[j] = rng.uniform(-1.0, 1.0);
        const double v = linear_statistic(ZeroConfiguration::real(x), f, plan, 1, n, 0).real();
        sum += v;
        sum2 += v * v;
    }
    const double mean = sum / m;
    const double stderr_ = std::sqrt((sum2 / m - mean * mean) / (m - 1));
    const auto analytic = center_analytic({record(n, 0, 0.0)}, Law::parse("uniform[-1,1]"), f, plan);
    CHECK(std::abs(analytic[0].center->real() - mean) < 3.0 * stderr_);
    CHECK_THROWS_AS(center_analytic({record(n, 1, 0.0)}, Law::parse("uniform[-1,1]"), f, plan), DomainError);
}

TEST_CASE("theorem1_bound examples", "[statistics]")
{
    const auto f = TestFunction::gaussian();
    const auto plan = ScalingPlan::parse({"a=n"});
    const auto roots = ZeroConfiguration::real(Eigen::Vector3d(0.0, 1.0, 2.0));
    // 1/3 + 3 * 1/(2 * 3) + sqrt(2/pi) (|0| + 1) / 2
    const double expected = 1.0 / 3.0 + 0.5 + std::sqrt(2.0 / std::numbers::pi) * 0.5;
    const double bound = theorem1_bound(roots, f, plan, 3);
    CHECK(std::abs(bound - expected) < 1e-10);

    const auto tower = derivative_tower(roots, 1);
    const Complex diff = linear_statistic(roots, f, plan, 1, 3, 0) - linear_statistic(tower.level(1), f, plan, 1, 3, 1);
    CHECK(std::abs(diff) <= bound);
    CHECK(telescoped_bound(tower, f, plan, 1) == bound);
    CHECK(telescoped_bound(tower, f, plan, 0) == 0.0);

    const auto flat = ZeroConfiguration::real(Eigen::VectorXd::Constant(5, 0.7));
    const auto flat_tower = derivative_tower(flat, 1);
    const Complex flat_diff =
        linear_statistic(flat, f, plan, 1, 5, 0) - linear_statistic(flat_tower.level(1), f, plan, 1, 5, 1);
    CHECK(std::abs(flat_diff) <= theorem1_bound(flat, f, plan, 5));

    CHECK_THROWS_AS(theorem1_bound(roots, f, ScalingPlan::parse({"b=n"}), 3), DomainError);
    CHECK_THROWS_AS(theorem1_bound(ZeroConfiguration(cv({Complex(0.0, 1.0), 1.0}), 1.0), f, plan, 2), DomainError);
}

TEST_CASE("check_assumptions examples", "[statistics]")
{
    std::vector<ZeroConfiguration> samples;
    for (int n : {100, 200, 400}) {
        auto rng = rng_stream(52, static_cast<std::uint64_t>(n), "zeros");
        Eigen::VectorXd x(n);
        for (int j = 0; j < n; ++j) x[j] = rng.uniform(-1.0, 1.0);
        samples.push_back(ZeroConfiguration::real(x));
    }

    const auto a2 = check_assumptions(ScalingPlan::parse({"a=n"}), samples, 1);
    bool seen = false;
    for (const auto& s : a2.series) {
        if (s.expression == "an2" && s.k == 1) {
            CHECK(std::abs(s.value[0] - 100.0 / (99.0 * 98.0)) < 1e-15);
            seen = true;
        }
        if (s.expression == "remark1") CHECK_FALSE(s.required);
    }
    CHECK(seen);
    CHECK(a2.passed());

    const auto a3 = check_assumptions(ScalingPlan::parse({"b=sqrt(n)"}), samples, 1, 1.0);
    for (const auto& s : a3.series) {
        if (s.expression != "bn3") continue;
        for (std::size_t i = 0; i < s.n.size(); ++i) REQUIRE(s.value[i] <= 1.0 / std::sqrt(double(s.n[i] - s.k)));
        CHECK(s.value.back() < s.value.front());
        CHECK(s.trend_ok);
    }

    const auto flat = check_assumptions(ScalingPlan::parse({"a=5"}), samples, 0);
    CHECK(flat.series.front().expression == "an1");
    CHECK_FALSE(flat.series.front().trend_ok);
    CHECK_FALSE(flat.passed());

    samples.pop_back();
    CHECK_THROWS_AS(check_assumptions(ScalingPlan::parse({"a=n"}), samples, 0), DomainError);
}

TEST_CASE("kolmogorov distance examples", "[statistics]")
{
    const auto unif = [](double x) { return std::clamp(x, 0.0, 1.0); };
    const std::vector<double> half{0.5};
    CHECK(kolmogorov_distance(half, unif) == 0.5);

    const int m = 100;
    std::vector<double> q;
    for (int i = 1; i <= m; ++i) q.push_back((i - 0.5) / m);
    CHECK(kolmogorov_distance(q, unif) <= 0.5 / m + 1e-15);
    CHECK_THROWS_AS(kolmogorov_distance(std::vector<double>{}, unif), DomainError);
}

TEST_CASE("levy distance examples", "[statistics]")
{
    const std::vector<double> a{0.1, -0.4, 0.7, 0.7};
    CHECK(levy_distance(a, a) == 0.0);

    // A unit jump one apart: F_a(x - eps) - eps <= F_b(x) fails at x = eps for every eps < 1.
    const std::vector<double> zero{0.0}, one{1.0};
    CHECK(std::abs(levy_distance(zero, one) - 1.0) < 1e-8);
    CHECK(std::abs(levy_brute(zero, one, 1e-3) - 1.0) < 2e-3);

    const std::vector<double> shifted{0.25};
    CHECK(std::abs(levy_distance(zero, shifted) - 0.25) < 1e-8);
}

TEST_CASE("levy distance matches brute force and is below the sup distance", "[statistics][property]")
{
    for (int trial = 0; trial < 12; ++trial) {
        auto rng = rng_stream(53, static_cast<std::uint64_t>(trial), "levy");
        std::vector<double> a, b;
        const int na = 1 + static_cast<int>(rng() % 6), nb = 1 + static_cast<int>(rng() % 6);
        for (int i = 0; i < na; ++i) a.push_back(rng.uniform(-1.0, 1.0));
        for (int i = 0; i < nb; ++i) b.push_back(rng.uniform(-1.0, 1.0));
        const double l = levy_distance(a, b);
        REQUIRE(std::abs(l - levy_brute(a, b, 1e-3)) < 3e-3);
        REQUIRE(l <= sup_distance(a, b) + 1e-9);
    }
}

TEST_CASE("hull_contains examples", "[statistics]")
{
    CHECK(hull_contains(ZeroConfiguration::real(Eigen::Vector2d(-1.0, 1.0)), ZeroConfiguration::real(Eigen::VectorXd::Zero(1)),
                        1e-12));

    ComplexVector tri(3);
    for (int j = 0; j < 3; ++j) tri[j] = std::polar(1.0, 2.0 * std::numbers::pi * j / 3.0);
    const auto outer = ZeroConfiguration(tri, 1.0);
    CHECK(hull_contains(outer, ZeroConfiguration(cv({0.0, 0.0}), 0.0), 1e-12));

    // The left edge is the vertical line Re z = -1/2.
    const double tol = 1e-6;
    CHECK_FALSE(hull_contains(outer, ZeroConfiguration(cv({Complex(-0.5 - 2.0 * tol, 0.0)}), 0.0), tol));
    CHECK(hull_contains(outer, ZeroConfiguration(cv({Complex(-0.5 - 0.5 * tol, 0.0)}), 0.0), tol));

    const auto segment = ZeroConfiguration::real(Eigen::Vector3d(-1.0, 0.0, 1.0));
    CHECK_FALSE(hull_contains(segment, ZeroConfiguration(cv({Complex(0.0, 0.1)}), 0.1), 1e-3));
    CHECK_FALSE(hull_contains(segment, ZeroConfiguration::real(Eigen::VectorXd::Constant(1, 1.1)), 1e-3));
}
