#include "rootlab/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <tuple>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace rootlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <typename F>
auto integrate(F f, double lo, double hi)
{
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, lo, hi, 20, 1e-13);
}

double psi(double c0, double t)
{
    const double at = std::abs(t);
    return c0 > 0.0 ? std::expm1(2.0 * c0 * at) / (2.0 * c0) : at;
}

// max over x of g(x), grid search followed by golden-section refinement.
double maximize_on_line(const std::function<double(double)>& g, double lo, double hi)
{
    constexpr int kGrid = 4000;
    const double h = (hi - lo) / kGrid;
    int best = 0;
    double best_val = g(lo);
    for (int i = 1; i <= kGrid; ++i) {
        const double v = g(lo + i * h);
        if (v > best_val) {
            best_val = v;
            best = i;
        }
    }
    double a = lo + (best - 1) * h;
    double b = lo + (best + 1) * h;
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 100; ++it) {
        const double c = b - phi * (b - a);
        const double d = a + phi * (b - a);
        if (g(c) > g(d))
            b = d;
        else
            a = c;
    }
    return std::max(best_val, g(0.5 * (a + b)));
}

} // namespace

TestFunction::TestFunction(std::string name, std::function<Complex(Complex)> eval,
                           std::function<Complex(double)> density, double strip, double sup_bound,
                           double deriv_bound, double admissible)
    : name_(std::move(name)), eval_(std::move(eval)), density_(std::move(density)), strip_(strip),
      sup_bound_(sup_bound), deriv_bound_(deriv_bound), admissible_(admissible)
{
    bound_integral_ = bound_integral(strip_);
    moment_integral_ = moment_integral(strip_);
}

TestFunction TestFunction::gaussian(double strip)
{
    if (!(strip >= 0.0)) throw DomainError("TestFunction: strip half-width must be non-negative");
    const double c2 = strip * strip;
    const double deriv = strip < 1.0 ? std::exp(c2 - 0.5) : strip * std::exp(0.5 * c2);
    return TestFunction(
        "gauss", [](Complex z) { return std::exp(-0.5 * z * z); },
        [](double t) { return Complex(std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi), 0.0); }, strip,
        std::exp(0.5 * c2), deriv, kInf);
}

TestFunction TestFunction::poisson(double strip)
{
    if (!(strip >= 0.0)) throw DomainError("TestFunction: strip half-width must be non-negative");
    if (!(3.0 * strip < 1.0))
        throw DomainError("TestFunction: poisson admitted only when 3 C0 < 1 (C0 = " + std::to_string(strip) + ")");
    // |f'| is maximal on the boundary lines of the strip.
    const auto dabs = [strip](double x) {
        const Complex z(x, strip);
        const Complex w = 1.0 + z * z;
        return std::abs(2.0 * z / (w * w));
    };
    const double deriv = maximize_on_line(dabs, -8.0, 8.0);
    return TestFunction(
        "poisson", [](Complex z) { return 1.0 / (1.0 + z * z); },
        [](double t) { return Complex(0.5 * std::exp(-std::abs(t)), 0.0); }, strip, 1.0 / (1.0 - strip * strip),
        deriv, 1.0 / 3.0);
}

TestFunction TestFunction::by_name(std::string_view name, double strip)
{
    if (name == "gauss") return gaussian(strip);
    if (name == "poisson") return poisson(strip);
    throw DomainError("unknown test function '" + std::string(name) + "'");
}

double TestFunction::bound_integral(double c0) const
{
    if (c0 >= admissible_) return kInf;
    const auto g = [&](double t) {
        const double a = std::abs(density_(t));
        return a == 0.0 ? 0.0 : a * std::exp(3.0 * c0 * t);
    };
    return 2.0 * integrate(g, 0.0, kInf);
}

double TestFunction::moment_integral(double c0) const
{
    if (c0 >= admissible_) return kInf;
    const auto g = [&](double t) {
        const double a = std::abs(density_(t));
        return a == 0.0 ? 0.0 : a * psi(c0, t) * std::exp(c0 * t);
    };
    return 2.0 * integrate(g, 0.0, kInf);
}

std::string to_string(AssumptionMode mode)
{
    switch (mode) {
    case AssumptionMode::A2: return "A2";
    case AssumptionMode::A3: return "A3";
    case AssumptionMode::A4: return "A4";
    }
    return "?";
}

AssumptionMode parse_assumption_mode(std::string_view text)
{
    if (text == "A2" || text == "a2") return AssumptionMode::A2;
    if (text == "A3" || text == "a3") return AssumptionMode::A3;
    if (text == "A4" || text == "a4") return AssumptionMode::A4;
    throw DomainError("unknown assumption mode '" + std::string(text) + "'");
}

ScalingSequence ScalingSequence::parse(std::string_view expr)
{
    const std::string e(expr);
    if (e == "n") return ScalingSequence(e, [](double n) { return n; });
    if (e == "sqrt(n)") return ScalingSequence(e, [](double n) { return std::sqrt(n); });
    if (e == "log(n)") return ScalingSequence(e, [](double n) { return std::log(n); });
    double value = 0.0;
    try {
        std::size_t used = 0;
        value = std::stod(e, &used);
        if (used != e.size()) throw std::invalid_argument(e);
    } catch (const std::exception&) {
        throw DomainError("unknown scaling sequence '" + e + "'");
    }
    if (!(value > 0.0)) throw DomainError("scaling constant must be positive: '" + e + "'");
    return ScalingSequence(e, [value](double) { return value; });
}

double ScalingSequence::operator()(Index n) const
{
    const double v = fn_(static_cast<double>(n));
    if (!(v > 0.0) || !std::isfinite(v))
        throw DomainError("scaling sequence " + expr_ + " is not positive at n = " + std::to_string(n));
    return v;
}

ScalingPlan::ScalingPlan(std::optional<ScalingSequence> a, std::optional<ScalingSequence> b,
                         std::optional<AssumptionMode> mode)
    : a_(std::move(a)), b_(std::move(b))
{
    if (!a_ && !b_) throw DomainError("ScalingPlan: need at least one of a_n, b_n");
    if (mode) {
        mode_ = *mode;
    } else {
        mode_ = a_ && b_ ? AssumptionMode::A4 : (a_ ? AssumptionMode::A2 : AssumptionMode::A3);
    }
    if ((mode_ == AssumptionMode::A2 || mode_ == AssumptionMode::A4) && !a_)
        throw MissingScalingError("ScalingPlan: mode " + to_string(mode_) + " needs a_n");
    if ((mode_ == AssumptionMode::A3 || mode_ == AssumptionMode::A4) && !b_)
        throw MissingScalingError("ScalingPlan: mode " + to_string(mode_) + " needs b_n");
}

ScalingPlan ScalingPlan::parse(const std::vector<std::string>& tokens, std::optional<AssumptionMode> mode)
{
    std::optional<ScalingSequence> a;
    std::optional<ScalingSequence> b;
    for (const std::string& tok : tokens) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) throw DomainError("malformed scaling token '" + tok + "'");
        const std::string key = tok.substr(0, eq);
        const std::string expr = tok.substr(eq + 1);
        if (key == "a")
            a = ScalingSequence::parse(expr);
        else if (key == "b")
            b = ScalingSequence::parse(expr);
        else
            throw DomainError("unknown scaling key '" + key + "'");
    }
    return ScalingPlan(std::move(a), std::move(b), mode);
}

double ScalingPlan::a(Index n) const
{
    if (!a_) throw MissingScalingError("scaling plan has no a_n");
    return (*a_)(n);
}

double ScalingPlan::b(Index n) const
{
    if (!b_) throw MissingScalingError("scaling plan has no b_n");
    return (*b_)(n);
}

std::string ScalingPlan::describe() const
{
    std::string out = to_string(mode_);
    if (a_) out += " a=" + a_->expr();
    if (b_) out += " b=" + b_->expr();
    return out;
}

Complex linear_statistic(const ZeroConfiguration& level, const TestFunction& f, const ScalingPlan& plan, int ell,
                         Index n, Index k)
{
    if (ell < 1 || ell > 3) throw DomainError("linear_statistic: ell must be 1, 2 or 3");
    if (k < 0 || level.size() != n - k)
        throw DomainError("linear_statistic: level has " + std::to_string(level.size()) + " points, expected n - k = " +
                          std::to_string(n - k));
    const Index m = n - k;
    const double outer = ell == 2 ? 1.0 : plan.a(m);
    const double inner = ell == 1 ? 1.0 : plan.b(m);
    Complex sum = 0.0;
    for (Index j = 0; j < level.size(); ++j) sum += f(level[j] / inner);
    return sum / outer;
}

std::vector<LinearStatisticRecord> center_empirical(std::vector<LinearStatisticRecord> target,
                                                    std::span<const LinearStatisticRecord> reference)
{
    std::map<std::tuple<Index, Index, int>, std::pair<Complex, int>> acc;
    for (const auto& r : reference) {
        auto& slot = acc[{r.n, r.k, r.ell}];
        slot.first += r.value;
        ++slot.second;
    }
    for (auto& r : target) {
        const auto it = acc.find({r.n, r.k, r.ell});
        if (it == acc.end() || it->second.second < 2)
            throw InsufficientReplicasError("center_empirical: fewer than 2 reference replicas for n = " +
                                            std::to_string(r.n) + ", k = " + std::to_string(r.k));
        const Complex center = it->second.first / static_cast<double>(it->second.second);
        r.value -= center;
        r.center = center;
        r.centered = true;
    }
    return target;
}

Complex expected_value(const Law& law, const TestFunction& f, double scale)
{
    const std::string& name = law.name;
    if (name == "circle") {
        const auto g = [&](double th) { return f(std::polar(1.0, th) / scale); };
        return integrate(g, 0.0, 2.0 * std::numbers::pi) / (2.0 * std::numbers::pi);
    }
    if (name == "uniform[-1,1]") {
        const auto g = [&](double x) { return f(Complex(x / scale, 0.0)); };
        return 0.5 * integrate(g, -1.0, 1.0);
    }
    if (name == "gauss") {
        const auto g = [&](double x) {
            return f(Complex(x / scale, 0.0)) * (std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi));
        };
        return integrate(g, -kInf, kInf);
    }
    if (name == "rademacher") {
        const double jitter = law.param("jitter", 1e-6);
        if (jitter <= 0.0) return 0.5 * (f(Complex(1.0 / scale, 0.0)) + f(Complex(-1.0 / scale, 0.0)));
        Complex total = 0.0;
        for (double sign : {-1.0, 1.0}) {
            const auto g = [&](double u) { return f(Complex((sign + u) / scale, 0.0)); };
            total += integrate(g, -jitter, jitter) / (2.0 * jitter);
        }
        return 0.5 * total;
    }
    throw UnknownLawError("expected_value: no quadrature rule for law '" + name + "'");
}

std::vector<LinearStatisticRecord> center_analytic(std::vector<LinearStatisticRecord> records, const Law& law,
                                                   const TestFunction& f, const ScalingPlan& plan)
{
    std::map<std::pair<Index, int>, Complex> cache;
    for (auto& r : records) {
        if (r.k != 0)
            throw DomainError("center_analytic: expectation is only available for the zeros themselves (k = 0)");
        auto it = cache.find({r.n, r.ell});
        if (it == cache.end()) {
            const double outer = r.ell == 2 ? 1.0 : plan.a(r.n);
            const double inner = r.ell == 1 ? 1.0 : plan.b(r.n);
            const Complex center = static_cast<double>(r.n) * expected_value(law, f, inner) / outer;
            it = cache.emplace(std::pair{r.n, r.ell}, center).first;
        }
        r.value -= it->second;
        r.center = it->second;
        r.centered = true;
    }
    return records;
}

double theorem1_bound(const ZeroConfiguration& roots, const TestFunction& f, const ScalingPlan& plan, Index n)
{
    if (plan.mode() != AssumptionMode::A2) throw DomainError("theorem1_bound: plan must be in mode A2");
    if (roots.size() != n) throw DomainError("theorem1_bound: configuration size differs from n");
    if (n < 2) throw DomainError("theorem1_bound: need n >= 2");
    const double c0 = roots.im_bound();
    if (c0 > f.strip() + ZeroConfiguration::kImSlack * roots.scale())
        throw DomainError("theorem1_bound: test function is certified on a narrower strip than the zeros occupy");

    const double an = plan.a(n);
    const double an1 = plan.a(n - 1);
    const double sup = f.sup_bound();
    const double moment = c0 == f.strip() ? f.moment_integral() : f.moment_integral(c0);
    const double w1 = sup / an + static_cast<double>(n) * std::abs(an1 - an) * sup / (an1 * an);
    const double w2 = moment * (std::abs(roots[0]) + roots.mean_abs()) / an1;
    return w1 + w2;
}

double telescoped_bound(const DerivativeTower& tower, const TestFunction& f, const ScalingPlan& plan, Index k)
{
    if (k > tower.depth()) throw DomainError("telescoped_bound: k exceeds tower depth");
    double total = 0.0;
    const Index n = tower.source_n();
    for (Index j = 0; j < k; ++j) total += theorem1_bound(tower.level(static_cast<int>(j)), f, plan, n - j);
    return total;
}

bool AssumptionReport::passed() const
{
    for (const auto& s : series)
        if (s.required && !s.trend_ok) return false;
    return true;
}

AssumptionReport check_assumptions(const ScalingPlan& plan, std::span<const ZeroConfiguration> samples, Index k_max,
                                   double threshold)
{
    std::vector<const ZeroConfiguration*> sorted;
    for (const auto& s : samples) sorted.push_back(&s);
    std::sort(sorted.begin(), sorted.end(), [](auto* x, auto* y) { return x->size() < y->size(); });
    Index distinct = 0;
    for (std::size_t i = 0; i < sorted.size(); ++i)
        if (i == 0 || sorted[i]->size() != sorted[i - 1]->size()) ++distinct;
    if (distinct < 3) throw DomainError("check_assumptions: grid too short (need at least 3 values of n)");
    if (k_max < 0 || k_max + 2 > sorted.front()->size())
        throw DomainError("check_assumptions: k_max must satisfy k_max + 2 <= min n");

    AssumptionReport report{plan.mode(), threshold, {}};

    auto add = [&](std::string expr, Index k, bool required, auto&& value_at) {
        AssumptionSeries s;
        s.expression = std::move(expr);
        s.k = k;
        s.required = required;
        for (const ZeroConfiguration* z : sorted) {
            s.n.push_back(z->size());
            s.value.push_back(value_at(*z, z->size()));
        }
        const double first = s.value.front();
        const double last = s.value.back();
        s.trend_ok = (last < first || last == 0.0) && last < threshold;
        report.series.push_back(std::move(s));
    };

    const auto sup_abs = [](const ZeroConfiguration& z) { return z.zeros().cwiseAbs().maxCoeff(); };
    const auto sum_abs = [](const ZeroConfiguration& z) { return z.zeros().cwiseAbs().sum(); };

    switch (plan.mode()) {
    case AssumptionMode::A2:
        add("an1", 0, true, [&](const ZeroConfiguration&, Index n) { return 1.0 / plan.a(n); });
        for (Index k = 0; k <= k_max; ++k) {
            add("an2", k, true, [&](const ZeroConfiguration&, Index n) {
                const double x = plan.a(n - k);
                const double y = plan.a(n - k - 1);
                return static_cast<double>(n) * std::abs(x - y) / (x * y);
            });
            add("an3", k, true, [&](const ZeroConfiguration& z, Index n) { return sup_abs(z) / plan.a(n - k); });
            add("remark1", k, false, [&](const ZeroConfiguration& z, Index n) {
                return sum_abs(z) / (plan.a(n - k) * static_cast<double>(n));
            });
        }
        break;
    case AssumptionMode::A3:
        add("bn1", 0, true, [&](const ZeroConfiguration&, Index n) { return 1.0 / plan.b(n); });
        for (Index k = 0; k <= k_max; ++k) {
            add("bn2", k, true, [&](const ZeroConfiguration& z, Index n) {
                const double x = plan.b(n - k);
                const double y = plan.b(n - k - 1);
                return std::abs(x - y) / (x * y) * sum_abs(z);
            });
            add("bn3", k, true, [&](const ZeroConfiguration& z, Index n) { return sup_abs(z) / plan.b(n - k); });
        }
        break;
    case AssumptionMode::A4:
        add("anbn1", 0, true, [&](const ZeroConfiguration&, Index n) { return 1.0 / std::min(plan.a(n), plan.b(n)); });
        for (Index k = 0; k <= k_max; ++k) {
            add("anbn2", k, true, [&](const ZeroConfiguration& z, Index n) {
                const double x = plan.b(n - k);
                const double y = plan.b(n - k - 1);
                return std::abs(x - y) / (plan.a(n - k - 1) * x * y) * sum_abs(z);
            });
            add("anbn3", k, true, [&](const ZeroConfiguration& z, Index n) {
                return sup_abs(z) / (plan.a(n - k) * plan.b(n - k));
            });
        }
        break;
    }
    return report;
}

double kolmogorov_distance(std::span<const double> sample, const std::function<double(double)>& cdf)
{
    if (sample.empty()) throw DomainError("kolmogorov_distance: empty sample");
    std::vector<double> x(sample.begin(), sample.end());
    std::sort(x.begin(), x.end());
    const double m = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double f = cdf(x[i]);
        d = std::max({d, std::abs(static_cast<double>(i + 1) / m - f), std::abs(static_cast<double>(i) / m - f)});
    }
    return d;
}

namespace {

// Right-continuous empirical CDF of a sorted sample.
double ecdf(const std::vector<double>& sorted, double x)
{
    const auto it = std::upper_bound(sorted.begin(), sorted.end(), x);
    return static_cast<double>(it - sorted.begin()) / static_cast<double>(sorted.size());
}

std::vector<double> sorted_copy(std::span<const double> s, const char* who)
{
    if (s.empty()) throw DomainError(std::string(who) + ": empty sample");
    std::vector<double> out(s.begin(), s.end());
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace

double sup_distance(std::span<const double> a_in, std::span<const double> b_in)
{
    const auto a = sorted_copy(a_in, "sup_distance");
    const auto b = sorted_copy(b_in, "sup_distance");
    double d = 0.0;
    for (double x : a) d = std::max(d, std::abs(ecdf(a, x) - ecdf(b, x)));
    for (double x : b) d = std::max(d, std::abs(ecdf(a, x) - ecdf(b, x)));
    return d;
}

double levy_distance(std::span<const double> a_in, std::span<const double> b_in)
{
    const auto a = sorted_copy(a_in, "levy_distance");
    const auto b = sorted_copy(b_in, "levy_distance");

    // Both step differences are piecewise constant between breakpoints, so
    // checking right-continuous values at every breakpoint covers all x.
    const auto feasible = [&](double eps) {
        for (double x : b) {
            if (ecdf(b, x) > ecdf(a, x + eps) + eps) return false;
            if (ecdf(a, x - eps) - eps > ecdf(b, x)) return false;
        }
        for (double y : a) {
            const double x_hi = y - eps;  // F_a(x + eps) jumps here
            if (ecdf(b, x_hi) > ecdf(a, y) + eps) return false;
            const double x_lo = y + eps;  // F_a(x - eps) jumps here
            if (ecdf(a, y) - eps > ecdf(b, x_lo)) return false;
        }
        return true;
    };

    double lo = 0.0;
    double hi = 1.0;
    if (feasible(0.0)) return 0.0;
    while (hi - lo > 1e-9) {
        const double mid = 0.5 * (lo + hi);
        if (feasible(mid))
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

namespace {

double cross(Complex o, Complex a, Complex b)
{
    return (a.real() - o.real()) * (b.imag() - o.imag()) - (a.imag() - o.imag()) * (b.real() - o.real());
}

double segment_distance(Complex p, Complex a, Complex b)
{
    const Complex ab = b - a;
    const double len2 = std::norm(ab);
    if (len2 == 0.0) return std::abs(p - a);
    double s = ((p - a) * std::conj(ab)).real() / len2;
    s = std::clamp(s, 0.0, 1.0);
    return std::abs(p - (a + s * ab));
}

} // namespace

bool hull_contains(const ZeroConfiguration& outer, const ZeroConfiguration& inner, double tol)
{
    std::vector<Complex> pts(outer.zeros().begin(), outer.zeros().end());
    std::sort(pts.begin(), pts.end(), [](Complex a, Complex b) {
        return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
    });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

    // Andrew's monotone chain, counter-clockwise, collinear points dropped.
    std::vector<Complex> hull;
    if (pts.size() >= 3) {
        hull.resize(2 * pts.size());
        std::size_t k = 0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
            hull[k++] = pts[i];
        }
        for (std::size_t i = pts.size() - 1, t = k + 1; i > 0; --i) {
            while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i - 1]) <= 0.0) --k;
            hull[k++] = pts[i - 1];
        }
        hull.resize(k - 1);
    }

    for (Index j = 0; j < inner.size(); ++j) {
        const Complex p = inner[j];
        if (hull.size() < 3) {
            // Point or segment hull: extreme points of the sorted set.
            if (segment_distance(p, pts.front(), pts.back()) > tol) return false;
            continue;
        }
        bool inside = true;
        double nearest = std::numeric_limits<double>::infinity();
        for (std::size_t e = 0; e < hull.size(); ++e) {
            const Complex a = hull[e];
            const Complex b = hull[(e + 1) % hull.size()];
            if (cross(a, b, p) < 0.0) inside = false;
            nearest = std::min(nearest, segment_distance(p, a, b));
        }
        if (!inside && nearest > tol) return false;
    }
    return true;
}

std::vector<double> real_parts(const ZeroConfiguration& z)
{
    std::vector<double> out(static_cast<std::size_t>(z.size()));
    for (Index j = 0; j < z.size(); ++j) out[static_cast<std::size_t>(j)] = z[j].real();
    return out;
}

} // namespace rootlab
