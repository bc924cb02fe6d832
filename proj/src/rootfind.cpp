#include "rootlab/rootfind.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <cstdio>
#include <numeric>

#include "rootlab/rng.hpp"

namespace rootlab {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Bisection stops at this relative bracket width or iteration count.
constexpr double kBisectRelWidth = 1e-14;
constexpr int kBisectMaxIter = 120;

// Clusters tighter than this (relative to scale) get four times the iteration budget.
constexpr double kClusterSeparation = 1e-6;

struct WeightedSums {
    Complex s1;
    Complex s2;
    double abs_sum;  // sum_j m_j / |x - w_j|
};

// Distinct zeros split into real and imaginary arrays for the inner loops.
struct SplitZeros {
    std::vector<double> re;
    std::vector<double> im;
    std::vector<double> m;

    explicit SplitZeros(const detail::DistinctZeros& d)
    {
        for (std::size_t i = 0; i < d.values.size(); ++i) {
            re.push_back(d.values[i].real());
            im.push_back(d.values[i].imag());
            m.push_back(d.multiplicity[i]);
        }
    }
};

WeightedSums weighted_sums(const SplitZeros& d, Complex x)
{
    const double xr = x.real();
    const double xi = x.imag();
    double s1r = 0.0, s1i = 0.0, s2r = 0.0, s2i = 0.0, abs_sum = 0.0;
    const std::size_t count = d.re.size();
    for (std::size_t i = 0; i < count; ++i) {
        const double dr = xr - d.re[i];
        const double di = xi - d.im[i];
        const double inv = 1.0 / (dr * dr + di * di);
        const double rr = dr * inv;
        const double ri = -di * inv;
        const double m = d.m[i];
        s1r += m * rr;
        s1i += m * ri;
        s2r += m * (rr * rr - ri * ri);
        s2i += m * (2.0 * rr * ri);
        abs_sum += m * std::sqrt(inv);
    }
    return {Complex(s1r, s1i), Complex(s2r, s2i), abs_sum};
}

// sum_{k != j} 1/(x_j - x_k), skipping exact coincidences.
Complex repulsion(const std::vector<double>& xre, const std::vector<double>& xim, std::size_t j)
{
    double sr = 0.0;
    double si = 0.0;
    const double xr = xre[j];
    const double xi = xim[j];
    for (std::size_t k = 0; k < xre.size(); ++k) {
        const double dr = xr - xre[k];
        const double di = xi - xim[k];
        const double q = dr * dr + di * di;
        if (q == 0.0) continue;
        const double inv = 1.0 / q;
        sr += dr * inv;
        si -= di * inv;
    }
    return {sr, si};
}

std::string fmt_g(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

double relative_residual(const WeightedSums& s)
{
    if (!std::isfinite(s.abs_sum)) return 0.0;  // sitting on a zero of multiplicity >= 2
    return std::abs(s.s1) / s.abs_sum;
}

// Smaller of |p'/p| relative to sum m/|x - w| and the Newton correction relative to scale.
// The second stays meaningful next to a tight zero pair, where x cannot be rounded
// finely enough to make the first small.
double point_residual(const WeightedSums& s, double scale)
{
    const double rel = relative_residual(s);
    const Complex denom = s.s1 * s.s1 - s.s2;
    if (denom == Complex(0.0, 0.0)) return rel;
    const double step = std::abs(s.s1 / denom) / scale;
    return std::isfinite(step) ? std::min(rel, step) : rel;
}

double min_separation(const std::vector<Complex>& w)
{
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < w.size(); ++i)
        for (std::size_t j = i + 1; j < w.size(); ++j) best = std::min(best, std::norm(w[i] - w[j]));
    return std::sqrt(best);
}

Complex unit_disk_point(RngStream& rng)
{
    const double r = std::sqrt(rng.uniform());
    const double theta = 2.0 * std::numbers::pi * rng.uniform();
    return std::polar(r, theta);
}

// Each zero w_i is paired with a critical point near w_i - 1/sum_{j != i} m_j/(w_i - w_j)
// (the zero of 1/(x - w_i) + that sum, frozen at x = w_i). The candidate with the
// largest displacement is dropped to leave distinct - 1 guesses. Zeros whose
// partial sum vanishes fall back to the midpoint with a random partner.
std::vector<Complex> initial_guesses(const detail::DistinctZeros& d, RngStream& rng)
{
    const std::size_t count = d.values.size();
    std::vector<Complex> cand(count);
    std::vector<double> displacement(count);
    for (std::size_t i = 0; i < count; ++i) {
        Complex partial = 0.0;
        for (std::size_t j = 0; j < count; ++j)
            if (j != i) partial += static_cast<double>(d.multiplicity[j]) * detail::fast_reciprocal(d.values[i] - d.values[j]);
        partial /= static_cast<double>(d.multiplicity[i]);
        if (std::abs(partial) > 0.0 && std::isfinite(std::abs(partial))) {
            cand[i] = d.values[i] - 1.0 / partial;
            displacement[i] = 1.0 / std::abs(partial);
        } else {
            std::size_t partner = static_cast<std::size_t>(rng() % (count - 1));
            if (partner >= i) ++partner;
            cand[i] = 0.5 * (d.values[i] + d.values[partner]);
            displacement[i] = std::numeric_limits<double>::infinity();
        }
    }
    const auto drop = static_cast<std::size_t>(std::max_element(displacement.begin(), displacement.end()) - displacement.begin());
    cand.erase(cand.begin() + static_cast<std::ptrdiff_t>(drop));
    return cand;
}

} // namespace

namespace detail {

DistinctZeros group_duplicates(const ComplexVector& zeros, double tol)
{
    DistinctZeros out;
    for (Index j = 0; j < zeros.size(); ++j) {
        const Complex z = zeros[j];
        bool merged = false;
        for (std::size_t i = 0; i < out.values.size(); ++i) {
            if (std::abs(z - out.values[i]) <= tol) {
                ++out.multiplicity[i];
                merged = true;
                break;
            }
        }
        if (!merged) {
            out.values.push_back(z);
            out.multiplicity.push_back(1);
        }
    }
    return out;
}

} // namespace detail

DerivativeTower::DerivativeTower(std::vector<ZeroConfiguration> levels, int requested_depth)
    : levels_(std::move(levels)), requested_depth_(requested_depth)
{
    if (levels_.empty()) throw DomainError("DerivativeTower: no levels");
    for (std::size_t k = 1; k < levels_.size(); ++k) {
        if (levels_[k].size() != levels_[0].size() - static_cast<Index>(k))
            throw DomainError("DerivativeTower: level " + std::to_string(k) + " has the wrong number of zeros");
    }
}

ZeroConfiguration critical_points_real(const ZeroConfiguration& roots)
{
    const Index n = roots.size();
    if (n < 2) throw DomainError("critical_points_real: need at least two zeros");

    std::vector<double> x(static_cast<std::size_t>(n));
    for (Index j = 0; j < n; ++j) x[static_cast<std::size_t>(j)] = roots[j].real();
    std::sort(x.begin(), x.end());

    const double tol = 1e-12 * roots.scale();
    std::vector<double> w;
    std::vector<int> m;
    for (double v : x) {
        if (!w.empty() && v - w.back() <= tol) {
            ++m.back();
        } else {
            w.push_back(v);
            m.push_back(1);
        }
    }

    auto s1 = [&](double t) {
        double s = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) s += m[i] / (t - w[i]);
        return s;
    };

    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(n - 1));
    for (std::size_t i = 0; i < w.size(); ++i)
        for (int c = 1; c < m[i]; ++c) out.push_back(w[i]);

    // s1 decreases strictly from +inf to -inf on each gap.
    for (std::size_t i = 0; i + 1 < w.size(); ++i) {
        double lo = w[i];
        double hi = w[i + 1];
        for (int it = 0; it < kBisectMaxIter; ++it) {
            if (hi - lo <= kBisectRelWidth * std::max(std::abs(lo), std::abs(hi))) break;
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            const double v = s1(mid);
            if (v > 0.0)
                lo = mid;
            else if (v < 0.0)
                hi = mid;
            else {
                lo = hi = mid;
                break;
            }
        }
        out.push_back(0.5 * (lo + hi));
    }
    std::sort(out.begin(), out.end());

    ComplexVector z(static_cast<Index>(out.size()));
    for (std::size_t i = 0; i < out.size(); ++i) z[static_cast<Index>(i)] = out[i];
    return ZeroConfiguration(std::move(z), roots.im_bound());
}

ZeroConfiguration critical_points_complex(const ZeroConfiguration& roots, const SolverOptions& options)
{
    const Index n = roots.size();
    if (n < 2) throw DomainError("critical_points_complex: need at least two zeros");
    const double scale = roots.scale();

    const detail::DistinctZeros d = detail::group_duplicates(roots.zeros(), options.duplicate_tol * scale);

    std::vector<Complex> out;
    out.reserve(static_cast<std::size_t>(n - 1));
    for (std::size_t i = 0; i < d.values.size(); ++i)
        for (int c = 1; c < d.multiplicity[i]; ++c) out.push_back(d.values[i]);

    const std::size_t distinct = d.values.size();
    const std::size_t r = distinct - 1;
    if (r > 0) {
        RngStream rng(RngStream::derive_key(options.seed, static_cast<std::uint64_t>(distinct), "critical-guess"));
        std::vector<Complex> x = initial_guesses(d, rng);
        for (Complex& g : x) g += options.jitter * scale * unit_disk_point(rng);

        const bool clustered = min_separation(d.values) < kClusterSeparation * scale;
        const int limit = clustered ? 4 * options.max_iter : options.max_iter;
        const double step_tol = 4.0 * kEps * scale;
        const double nudge = 1e-10 * scale;

        const SplitZeros split(d);
        std::vector<double> xre(r);
        std::vector<double> xim(r);
        for (std::size_t j = 0; j < r; ++j) {
            xre[j] = x[j].real();
            xim[j] = x[j].imag();
        }

        std::vector<char> done(r, 0);
        std::size_t remaining = r;
        for (int iter = 0; iter < limit && remaining > 0; ++iter) {
            for (std::size_t j = 0; j < r; ++j) {
                if (done[j]) continue;
                WeightedSums s = weighted_sums(split, x[j]);
                if (!std::isfinite(s.abs_sum)) {
                    x[j] += nudge;
                    xre[j] = x[j].real();
                    s = weighted_sums(split, x[j]);
                }
                if (relative_residual(s) <= 4.0 * kEps) {
                    done[j] = 1;
                    --remaining;
                    continue;
                }
                const Complex denom = s.s1 * s.s1 - s.s2;  // p''/p
                if (denom == Complex(0.0, 0.0)) {
                    x[j] += nudge;
                    xre[j] = x[j].real();
                    continue;
                }
                const Complex newton = s.s1 / denom;
                const Complex step = newton / (1.0 - newton * repulsion(xre, xim, j));
                x[j] -= step;
                xre[j] = x[j].real();
                xim[j] = x[j].imag();
                if (std::abs(step) <= step_tol) {
                    done[j] = 1;
                    --remaining;
                }
            }
        }

        double worst = 0.0;
        std::vector<Index> bad;
        for (std::size_t j = 0; j < r; ++j) {
            WeightedSums s = weighted_sums(split, x[j]);
            // Newton polish, skipped when the step is not small (near-multiple critical points).
            const Complex denom = s.s1 * s.s1 - s.s2;
            if (denom != Complex(0.0, 0.0) && std::isfinite(s.abs_sum)) {
                const Complex newton = s.s1 / denom;
                if (std::abs(newton) <= 1e-6 * scale) {
                    x[j] -= newton;
                    s = weighted_sums(split, x[j]);
                }
            }
            const double res = point_residual(s, scale);
            if (!(res <= options.tol_newton)) bad.push_back(static_cast<Index>(j));
            worst = std::max(worst, std::isfinite(res) ? res : std::numeric_limits<double>::infinity());
        }
        if (!bad.empty())
            throw ConvergenceError("critical_points_complex: no convergence after " + std::to_string(limit) +
                                       " iterations, worst residual " + fmt_g(worst),
                                   worst, std::move(bad));
        out.insert(out.end(), x.begin(), x.end());
    }

    ComplexVector z(static_cast<Index>(out.size()));
    for (std::size_t i = 0; i < out.size(); ++i) z[static_cast<Index>(i)] = out[i];
    return ZeroConfiguration(std::move(z), roots.im_bound());
}

ZeroConfiguration critical_points(const ZeroConfiguration& roots, const SolverOptions& options)
{
    return roots.is_real() ? critical_points_real(roots) : critical_points_complex(roots, options);
}

DerivativeTower derivative_tower(const ZeroConfiguration& roots, int depth, const SolverOptions& options)
{
    if (depth < 0) throw DomainError("derivative_tower: negative depth");
    const int reachable = std::min<int>(depth, static_cast<int>(roots.size()) - 1);
    std::vector<ZeroConfiguration> levels;
    levels.reserve(static_cast<std::size_t>(reachable) + 1);
    levels.push_back(roots);
    for (int k = 0; k < reachable; ++k) {
        try {
            levels.push_back(critical_points(levels.back(), options));
        } catch (const NumericalError& e) {
            throw TowerError(std::string("derivative_tower level ") + std::to_string(k + 1) + ": " + e.what(), k + 1);
        }
    }
    return DerivativeTower(std::move(levels), depth);
}

namespace {

// p'(x)/p(x) evaluated stably for any |x| (reversed polynomial outside the unit disk).
struct CoeffEval {
    Complex ratio;     // p(x) / p'(x)
    double residual;   // |p(x)| / sum |a_i||x|^i
};

CoeffEval coeff_newton(const ComplexVector& a, Complex x)
{
    const Index deg = a.size() - 1;
    if (std::abs(x) <= 1.0) {
        Complex v = a[deg];
        Complex dv = 0.0;
        double mag = std::abs(a[deg]);
        const double ax = std::abs(x);
        for (Index i = deg - 1; i >= 0; --i) {
            dv = dv * x + v;
            v = v * x + a[i];
            mag = mag * ax + std::abs(a[i]);
        }
        return {v / dv, std::abs(v) / mag};
    }
    // p(x) = x^deg q(y) with y = 1/x and q(y) = sum a_i y^(deg - i).
    const Complex y = 1.0 / x;
    const double ay = std::abs(y);
    Complex q = a[0];
    Complex dq = 0.0;
    double mag = std::abs(a[0]);
    for (Index i = 1; i <= deg; ++i) {
        dq = dq * y + q;
        q = q * y + a[i];
        mag = mag * ay + std::abs(a[i]);
    }
    // p'/p = deg/x - y^2 q'(y)/q(y)
    const Complex logd = static_cast<double>(deg) * y - y * y * dq / q;
    return {1.0 / logd, std::abs(q) / mag};
}

} // namespace

ZeroConfiguration polyroots_coeff(const CoefficientPolynomial& p, const SolverOptions& options)
{
    const Index deg = p.degree();
    if (deg < 1) throw DomainError("polyroots_coeff: degree must be at least 1");

    // Exact zeros at the origin.
    Index low = 0;
    while (p[low] == Complex(0.0, 0.0)) ++low;
    const ComplexVector a = p.coeffs().segment(low, deg + 1 - low);
    const Index m = a.size() - 1;

    std::vector<Complex> x;
    x.reserve(static_cast<std::size_t>(m));

    if (m > 0) {
        // Upper convex hull of (i, log|a_i|).
        std::vector<Index> hull;
        for (Index i = 0; i <= m; ++i) {
            if (a[i] == Complex(0.0, 0.0)) continue;
            const double yi = std::log(std::abs(a[i]));
            while (hull.size() >= 2) {
                const Index i1 = hull[hull.size() - 2];
                const Index i2 = hull.back();
                const double y1 = std::log(std::abs(a[i1]));
                const double y2 = std::log(std::abs(a[i2]));
                const double cross = static_cast<double>(i2 - i1) * (yi - y1) - (y2 - y1) * static_cast<double>(i - i1);
                if (cross >= 0.0)
                    hull.pop_back();
                else
                    break;
            }
            hull.push_back(i);
        }
        constexpr double kSigma = 0.7;
        const double two_pi = 2.0 * std::numbers::pi;
        for (std::size_t h = 0; h + 1 < hull.size(); ++h) {
            const Index i = hull[h];
            const Index j = hull[h + 1];
            const Index count = j - i;
            const double radius =
                std::exp((std::log(std::abs(a[i])) - std::log(std::abs(a[j]))) / static_cast<double>(count));
            for (Index k = 0; k < count; ++k) {
                const double angle = two_pi * static_cast<double>(k) / static_cast<double>(count) +
                                     two_pi * static_cast<double>(i) / static_cast<double>(m) + kSigma;
                x.push_back(std::polar(radius, angle));
            }
        }

        const std::size_t r = x.size();
        std::vector<double> xre(r);
        std::vector<double> xim(r);
        for (std::size_t j = 0; j < r; ++j) {
            xre[j] = x[j].real();
            xim[j] = x[j].imag();
        }

        std::vector<char> done(r, 0);
        std::size_t remaining = r;
        for (int iter = 0; iter < options.max_iter && remaining > 0; ++iter) {
            for (std::size_t j = 0; j < r; ++j) {
                if (done[j]) continue;
                const CoeffEval e = coeff_newton(a, x[j]);
                if (e.residual <= 4.0 * kEps * static_cast<double>(m)) {
                    done[j] = 1;
                    --remaining;
                    continue;
                }
                const Complex step = e.ratio / (1.0 - e.ratio * repulsion(xre, xim, j));
                x[j] -= step;
                xre[j] = x[j].real();
                xim[j] = x[j].imag();
                if (std::abs(step) <= 4.0 * kEps * std::max(1.0, std::abs(x[j]))) {
                    done[j] = 1;
                    --remaining;
                }
            }
        }

        double worst = 0.0;
        std::vector<Index> bad;
        for (std::size_t j = 0; j < r; ++j) {
            const double res = coeff_newton(a, x[j]).residual;
            worst = std::max(worst, res);
            if (!(res <= options.tol_newton)) bad.push_back(static_cast<Index>(j));
        }
        if (!bad.empty())
            throw ConvergenceError("polyroots_coeff: " + std::to_string(bad.size()) + " roots unconverged after " +
                                       std::to_string(options.max_iter) + " iterations",
                                   worst, std::move(bad));
    }

    ComplexVector z(deg);
    for (Index i = 0; i < low; ++i) z[i] = 0.0;
    for (Index i = 0; i < m; ++i) z[low + i] = x[static_cast<std::size_t>(i)];
    return ZeroConfiguration::tight(std::move(z));
}

} // namespace rootlab
