#include "rootlab/ensembles.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace rootlab {

namespace {

std::string trim(std::string_view s)
{
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

void require_kind(const EnsembleSpec& spec, EnsembleKind kind, const char* who)
{
    if (spec.kind != kind) throw DomainError(std::string(who) + ": wrong ensemble kind " + to_string(spec.kind));
    if (spec.n < 1) throw DomainError(std::string(who) + ": n must be positive");
}

} // namespace

std::string to_string(EnsembleKind kind)
{
    switch (kind) {
    case EnsembleKind::Type1: return "type1";
    case EnsembleKind::Type2: return "type2";
    case EnsembleKind::Type3: return "type3";
    }
    return "?";
}

EnsembleKind parse_ensemble_kind(std::string_view text)
{
    std::string s = trim(text);
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "type1" || s == "1") return EnsembleKind::Type1;
    if (s == "type2" || s == "2") return EnsembleKind::Type2;
    if (s == "type3" || s == "3") return EnsembleKind::Type3;
    throw DomainError("unknown ensemble kind '" + std::string(text) + "'");
}

Law Law::parse(std::string_view text)
{
    Law law;
    const std::string s = trim(text);
    const auto open = s.find('(');
    if (open == std::string::npos) {
        law.name = s;
        return law;
    }
    if (s.back() != ')') throw DomainError("malformed law '" + s + "'");
    law.name = trim(std::string_view(s).substr(0, open));
    std::stringstream body(s.substr(open + 1, s.size() - open - 2));
    std::string item;
    while (std::getline(body, item, ',')) {
        if (trim(item).empty()) continue;
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw DomainError("malformed law parameter '" + item + "'");
        const std::string key = trim(std::string_view(item).substr(0, eq));
        const std::string value = trim(std::string_view(item).substr(eq + 1));
        try {
            std::size_t used = 0;
            law.params[key] = std::stod(value, &used);
            if (used != value.size()) throw std::invalid_argument(value);
        } catch (const std::exception&) {
            throw DomainError("law parameter '" + key + "' is not a number: '" + value + "'");
        }
    }
    return law;
}

std::string Law::to_string() const
{
    if (params.empty()) return name;
    std::ostringstream out;
    out << name << '(';
    bool first = true;
    for (const auto& [k, v] : params) {
        if (!first) out << ',';
        out << k << '=' << v;
        first = false;
    }
    out << ')';
    return out.str();
}

double Law::param(const std::string& key, double fallback) const
{
    const auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

double type1_im_bound(const Law& law)
{
    if (law.name == "circle") return 1.0;
    if (law.name == "uniform[-1,1]" || law.name == "gauss" || law.name == "rademacher") return 0.0;
    throw UnknownLawError("unknown Type 1 zero law '" + law.name + "'");
}

ZeroConfiguration sample_type1(const EnsembleSpec& spec, RngStream& rng)
{
    require_kind(spec, EnsembleKind::Type1, "sample_type1");
    const double c0 = type1_im_bound(spec.law);
    ComplexVector z(spec.n);
    const std::string& name = spec.law.name;
    if (name == "circle") {
        for (Index j = 0; j < z.size(); ++j) z[j] = std::polar(1.0, 2.0 * std::numbers::pi * rng.uniform());
    } else if (name == "uniform[-1,1]") {
        for (Index j = 0; j < z.size(); ++j) z[j] = rng.uniform(-1.0, 1.0);
    } else if (name == "gauss") {
        for (Index j = 0; j < z.size(); ++j) z[j] = rng.normal();
    } else {
        const double jitter = spec.law.param("jitter", 1e-6);
        for (Index j = 0; j < z.size(); ++j) {
            const double sign = (rng() >> 63) ? 1.0 : -1.0;
            z[j] = jitter > 0.0 ? sign + rng.uniform(-jitter, jitter) : sign;
        }
    }
    ZeroConfiguration out(std::move(z), c0);
    if (out.max_abs_imag() > c0 + 1e-15)
        throw NumericalError("sample_type1: sample violates its certified imaginary bound");
    return out;
}

CoefficientPolynomial sample_kac(const EnsembleSpec& spec, RngStream& rng)
{
    require_kind(spec, EnsembleKind::Type2, "sample_kac");
    const std::string& name = spec.law.name;
    auto draw = [&]() -> double {
        if (name == "kac-gauss") return rng.normal();
        if (name == "kac-rademacher") return (rng() >> 63) ? 1.0 : -1.0;
        throw UnknownLawError("unknown Kac coefficient law '" + name + "'");
    };
    ComplexVector c(spec.n + 1);
    for (Index j = 0; j <= spec.n; ++j) c[j] = draw();
    while (c[spec.n] == Complex(0.0, 0.0)) c[spec.n] = draw();
    return CoefficientPolynomial(std::move(c));
}

double TridiagonalMatrix::norm_inf() const
{
    double best = 0.0;
    const Index n = size();
    for (Index i = 0; i < n; ++i) {
        double row = std::abs(diagonal[i]);
        if (i > 0) row += std::abs(offdiagonal[i - 1]);
        if (i + 1 < n) row += std::abs(offdiagonal[i]);
        best = std::max(best, row);
    }
    return best;
}

TridiagonalMatrix sample_beta_tridiag(int n, int beta, RngStream& rng)
{
    if (n < 1) throw DomainError("sample_beta_tridiag: n must be positive");
    if (beta != 1 && beta != 2) throw DomainError("sample_beta_tridiag: beta must be 1 or 2");
    TridiagonalMatrix t;
    t.diagonal.resize(n);
    t.offdiagonal.resize(n - 1);
    const double bn = static_cast<double>(beta) * n;
    const double diag_sd = std::sqrt(2.0 / bn);
    for (int i = 0; i < n; ++i) t.diagonal[i] = diag_sd * rng.normal();
    for (int i = 0; i + 1 < n; ++i) t.offdiagonal[i] = rng.chi(static_cast<double>(beta) * (n - 1 - i)) / std::sqrt(bn);
    return t;
}

Index sturm_count(const TridiagonalMatrix& t, double x)
{
    const Index n = t.size();
    double emax2 = 1.0;
    for (Index i = 0; i + 1 < n; ++i) emax2 = std::max(emax2, t.offdiagonal[i] * t.offdiagonal[i]);
    const double pivmin = std::numeric_limits<double>::min() * emax2;

    Index count = 0;
    double q = t.diagonal[0] - x;
    if (std::abs(q) < pivmin) q = -pivmin;
    if (q < 0.0) ++count;
    for (Index i = 1; i < n; ++i) {
        const double e = t.offdiagonal[i - 1];
        q = (t.diagonal[i] - x) - e * e / q;
        if (std::abs(q) < pivmin) q = -pivmin;
        if (q < 0.0) ++count;
    }
    return count;
}

ZeroConfiguration eigenvalues_sturm(const TridiagonalMatrix& t)
{
    const Index n = t.size();
    if (n < 1) throw DomainError("eigenvalues_sturm: empty matrix");

    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (Index i = 0; i < n; ++i) {
        double radius = 0.0;
        if (i > 0) radius += std::abs(t.offdiagonal[i - 1]);
        if (i + 1 < n) radius += std::abs(t.offdiagonal[i]);
        lo = std::min(lo, t.diagonal[i] - radius);
        hi = std::max(hi, t.diagonal[i] + radius);
    }
    const double width = 1e-12 * (1.0 + t.norm_inf());
    lo -= width;
    hi += width;

    Eigen::VectorXd eig(n);
    double floor = lo;  // eigenvalues come out ascending, so each search starts at the previous one
    for (Index k = 0; k < n; ++k) {
        double a = floor;
        double b = hi;
        while (b - a > width) {
            const double mid = 0.5 * (a + b);
            if (mid <= a || mid >= b) break;
            if (sturm_count(t, mid) <= k)
                a = mid;
            else
                b = mid;
        }
        eig[k] = 0.5 * (a + b);
        floor = a;
    }
    return ZeroConfiguration::real(eig);
}

double semicircle_cdf(double x)
{
    if (x <= -2.0) return 0.0;
    if (x >= 2.0) return 1.0;
    return 0.5 + (x * std::sqrt(4.0 - x * x) + 4.0 * std::asin(0.5 * x)) / (4.0 * std::numbers::pi);
}

} // namespace rootlab
