#include "rootlab/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <set>

namespace rootlab {

namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Rounding slack on the mean-|.| comparison between consecutive levels.
constexpr double kAbsSlack = 1e-12;

int uniform_int(RngStream& rng, int lo, int hi)
{
    const auto span = static_cast<std::uint64_t>(hi - lo + 1);
    return lo + static_cast<int>(rng() % span);
}

ComplexVector box_zeros(RngStream& rng, int n, double re_bound, double im_bound)
{
    ComplexVector z(n);
    for (int j = 0; j < n; ++j) {
        const double re = rng.uniform(-re_bound, re_bound);
        const double im = im_bound > 0.0 ? rng.uniform(-im_bound, im_bound) : 0.0;
        z[j] = Complex(re, im);
    }
    return z;
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where)
{
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& [key, value] : j.items())
        if (!allowed.contains(key)) throw ConfigError(where + ": unknown key '" + key + "'");
}

template <typename T>
T get_or(const json& j, const char* key, T fallback)
{
    const auto it = j.find(key);
    if (it == j.end() || it->is_null()) return fallback;
    try {
        return it->get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
}

std::uint64_t parse_seed(const json& v)
{
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer()) {
        const auto s = v.get<std::int64_t>();
        if (s < 0) throw ConfigError("master_seed must be non-negative");
        return static_cast<std::uint64_t>(s);
    }
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        try {
            std::size_t used = 0;
            const auto out = std::stoull(s, &used, 0);
            if (used == s.size()) return out;
        } catch (const std::exception&) {
        }
        throw ConfigError("master_seed '" + s + "' is not an unsigned integer");
    }
    throw ConfigError("master_seed must be an integer or a string");
}

ScalingPlan plan_from_json(const json& j)
{
    if (j.is_array()) return ScalingPlan::parse(j.get<std::vector<std::string>>());
    check_keys(j, {"a", "b", "mode"}, "plan");
    std::optional<ScalingSequence> a;
    std::optional<ScalingSequence> b;
    std::optional<AssumptionMode> mode;
    if (j.contains("a") && !j["a"].is_null()) a = ScalingSequence::parse(j["a"].get<std::string>());
    if (j.contains("b") && !j["b"].is_null()) b = ScalingSequence::parse(j["b"].get<std::string>());
    if (j.contains("mode") && !j["mode"].is_null()) mode = parse_assumption_mode(j["mode"].get<std::string>());
    return ScalingPlan(std::move(a), std::move(b), mode);
}

bool bounds_apply(const ExperimentConfig& c)
{
    return c.bounds && c.ensemble.kind == EnsembleKind::Type1 && c.ell == 1 && c.plan.mode() == AssumptionMode::A2 &&
           c.centering == CenteringMethod::None;
}

double elapsed_ms(std::chrono::steady_clock::time_point since)
{
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

ResultRow error_row(const ExperimentConfig& c, int n, int replica, std::uint64_t seed, std::string message)
{
    ResultRow row;
    row.experiment_id = c.experiment_id;
    row.n = n;
    row.k = -1;
    row.ell = c.ell;
    row.replica = replica;
    row.seed = seed;
    row.value = Complex(kNaN, kNaN);
    row.diff_to_k0 = kNaN;
    row.error = std::move(message);
    return row;
}

std::string optional_field(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

std::string json_escape(const std::string& s) { return json(s).dump(); }

void set_value(json& doc, const std::string& key, const json& value)
{
    json* node = &doc;
    std::size_t start = 0;
    while (true) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty()) throw ConfigError("malformed override key '" + key + "'");
        if (!node->is_object()) *node = json::object();
        if (dot == std::string::npos) {
            (*node)[part] = value;
            return;
        }
        node = &(*node)[part];
        start = dot + 1;
    }
}

} // namespace

std::string to_string(CenteringMethod method)
{
    switch (method) {
    case CenteringMethod::None: return "none";
    case CenteringMethod::Empirical: return "empirical";
    case CenteringMethod::Analytic: return "analytic";
    }
    return "?";
}

CenteringMethod parse_centering_method(std::string_view text)
{
    if (text == "none") return CenteringMethod::None;
    if (text == "empirical") return CenteringMethod::Empirical;
    if (text == "analytic") return CenteringMethod::Analytic;
    throw ConfigError("unknown centering method '" + std::string(text) + "'");
}

int ExperimentConfig::beta() const
{
    const double b = ensemble.law.param("beta", 2.0);
    return b == 1.0 ? 1 : (b == 2.0 ? 2 : 0);
}

double ExperimentConfig::strip() const
{
    if (ensemble.declared_c0) return *ensemble.declared_c0;
    switch (ensemble.kind) {
    case EnsembleKind::Type1: return type1_im_bound(ensemble.law);
    case EnsembleKind::Type2: return 0.0;
    case EnsembleKind::Type3: return 0.0;
    }
    return 0.0;
}

void ExperimentConfig::validate() const
{
    if (experiment_id.empty()) throw ConfigError("experiment_id must not be empty");
    if (experiment_id.find_first_of(",\"\n\r") != std::string::npos)
        throw ConfigError("experiment_id must not contain commas, quotes or newlines");
    if (n_grid.empty()) throw ConfigError("n_grid must not be empty");
    for (std::size_t i = 0; i < n_grid.size(); ++i) {
        if (n_grid[i] < 1) throw ConfigError("n_grid entries must be positive");
        if (i > 0 && n_grid[i] <= n_grid[i - 1]) throw ConfigError("n_grid must be strictly increasing");
    }
    if (k_max < 0) throw ConfigError("k_max must be non-negative");
    if (k_max >= n_grid.front()) throw ConfigError("k_max must be below min(n_grid)");
    if (ell < 1 || ell > 3) throw ConfigError("ell must be 1, 2 or 3");
    if (ell != 2 && !plan.has_a()) throw ConfigError("ell = " + std::to_string(ell) + " needs a scaling a_n");
    if (ell != 1 && !plan.has_b()) throw ConfigError("ell = " + std::to_string(ell) + " needs a scaling b_n");
    if (replicas < 1) throw ConfigError("replicas must be at least 1");
    if (threads < 1) throw ConfigError("threads must be at least 1");
    if (ensemble.declared_c0 && !(*ensemble.declared_c0 >= 0.0)) throw ConfigError("ensemble.c0 must be non-negative");

    switch (ensemble.kind) {
    case EnsembleKind::Type1: {
        double law_bound = 0.0;
        try {
            law_bound = type1_im_bound(ensemble.law);
        } catch (const UnknownLawError& e) {
            throw ConfigError(e.what());
        }
        if (ensemble.declared_c0 && *ensemble.declared_c0 < law_bound)
            throw ConfigError("ensemble.c0 is below the law's imaginary bound");
        break;
    }
    case EnsembleKind::Type2:
        if (ensemble.law.name != "kac-gauss" && ensemble.law.name != "kac-rademacher")
            throw ConfigError("type2 needs law kac-gauss or kac-rademacher");
        if (test_function == "poisson" && !ensemble.declared_c0)
            throw ConfigError("poisson with type2 zeros needs an explicit ensemble.c0");
        break;
    case EnsembleKind::Type3:
        if (ensemble.law.name != "beta-tridiag") throw ConfigError("type3 needs law beta-tridiag(beta=1|2)");
        if (beta() != 1 && beta() != 2) throw ConfigError("beta-tridiag: beta must be 1 or 2");
        break;
    }

    try {
        (void)TestFunction::by_name(test_function, strip());
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }

    switch (centering) {
    case CenteringMethod::None: break;
    case CenteringMethod::Empirical:
        if ((reference_replicas == 0 ? replicas : reference_replicas) < 2)
            throw ConfigError("empirical centering needs at least 2 reference replicas");
        break;
    case CenteringMethod::Analytic:
        if (ensemble.kind != EnsembleKind::Type1) throw ConfigError("analytic centering needs Type 1 i.i.d. zeros");
        if (k_max != 0) throw ConfigError("analytic centering covers level 0 only; set k_max = 0");
        break;
    }
    if (reference_replicas < 0) throw ConfigError("reference_replicas must be non-negative");
    if (!certificate_t.empty() && k_max < 1) throw ConfigError("certificates need k_max >= 1");
    if (!certificate_t.empty() && n_grid.front() < 2) throw ConfigError("certificates need n >= 2");
    for (double t : certificate_t)
        if (!std::isfinite(t)) throw ConfigError("certificate_t entries must be finite");
    if (!(solver.tol_newton > 0.0) || solver.max_iter < 1 || !(solver.duplicate_tol >= 0.0) || !(solver.jitter >= 0.0))
        throw ConfigError("invalid solver options");
}

ExperimentConfig ExperimentConfig::from_json(const json& j)
{
    check_keys(j,
               {"experiment_id", "ensemble", "n_grid", "k_max", "ell", "plan", "test_function", "replicas",
                "master_seed", "centering", "bounds", "certificate_t", "record_timing", "threads", "solver", "outputs"},
               "config");
    ExperimentConfig c;
    try {
        c.experiment_id = get_or<std::string>(j, "experiment_id", c.experiment_id);

        if (!j.contains("ensemble")) throw ConfigError("config: missing 'ensemble'");
        const json& e = j["ensemble"];
        check_keys(e, {"kind", "law", "c0"}, "ensemble");
        c.ensemble.kind = parse_ensemble_kind(get_or<std::string>(e, "kind", "type1"));
        const std::string law = get_or<std::string>(e, "law", c.ensemble.kind == EnsembleKind::Type3 ? "beta-tridiag" : "");
        if (law.empty()) throw ConfigError("ensemble: missing 'law'");
        c.ensemble.law = Law::parse(law);
        if (e.contains("c0") && !e["c0"].is_null()) c.ensemble.declared_c0 = e["c0"].get<double>();

        if (!j.contains("n_grid")) throw ConfigError("config: missing 'n_grid'");
        c.n_grid = j["n_grid"].get<std::vector<int>>();
        c.k_max = get_or<int>(j, "k_max", c.k_max);
        c.ell = get_or<int>(j, "ell", c.ell);
        if (j.contains("plan") && !j["plan"].is_null()) c.plan = plan_from_json(j["plan"]);
        c.test_function = get_or<std::string>(j, "test_function", c.test_function);
        c.replicas = get_or<int>(j, "replicas", c.replicas);
        if (j.contains("master_seed") && !j["master_seed"].is_null()) c.master_seed = parse_seed(j["master_seed"]);

        if (j.contains("centering") && !j["centering"].is_null()) {
            const json& ce = j["centering"];
            if (ce.is_string()) {
                c.centering = parse_centering_method(ce.get<std::string>());
            } else {
                check_keys(ce, {"method", "reference_replicas"}, "centering");
                c.centering = parse_centering_method(get_or<std::string>(ce, "method", "none"));
                c.reference_replicas = get_or<int>(ce, "reference_replicas", 0);
            }
        }
        c.bounds = get_or<bool>(j, "bounds", c.bounds);
        c.certificate_t = get_or<std::vector<double>>(j, "certificate_t", {});
        c.record_timing = get_or<bool>(j, "record_timing", c.record_timing);
        c.threads = get_or<int>(j, "threads", c.threads);

        if (j.contains("solver") && !j["solver"].is_null()) {
            const json& s = j["solver"];
            check_keys(s, {"tol_newton", "max_iter", "duplicate_tol", "jitter", "seed"}, "solver");
            c.solver.tol_newton = get_or<double>(s, "tol_newton", c.solver.tol_newton);
            c.solver.max_iter = get_or<int>(s, "max_iter", c.solver.max_iter);
            c.solver.duplicate_tol = get_or<double>(s, "duplicate_tol", c.solver.duplicate_tol);
            c.solver.jitter = get_or<double>(s, "jitter", c.solver.jitter);
            if (s.contains("seed") && !s["seed"].is_null()) c.solver.seed = parse_seed(s["seed"]);
        }
        if (j.contains("outputs") && !j["outputs"].is_null()) {
            const json& o = j["outputs"];
            check_keys(o, {"csv", "jsonl", "certificates"}, "outputs");
            c.outputs.csv = get_or<std::string>(o, "csv", "");
            c.outputs.jsonl = get_or<std::string>(o, "jsonl", "");
            c.outputs.certificates = get_or<std::string>(o, "certificates", "");
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    c.validate();
    return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    json j;
    try {
        j = json::parse(in, nullptr, true, true);
    } catch (const json::exception& e) {
        throw ConfigError("config " + path.string() + ": " + e.what());
    }
    return from_json(j);
}

json ExperimentConfig::to_json() const
{
    json j;
    j["experiment_id"] = experiment_id;
    j["ensemble"] = {{"kind", rootlab::to_string(ensemble.kind)},
                     {"law", ensemble.law.to_string()},
                     {"c0", ensemble.declared_c0 ? json(*ensemble.declared_c0) : json(nullptr)}};
    j["n_grid"] = n_grid;
    j["k_max"] = k_max;
    j["ell"] = ell;
    j["plan"] = {{"a", plan.a_sequence() ? json(plan.a_sequence()->expr()) : json(nullptr)},
                 {"b", plan.b_sequence() ? json(plan.b_sequence()->expr()) : json(nullptr)},
                 {"mode", rootlab::to_string(plan.mode())}};
    j["test_function"] = test_function;
    j["replicas"] = replicas;
    j["master_seed"] = master_seed;
    j["centering"] = {{"method", rootlab::to_string(centering)}, {"reference_replicas", reference_replicas}};
    j["bounds"] = bounds;
    j["certificate_t"] = certificate_t;
    j["record_timing"] = record_timing;
    j["threads"] = threads;
    j["solver"] = {{"tol_newton", solver.tol_newton},
                   {"max_iter", solver.max_iter},
                   {"duplicate_tol", solver.duplicate_tol},
                   {"jitter", solver.jitter},
                   {"seed", solver.seed}};
    j["outputs"] = {{"csv", outputs.csv}, {"jsonl", outputs.jsonl}, {"certificates", outputs.certificates}};
    return j;
}

void apply_override(json& doc, const std::string& assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override must look like key=value: '" + assignment + "'");
    const std::string key = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;
    set_value(doc, key, value);
}

std::size_t ExperimentResult::bound_violations() const
{
    return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const ResultRow& r) {
        return !r.is_error() && r.bound && !(*r.bound >= r.diff_to_k0);
    }));
}

std::string zeros_stage(int n, bool reference)
{
    return std::string(reference ? "reference-zeros" : "zeros") + ":n=" + std::to_string(n);
}

ZeroConfiguration sample_zeros(const ExperimentConfig& config, int n, RngStream& rng)
{
    EnsembleSpec spec = config.ensemble;
    spec.n = n;
    switch (spec.kind) {
    case EnsembleKind::Type1: {
        ZeroConfiguration z = sample_type1(spec, rng);
        if (spec.declared_c0) return ZeroConfiguration(z.zeros(), *spec.declared_c0);
        return z;
    }
    case EnsembleKind::Type2: {
        const ZeroConfiguration z = polyroots_coeff(sample_kac(spec, rng), config.solver);
        if (spec.declared_c0) return ZeroConfiguration(z.zeros(), *spec.declared_c0);
        return z;
    }
    case EnsembleKind::Type3: return eigenvalues_sturm(sample_beta_tridiag(n, config.beta(), rng));
    }
    throw DomainError("sample_zeros: unknown ensemble kind");
}

ExperimentResult run_experiment(const ExperimentConfig& config)
{
    config.validate();
    const TestFunction f = TestFunction::by_name(config.test_function, config.strip());
    const bool with_bounds = bounds_apply(config);
    const bool empirical = config.centering == CenteringMethod::Empirical;
    const int reference = empirical ? (config.reference_replicas == 0 ? config.replicas : config.reference_replicas) : 0;

    struct Cell {
        int n;
        int replica;
        bool reference;
    };
    std::vector<Cell> cells;
    for (int n : config.n_grid)
        for (int r = 0; r < config.replicas; ++r) cells.push_back({n, r, false});
    for (int n : config.n_grid)
        for (int r = 0; r < reference; ++r) cells.push_back({n, r, true});

    struct CellOutput {
        std::vector<ResultRow> rows;
        std::vector<CertificateRow> certificates;
    };
    std::vector<CellOutput> outputs(cells.size());

    parallel_for(cells.size(), config.threads, [&](std::size_t i) {
        const Cell& cell = cells[i];
        RngStream rng = rng_stream(config.master_seed, static_cast<std::uint64_t>(cell.replica),
                                   zeros_stage(cell.n, cell.reference));
        const std::uint64_t seed = rng.key();
        const auto start = std::chrono::steady_clock::now();
        CellOutput out;
        try {
            const ZeroConfiguration roots = sample_zeros(config, cell.n, rng);
            const DerivativeTower tower = derivative_tower(roots, config.k_max, config.solver);
            for (int k = 0; k <= config.k_max; ++k) {
                ResultRow row;
                row.experiment_id = config.experiment_id;
                row.n = cell.n;
                row.k = k;
                row.ell = config.ell;
                row.replica = cell.replica;
                row.seed = seed;
                row.value = linear_statistic(tower.level(k), f, config.plan, config.ell, cell.n, k);
                if (with_bounds && k >= 1 && !cell.reference) row.bound = telescoped_bound(tower, f, config.plan, k);
                out.rows.push_back(std::move(row));
            }
            if (!cell.reference)
                for (double t : config.certificate_t)
                    out.certificates.push_back({cell.n, cell.replica, lemma3_check(roots, t, tower)});
        } catch (const std::exception& e) {
            out.rows.assign(1, error_row(config, cell.n, cell.replica, seed, e.what()));
            out.certificates.clear();
        }
        const double ms = config.record_timing ? elapsed_ms(start) : 0.0;
        for (auto& row : out.rows) row.runtime_ms = ms;
        outputs[i] = std::move(out);
    });

    ExperimentResult result;
    result.cells = static_cast<std::size_t>(config.replicas) * config.n_grid.size();

    // Reference batch by grid point.
    std::map<Index, std::vector<LinearStatisticRecord>> reference_records;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (!cells[i].reference) continue;
        for (const ResultRow& row : outputs[i].rows) {
            if (row.is_error()) {
                ++result.reference_errors;
                continue;
            }
            reference_records[row.n].push_back({row.n, row.k, row.ell, row.value, false, std::nullopt, row.seed});
        }
    }

    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (cells[i].reference) continue;
        CellOutput& out = outputs[i];
        bool failed = out.rows.size() == 1 && out.rows.front().is_error();

        if (!failed && config.centering != CenteringMethod::None) {
            std::vector<LinearStatisticRecord> records;
            for (const ResultRow& row : out.rows)
                records.push_back({row.n, row.k, row.ell, row.value, false, std::nullopt, row.seed});
            try {
                if (empirical)
                    records = center_empirical(std::move(records), reference_records[cells[i].n]);
                else
                    records = center_analytic(std::move(records), config.ensemble.law, f, config.plan);
                for (std::size_t r = 0; r < records.size(); ++r) {
                    out.rows[r].value = records[r].value;
                    out.rows[r].centered = records[r].centered;
                    out.rows[r].center = records[r].center;
                }
            } catch (const std::exception& e) {
                const ResultRow& first = out.rows.front();
                out.rows.assign(1, error_row(config, cells[i].n, cells[i].replica, first.seed, e.what()));
                out.certificates.clear();
                failed = true;
            }
        }

        if (failed) {
            ++result.error_cells;
        } else {
            const Complex base = out.rows.front().value;
            for (ResultRow& row : out.rows) row.diff_to_k0 = std::abs(row.value - base);
        }
        result.rows.insert(result.rows.end(), out.rows.begin(), out.rows.end());
        result.certificates.insert(result.certificates.end(), out.certificates.begin(), out.certificates.end());
    }
    return result;
}

std::string format_double(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows)
{
    out << "experiment_id,n,k,ell,seed,value_re,value_im,centered,center_re,center_im,diff_to_k0,bound,runtime_ms\n";
    for (const ResultRow& r : rows) {
        out << r.experiment_id << ',' << r.n << ',' << r.k << ',' << r.ell << ',' << r.seed << ',';
        if (r.is_error()) {
            out << ",," << (r.centered ? 1 : 0) << ",,,,," << format_double(r.runtime_ms) << '\n';
            continue;
        }
        out << format_double(r.value.real()) << ',' << format_double(r.value.imag()) << ',' << (r.centered ? 1 : 0)
            << ',';
        if (r.center)
            out << format_double(r.center->real()) << ',' << format_double(r.center->imag());
        else
            out << ',';
        out << ',' << format_double(r.diff_to_k0) << ',' << optional_field(r.bound) << ','
            << format_double(r.runtime_ms) << '\n';
    }
}

void write_jsonl(std::ostream& out, const std::vector<ResultRow>& rows)
{
    // Numbers go through format_double so the text matches the CSV exactly.
    auto num = [](double v) { return std::isfinite(v) ? format_double(v) : std::string("null"); };
    for (const ResultRow& r : rows) {
        out << "{\"experiment_id\":" << json_escape(r.experiment_id) << ",\"n\":" << r.n << ",\"k\":" << r.k
            << ",\"ell\":" << r.ell << ",\"replica\":" << r.replica << ",\"seed\":" << r.seed;
        if (r.is_error()) {
            out << ",\"error\":" << json_escape(*r.error) << "}\n";
            continue;
        }
        out << ",\"value_re\":" << num(r.value.real()) << ",\"value_im\":" << num(r.value.imag())
            << ",\"centered\":" << (r.centered ? "true" : "false");
        if (r.center) out << ",\"center_re\":" << num(r.center->real()) << ",\"center_im\":" << num(r.center->imag());
        out << ",\"diff_to_k0\":" << num(r.diff_to_k0);
        if (r.bound) out << ",\"bound\":" << num(*r.bound);
        out << ",\"runtime_ms\":" << num(r.runtime_ms) << "}\n";
    }
}

void write_certificates_csv(std::ostream& out, const std::vector<CertificateRow>& rows)
{
    out << "n,t,residual,bound_c_ok,bound_trace_ok\n";
    for (const CertificateRow& r : rows)
        out << r.n << ',' << format_double(r.certificate.t) << ',' << format_double(r.certificate.residual) << ','
            << (r.certificate.bound_c_ok ? 1 : 0) << ',' << (r.certificate.bound_trace_ok ? 1 : 0) << '\n';
}

void write_tower_csv(std::ostream& out, const DerivativeTower& tower)
{
    out << "level,index,re,im\n";
    for (int k = 0; k <= tower.depth(); ++k) {
        const ZeroConfiguration& z = tower.level(k);
        for (Index j = 0; j < z.size(); ++j)
            out << k << ',' << j << ',' << format_double(z[j].real()) << ',' << format_double(z[j].imag()) << '\n';
    }
}

std::vector<IdentityCase> identity_sweep(const IdentitySweepOptions& o)
{
    if (o.count < 0 || o.n_min < 2 || o.n_max < o.n_min) throw DomainError("identity_sweep: bad options");
    std::vector<std::optional<IdentityCase>> slots(static_cast<std::size_t>(o.count));
    parallel_for(slots.size(), o.threads, [&](std::size_t i) {
        RngStream rng = rng_stream(o.seed, i, "identity");
        const int n = uniform_int(rng, o.n_min, o.n_max);
        const bool real = o.real_every > 0 && static_cast<int>(i % static_cast<std::size_t>(o.real_every)) == o.real_every - 1;
        const double im = real ? 0.0 : o.im_bound;
        const ZeroConfiguration roots(box_zeros(rng, n, o.re_bound, im), im);
        const double t = rng.uniform(-o.t_max, o.t_max);
        const DerivativeTower tower = derivative_tower(roots, 1);
        slots[i] = IdentityCase{roots, tower.level(1), lemma3_check(roots, t, tower)};
    });
    std::vector<IdentityCase> out;
    out.reserve(slots.size());
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

std::vector<Prop2Case> prop2_sweep(const Prop2SweepOptions& o)
{
    if (o.count < 0 || o.n_min < 2 || o.n_max < o.n_min) throw DomainError("prop2_sweep: bad options");
    std::vector<Prop2Case> out(static_cast<std::size_t>(o.count));
    parallel_for(out.size(), o.threads, [&](std::size_t i) {
        RngStream rng = rng_stream(o.seed, i, "prop2");
        const int n = uniform_int(rng, o.n_min, o.n_max);
        const ZeroConfiguration roots(box_zeros(rng, n, o.re_bound, o.im_bound), o.im_bound);
        const CheungNgMatrix m = build_matrix(roots);
        Prop2Case c;
        c.n = n;
        for (int p = 0; p < o.random_points; ++p) {
            const Complex x(rng.uniform(-o.re_bound, o.re_bound), rng.uniform(-o.im_bound, o.im_bound));
            c.worst_random = std::max(c.worst_random, char_poly_residual(m, roots, x));
        }
        const ZeroConfiguration crit = critical_points(roots);
        for (Index j = 0; j < crit.size(); ++j)
            c.worst_critical = std::max(c.worst_critical, char_poly_residual(m, roots, crit[j]));
        out[i] = c;
    });
    return out;
}

TowerInvariantReport check_tower_invariants(const DerivativeTower& tower)
{
    TowerInvariantReport rep;
    const ZeroConfiguration& base = tower.level(0);
    const double scale = base.scale();
    const Complex mean0 = base.mean();
    for (int k = 1; k <= tower.depth(); ++k) {
        const ZeroConfiguration& prev = tower.level(k - 1);
        const ZeroConfiguration& cur = tower.level(k);

        rep.mean_drift = std::max(rep.mean_drift, std::abs(cur.mean() - mean0) / scale);
        rep.abs_increase = std::max(rep.abs_increase, (cur.mean_abs() - prev.mean_abs()) / scale);
        if (!hull_contains(prev, cur, kHullTolerance * scale)) rep.hull_ok = false;
        if (cur.im_bound() != base.im_bound() || cur.max_abs_imag() > base.im_bound() + ZeroConfiguration::kImSlack * scale)
            rep.im_bound_ok = false;

        if (prev.is_real()) {
            std::vector<double> x = real_parts(prev);
            std::vector<double> y = real_parts(cur);
            std::sort(x.begin(), x.end());
            std::sort(y.begin(), y.end());
            const double tol = kHullTolerance * scale;
            for (std::size_t j = 0; j < y.size(); ++j)
                if (y[j] < x[j] - tol || y[j] > x[j + 1] + tol) rep.interlacing_ok = false;
        }
    }
    rep.mean_ok = rep.mean_drift <= kMeanTolerance;
    rep.abs_monotone_ok = rep.abs_increase <= kAbsSlack;
    return rep;
}

std::vector<TowerCase> tower_sweep(const TowerSweepOptions& o)
{
    if (o.count < 0 || o.n_min < 2 || o.n_max < o.n_min || o.k_max < 1) throw DomainError("tower_sweep: bad options");
    std::vector<std::optional<TowerCase>> slots(static_cast<std::size_t>(o.count));
    parallel_for(slots.size(), o.threads, [&](std::size_t i) {
        RngStream rng = rng_stream(o.seed, i, "tower");
        const int n = uniform_int(rng, o.n_min, o.n_max);
        const int depth = uniform_int(rng, 1, std::min(o.k_max, n - 1));
        ComplexVector z(n);
        double bound = 0.0;
        switch (i % 4) {
        case 0:  // real, distinct
            z = box_zeros(rng, n, 1.0, 0.0);
            break;
        case 1:  // complex box
            z = box_zeros(rng, n, 1.0, 1.0);
            bound = 1.0;
            break;
        case 2:  // unit circle
            for (int j = 0; j < n; ++j) z[j] = std::polar(1.0, 2.0 * std::numbers::pi * rng.uniform());
            bound = 1.0;
            break;
        default: {  // real with repeated zeros
            const int distinct = std::max(1, n / 3);
            std::vector<double> atoms(static_cast<std::size_t>(distinct));
            for (double& a : atoms) a = rng.uniform(-1.0, 1.0);
            for (int j = 0; j < n; ++j) z[j] = atoms[static_cast<std::size_t>(uniform_int(rng, 0, distinct - 1))];
            break;
        }
        }
        TowerCase c{ZeroConfiguration(z, bound), depth, {}, std::nullopt};
        try {
            c.report = check_tower_invariants(derivative_tower(c.roots, depth));
        } catch (const std::exception& e) {
            c.error = e.what();
        }
        slots[i] = std::move(c);
    });
    std::vector<TowerCase> out;
    out.reserve(slots.size());
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

std::vector<KacReplica> kac_experiment(std::uint64_t seed, int n, int replicas, const Law& law, int threads,
                                       double inner, double outer)
{
    if (n < 2 || replicas < 1) throw DomainError("kac_experiment: need n >= 2 and replicas >= 1");
    const EnsembleSpec spec{EnsembleKind::Type2, law, n, std::nullopt};
    std::vector<KacReplica> out(static_cast<std::size_t>(replicas));
    auto share = [&](const ZeroConfiguration& z) {
        Index inside = 0;
        for (Index j = 0; j < z.size(); ++j) {
            const double r = std::abs(z[j]);
            if (r > inner && r < outer) ++inside;
        }
        return static_cast<double>(inside) / static_cast<double>(z.size());
    };
    parallel_for(out.size(), threads, [&](std::size_t r) {
        RngStream rng = rng_stream(seed, r, "kac:n=" + std::to_string(n));
        const CoefficientPolynomial p = sample_kac(spec, rng);
        out[r] = {share(polyroots_coeff(p)), share(polyroots_coeff(differentiate(p)))};
    });
    return out;
}

std::vector<SemicircleReplica> semicircle_experiment(std::uint64_t seed, int n, int beta, int replicas, int threads)
{
    if (n < 2 || replicas < 1) throw DomainError("semicircle_experiment: need n >= 2 and replicas >= 1");
    std::vector<SemicircleReplica> out(static_cast<std::size_t>(replicas));
    parallel_for(out.size(), threads, [&](std::size_t r) {
        RngStream rng = rng_stream(seed, r, "tridiag:n=" + std::to_string(n));
        const ZeroConfiguration eig = eigenvalues_sturm(sample_beta_tridiag(n, beta, rng));
        const ZeroConfiguration crit = critical_points_real(eig);
        const std::vector<double> x0 = real_parts(eig);
        const std::vector<double> x1 = real_parts(crit);
        out[r] = {kolmogorov_distance(x0, semicircle_cdf), kolmogorov_distance(x1, semicircle_cdf),
                  levy_distance(x0, x1)};
    });
    return out;
}

AssumptionReport assumption_diagnostics(const ExperimentConfig& config, double threshold, int replica)
{
    config.validate();
    std::vector<ZeroConfiguration> samples;
    for (int n : config.n_grid) {
        RngStream rng = rng_stream(config.master_seed, static_cast<std::uint64_t>(replica), zeros_stage(n, false));
        samples.push_back(sample_zeros(config, n, rng));
    }
    return check_assumptions(config.plan, samples, config.k_max, threshold);
}

} // namespace rootlab
