// rootlab: command-line front end for the experiment harness.
//
// Exit codes: 0 success, 1 usage error, 2 assertion failed, 3 partial run (error rows present).

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rootlab/harness.hpp"

using namespace rootlab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitAssertion = 2;
constexpr int kExitPartial = 3;

struct Common {
    std::optional<std::uint64_t> seed;
    std::optional<int> replicas;
    std::string out;
    int threads = 1;
};

void add_common(CLI::App* cmd, Common& c)
{
    cmd->add_option("--seed", c.seed, "Master seed");
    cmd->add_option("--replicas", c.replicas, "Number of replicas");
    cmd->add_option("--out", c.out, "Output file (default stdout)");
    cmd->add_option("--threads", c.threads, "Worker threads")->check(CLI::PositiveNumber);
}

// Stream to a file, or stdout when the path is empty or "-".
class Sink {
public:
    explicit Sink(const std::string& path)
    {
        if (!path.empty() && path != "-") {
            file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
            if (!*file_) throw ConfigError("cannot open " + path + " for writing");
        }
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

nlohmann::json read_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    try {
        return nlohmann::json::parse(in, nullptr, true, true);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config " + path + ": " + e.what());
    }
}

ExperimentConfig resolve_config(const std::string& path, const std::vector<std::string>& sets, const Common& c,
                                std::optional<int> threads_override = std::nullopt)
{
    nlohmann::json doc = read_config(path);
    for (const auto& s : sets) apply_override(doc, s);
    if (c.seed) doc["master_seed"] = *c.seed;
    if (c.replicas) doc["replicas"] = *c.replicas;
    if (!c.out.empty()) doc["outputs"]["csv"] = c.out;
    if (threads_override) doc["threads"] = *threads_override;
    return ExperimentConfig::from_json(doc);
}

int cmd_simulate(const std::string& config_path, const std::vector<std::string>& sets, const Common& c,
                 bool threads_given, const std::string& jsonl, const std::string& certs, bool print_config)
{
    ExperimentConfig cfg = resolve_config(config_path, sets, c, threads_given ? std::optional(c.threads) : std::nullopt);
    if (!jsonl.empty()) cfg.outputs.jsonl = jsonl;
    if (!certs.empty()) cfg.outputs.certificates = certs;
    if (print_config) {
        std::cout << cfg.to_json().dump(2) << '\n';
        return kExitOk;
    }

    const ExperimentResult result = run_experiment(cfg);
    {
        Sink sink(cfg.outputs.csv);
        write_csv(sink.stream(), result.rows);
    }
    if (!cfg.outputs.jsonl.empty()) {
        Sink sink(cfg.outputs.jsonl);
        write_jsonl(sink.stream(), result.rows);
    }
    if (!cfg.outputs.certificates.empty()) {
        Sink sink(cfg.outputs.certificates);
        write_certificates_csv(sink.stream(), result.certificates);
    }

    const std::size_t violations = result.bound_violations();
    std::fprintf(stderr, "%s: %zu cells, %zu error cells (%.2f%%), %zu reference errors, %zu bound violations\n",
                 cfg.experiment_id.c_str(), result.cells, result.error_cells,
                 result.cells ? 100.0 * static_cast<double>(result.error_cells) / static_cast<double>(result.cells) : 0.0,
                 result.reference_errors, violations);
    for (const auto& row : result.rows)
        if (row.is_error())
            std::fprintf(stderr, "  n=%lld replica=%d: %s\n", static_cast<long long>(row.n), row.replica,
                         row.error->c_str());
    if (violations > 0) return kExitAssertion;
    if (result.error_cells > 0 || result.reference_errors > 0) return kExitPartial;
    return kExitOk;
}

// "1,2,0:1" -> {1, 2, i}
std::vector<Complex> parse_zero_list(const std::string& text)
{
    std::vector<Complex> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        const auto colon = item.find(':');
        try {
            if (colon == std::string::npos)
                out.emplace_back(std::stod(item), 0.0);
            else
                out.emplace_back(std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1)));
        } catch (const std::exception&) {
            throw ConfigError("cannot parse zero '" + item + "' (use re or re:im)");
        }
    }
    if (out.empty()) throw ConfigError("--zeros is empty");
    return out;
}

int cmd_tower(const std::string& config_path, const std::vector<std::string>& sets, const std::string& zeros,
              int n, int depth, const Common& c)
{
    std::vector<DerivativeTower> towers;
    if (!zeros.empty()) {
        const std::vector<Complex> z = parse_zero_list(zeros);
        ComplexVector v(static_cast<Index>(z.size()));
        for (std::size_t i = 0; i < z.size(); ++i) v[static_cast<Index>(i)] = z[i];
        towers.push_back(derivative_tower(ZeroConfiguration::tight(v), depth));
    } else {
        if (config_path.empty()) throw ConfigError("tower needs --config or --zeros");
        Common local = c;
        local.out.clear();
        const ExperimentConfig cfg = resolve_config(config_path, sets, local);
        const int size = n > 0 ? n : cfg.n_grid.front();
        const int count = c.replicas.value_or(1);
        for (int r = 0; r < count; ++r) {
            RngStream rng = rng_stream(cfg.master_seed, static_cast<std::uint64_t>(r), zeros_stage(size, false));
            towers.push_back(derivative_tower(sample_zeros(cfg, size, rng), depth < 0 ? cfg.k_max : depth, cfg.solver));
        }
    }
    Sink sink(c.out);
    std::ostream& out = sink.stream();
    out << "replica,";
    for (std::size_t r = 0; r < towers.size(); ++r) {
        std::ostringstream body;
        write_tower_csv(body, towers[r]);
        std::string line;
        std::istringstream lines(body.str());
        std::getline(lines, line);
        if (r == 0) out << line << '\n';
        while (std::getline(lines, line)) out << r << ',' << line << '\n';
    }
    return kExitOk;
}

int cmd_verify_identity(IdentitySweepOptions o, const Common& c)
{
    if (c.seed) o.seed = *c.seed;
    if (c.replicas) o.count = *c.replicas;
    o.threads = c.threads;
    const auto cases = identity_sweep(o);
    std::vector<CertificateRow> rows;
    std::size_t identity_fail = 0, c_fail = 0, trace_fail = 0;
    double worst = 0.0;
    for (const auto& k : cases) {
        rows.push_back({k.roots.size(), 0, k.certificate});
        identity_fail += !k.certificate.identity_ok();
        c_fail += !k.certificate.bound_c_ok;
        trace_fail += !k.certificate.bound_trace_ok;
        worst = std::max(worst, k.certificate.residual / (1.0 + std::abs(k.certificate.lhs)));
    }
    Sink sink(c.out);
    write_certificates_csv(sink.stream(), rows);
    std::fprintf(stderr,
                 "%zu certificates: %zu identity failures (worst relative residual %.3g), %zu |c| bound failures, "
                 "%zu trace bound failures\n",
                 cases.size(), identity_fail, worst, c_fail, trace_fail);
    return identity_fail + c_fail + trace_fail > 0 ? kExitAssertion : kExitOk;
}

int cmd_verify_prop2(Prop2SweepOptions o, double tol, const Common& c)
{
    if (c.seed) o.seed = *c.seed;
    if (c.replicas) o.count = *c.replicas;
    o.threads = c.threads;
    const auto cases = prop2_sweep(o);
    Sink sink(c.out);
    sink.stream() << "n,worst_random,worst_critical\n";
    std::size_t failures = 0;
    for (const auto& k : cases) {
        sink.stream() << k.n << ',' << format_double(k.worst_random) << ',' << format_double(k.worst_critical) << '\n';
        failures += !(k.worst_random <= tol && k.worst_critical <= tol);
    }
    std::fprintf(stderr, "%zu configurations, %zu above %.3g\n", cases.size(), failures, tol);
    return failures > 0 ? kExitAssertion : kExitOk;
}

int cmd_check_assumptions(const std::string& config_path, const std::vector<std::string>& sets, double threshold,
                          const Common& c)
{
    Common local = c;
    local.out.clear();
    local.replicas.reset();
    const ExperimentConfig cfg = resolve_config(config_path, sets, local);
    const int count = c.replicas.value_or(1);
    Sink sink(c.out);
    std::ostream& out = sink.stream();
    out << "replica,mode,expression,k,n,value,required,trend_ok\n";
    int failed = 0;
    for (int r = 0; r < count; ++r) {
        const AssumptionReport report = assumption_diagnostics(cfg, threshold, r);
        for (const auto& s : report.series)
            for (std::size_t i = 0; i < s.n.size(); ++i)
                out << r << ',' << to_string(report.mode) << ',' << s.expression << ',' << s.k << ',' << s.n[i] << ','
                    << format_double(s.value[i]) << ',' << (s.required ? 1 : 0) << ',' << (s.trend_ok ? 1 : 0) << '\n';
        if (!report.passed()) ++failed;
    }
    std::fprintf(stderr, "%d of %d replicas fail the finite-n diagnostics at threshold %.3g (diagnostic, not a proof)\n",
                 failed, count, threshold);
    return failed > 0 ? kExitAssertion : kExitOk;
}

int cmd_kac(int n, const std::string& law, double threshold, const Common& c)
{
    const int replicas = c.replicas.value_or(20);
    const auto reps = kac_experiment(c.seed.value_or(10), n, replicas, Law::parse(law), c.threads);
    Sink sink(c.out);
    sink.stream() << "replica,fraction_p,fraction_dp\n";
    double mp = 0.0, mdp = 0.0;
    for (std::size_t r = 0; r < reps.size(); ++r) {
        sink.stream() << r << ',' << format_double(reps[r].fraction_p) << ',' << format_double(reps[r].fraction_dp)
                      << '\n';
        mp += reps[r].fraction_p;
        mdp += reps[r].fraction_dp;
    }
    mp /= static_cast<double>(reps.size());
    mdp /= static_cast<double>(reps.size());
    std::fprintf(stderr, "mean share in annulus: p %.4f, p' %.4f (threshold %.2f)\n", mp, mdp, threshold);
    return mp >= threshold && mdp >= threshold ? kExitOk : kExitAssertion;
}

int cmd_semicircle(int n, int beta, double ks_tol, double levy_tol, const Common& c)
{
    const int replicas = c.replicas.value_or(10);
    const auto reps = semicircle_experiment(c.seed.value_or(11), n, beta, replicas, c.threads);
    Sink sink(c.out);
    sink.stream() << "replica,ks_level0,ks_level1,levy_01\n";
    std::size_t failures = 0;
    for (std::size_t r = 0; r < reps.size(); ++r) {
        const auto& s = reps[r];
        sink.stream() << r << ',' << format_double(s.ks_level0) << ',' << format_double(s.ks_level1) << ','
                      << format_double(s.levy_01) << '\n';
        failures += !(s.ks_level0 <= ks_tol && s.ks_level1 <= ks_tol && s.levy_01 <= levy_tol);
    }
    std::fprintf(stderr, "%zu of %zu replicas outside Kolmogorov %.3g / Levy %.3g\n", failures, reps.size(), ks_tol,
                 levy_tol);
    return failures > 0 ? kExitAssertion : kExitOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"rootlab: zeros of derivatives of random polynomials"};
    app.require_subcommand(1);

    Common common;
    std::string config_path;
    std::vector<std::string> sets;
    std::string jsonl, certs;
    bool print_config = false;

    auto* simulate = app.add_subcommand("simulate", "Run a full experiment from a config file");
    add_common(simulate, common);
    simulate->add_option("--config", config_path, "JSON config file")->required()->check(CLI::ExistingFile);
    simulate->add_option("--set", sets, "Override a config key, e.g. --set ensemble.law=circle");
    simulate->add_option("--jsonl", jsonl, "Also write line-delimited JSON records");
    simulate->add_option("--certificates", certs, "Write comparison certificates here");
    simulate->add_flag("--print-config", print_config, "Print the resolved config and exit");

    std::string zeros;
    int tower_n = 0;
    int depth = -1;
    auto* tower = app.add_subcommand("tower", "Dump the derivative tower of one configuration");
    add_common(tower, common);
    tower->add_option("--config", config_path, "JSON config file (sample replica 0.. of its ensemble)");
    tower->add_option("--set", sets, "Override a config key");
    tower->add_option("--zeros", zeros, "Explicit zeros, comma separated, each re or re:im");
    tower->add_option("--n", tower_n, "Degree to sample (default first grid point)");
    tower->add_option("--depth", depth, "Tower depth (default k_max, or 1 with --zeros)");

    IdentitySweepOptions identity;
    auto* verify_identity = app.add_subcommand("verify-identity", "Comparison certificate sweep");
    add_common(verify_identity, common);
    verify_identity->add_option("--n-min", identity.n_min);
    verify_identity->add_option("--n-max", identity.n_max);
    verify_identity->add_option("--re-bound", identity.re_bound);
    verify_identity->add_option("--im-bound", identity.im_bound);
    verify_identity->add_option("--t-max", identity.t_max);

    Prop2SweepOptions prop2;
    double prop2_tol = 1e-7;
    auto* verify_prop2 = app.add_subcommand("verify-prop2", "Characteristic polynomial residual sweep");
    add_common(verify_prop2, common);
    verify_prop2->add_option("--n-min", prop2.n_min);
    verify_prop2->add_option("--n-max", prop2.n_max);
    verify_prop2->add_option("--re-bound", prop2.re_bound);
    verify_prop2->add_option("--im-bound", prop2.im_bound);
    verify_prop2->add_option("--points", prop2.random_points, "Random evaluation points per configuration");
    verify_prop2->add_option("--tol", prop2_tol);

    double threshold = kDefaultAssumptionThreshold;
    auto* check = app.add_subcommand("check-assumptions", "Finite-n scaling diagnostics");
    add_common(check, common);
    check->add_option("--config", config_path, "JSON config file")->required()->check(CLI::ExistingFile);
    check->add_option("--set", sets, "Override a config key");
    check->add_option("--threshold", threshold, "Value every required series must end below");

    int kac_n = 256;
    std::string kac_law = "kac-gauss";
    double kac_threshold = 0.85;
    auto* kac = app.add_subcommand("kac", "Root concentration of Kac polynomials and their derivatives");
    add_common(kac, common);
    kac->add_option("--n", kac_n);
    kac->add_option("--law", kac_law);
    kac->add_option("--threshold", kac_threshold, "Minimum mean share of roots in 0.85 < |z| < 1.15");

    int sc_n = 1000;
    int sc_beta = 2;
    double ks_tol = 0.05;
    double levy_tol = 0.02;
    auto* semicircle = app.add_subcommand("semicircle", "Tridiagonal beta ensemble against the semicircle law");
    add_common(semicircle, common);
    semicircle->add_option("--n", sc_n);
    semicircle->add_option("--beta", sc_beta)->check(CLI::IsMember({1, 2}));
    semicircle->add_option("--ks-tol", ks_tol);
    semicircle->add_option("--levy-tol", levy_tol);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*simulate) {
            const bool threads_given = simulate->count("--threads") > 0;
            return cmd_simulate(config_path, sets, common, threads_given, jsonl, certs, print_config);
        }
        if (*tower) return cmd_tower(config_path, sets, zeros, tower_n, zeros.empty() ? depth : (depth < 0 ? 1 : depth), common);
        if (*verify_identity) return cmd_verify_identity(identity, common);
        if (*verify_prop2) return cmd_verify_prop2(prop2, prop2_tol, common);
        if (*check) return cmd_check_assumptions(config_path, sets, threshold, common);
        if (*kac) return cmd_kac(kac_n, kac_law, kac_threshold, common);
        if (*semicircle) return cmd_semicircle(sc_n, sc_beta, ks_tol, levy_tol, common);
    } catch (const DomainError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitPartial;
    }
    return kExitUsage;
}
