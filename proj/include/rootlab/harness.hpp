#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <iosfwd>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "rootlab/cheungng.hpp"
#include "rootlab/ensembles.hpp"
#include "rootlab/rootfind.hpp"
#include "rootlab/statistics.hpp"

namespace rootlab {

/// Bad configuration file or field.
class ConfigError : public DomainError {
public:
    using DomainError::DomainError;
};

enum class CenteringMethod { None, Empirical, Analytic };

std::string to_string(CenteringMethod method);
CenteringMethod parse_centering_method(std::string_view text);

struct OutputPaths {
    std::string csv;           ///< empty: stdout from the CLI
    std::string jsonl;         ///< empty: not written
    std::string certificates;  ///< empty: not written
};

/**
 * One Monte Carlo experiment. Loaded from JSON:
 *
 *   {
 *     "experiment_id": "uniform-lln",
 *     "ensemble": {"kind": "type1", "law": "uniform[-1,1]", "c0": null},
 *     "n_grid": [10, 50, 200],
 *     "k_max": 1,
 *     "ell": 1,
 *     "plan": {"a": "n", "b": null, "mode": null},
 *     "test_function": "gauss",
 *     "replicas": 50,
 *     "master_seed": 20240601,
 *     "centering": {"method": "none", "reference_replicas": 0},
 *     "bounds": true,
 *     "certificate_t": [],
 *     "record_timing": false,
 *     "threads": 1,
 *     "solver": {"tol_newton": 1e-10, "max_iter": 200, "duplicate_tol": 1e-12, "jitter": 1e-3, "seed": 12648430},
 *     "outputs": {"csv": "out.csv", "jsonl": "", "certificates": ""}
 *   }
 *
 * Every key is optional except ensemble.law and n_grid. Type 3 uses the law
 * "beta-tridiag(beta=2)" (the default for that kind); beta is 1 or 2.
 */
struct ExperimentConfig {
    std::string experiment_id = "experiment";
    EnsembleSpec ensemble;
    std::vector<int> n_grid;
    int k_max = 1;
    int ell = 1;
    ScalingPlan plan = ScalingPlan::parse({"a=n"});
    std::string test_function = "gauss";
    int replicas = 1;
    std::uint64_t master_seed = 0;
    CenteringMethod centering = CenteringMethod::None;
    int reference_replicas = 0;  ///< 0 means the same as replicas
    bool bounds = true;
    std::vector<double> certificate_t;
    bool record_timing = false;
    int threads = 1;
    SolverOptions solver;
    OutputPaths outputs;

    /// Throws ConfigError on any broken invariant.
    void validate() const;

    /// beta parameter of a Type 3 law.
    int beta() const;

    /// Imaginary bound the test function is certified on.
    double strip() const;

    static ExperimentConfig from_json(const nlohmann::json& j);
    static ExperimentConfig load(const std::filesystem::path& path);
    nlohmann::json to_json() const;
};

/// Sets a dotted key such as "ensemble.law" in a config document. The value is
/// parsed as JSON when possible and kept as a string otherwise.
void apply_override(nlohmann::json& doc, const std::string& assignment);

struct ResultRow {
    std::string experiment_id;
    Index n = 0;
    Index k = 0;  ///< -1 on error rows
    int ell = 1;
    int replica = 0;
    std::uint64_t seed = 0;
    Complex value;
    bool centered = false;
    std::optional<Complex> center;
    double diff_to_k0 = 0.0;
    std::optional<double> bound;
    double runtime_ms = 0.0;
    std::optional<std::string> error;

    bool is_error() const { return error.has_value(); }
};

struct CertificateRow {
    Index n = 0;
    int replica = 0;
    ComparisonCertificate certificate;
};

struct ExperimentResult {
    std::vector<ResultRow> rows;  ///< sorted by n, replica, k
    std::vector<CertificateRow> certificates;
    std::size_t cells = 0;
    std::size_t error_cells = 0;
    std::size_t reference_errors = 0;

    /// Rows whose attached bound is below diff_to_k0.
    std::size_t bound_violations() const;
};

/// Zeros of one replica: Type 1 sampled directly, Type 2 solved from Kac
/// coefficients, Type 3 eigenvalues of a beta-Hermite tridiagonal matrix.
ZeroConfiguration sample_zeros(const ExperimentConfig& config, int n, RngStream& rng);

/// Stage tag of the zero draw for one grid point, with a separate family for reference batches.
std::string zeros_stage(int n, bool reference);

ExperimentResult run_experiment(const ExperimentConfig& config);

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows);
void write_jsonl(std::ostream& out, const std::vector<ResultRow>& rows);
void write_certificates_csv(std::ostream& out, const std::vector<CertificateRow>& rows);
void write_tower_csv(std::ostream& out, const DerivativeTower& tower);

/// Same snapshot of a double as the CSV writer produces ("%.17g").
std::string format_double(double v);

// Verification sweeps -------------------------------------------------------

struct IdentitySweepOptions {
    std::uint64_t seed = 1;
    int count = 1000;
    int n_min = 2;
    int n_max = 50;
    double re_bound = 10.0;
    double im_bound = 1.0;
    double t_max = 5.0;
    int real_every = 4;  ///< every real_every-th case has real zeros (C0 = 0); 0 disables
    int threads = 1;
};

struct IdentityCase {
    ZeroConfiguration roots;
    ZeroConfiguration critical;
    ComparisonCertificate certificate;
};

std::vector<IdentityCase> identity_sweep(const IdentitySweepOptions& options);

struct Prop2SweepOptions {
    std::uint64_t seed = 2;
    int count = 100;
    int n_min = 2;
    int n_max = 40;
    double re_bound = 1.0;
    double im_bound = 1.0;
    int random_points = 20;
    int threads = 1;
};

struct Prop2Case {
    Index n = 0;
    double worst_random = 0.0;
    double worst_critical = 0.0;
};

std::vector<Prop2Case> prop2_sweep(const Prop2SweepOptions& options);

struct TowerInvariantReport {
    double mean_drift = 0.0;       ///< max_k |mean_k - mean_0| / scale
    double abs_increase = 0.0;     ///< max_k (mean|.|_{k+1} - mean|.|_k) / scale, <= 0 when monotone
    bool mean_ok = true;
    bool abs_monotone_ok = true;
    bool hull_ok = true;
    bool interlacing_ok = true;    ///< vacuous for complex towers
    bool im_bound_ok = true;

    bool passed() const { return mean_ok && abs_monotone_ok && hull_ok && interlacing_ok && im_bound_ok; }
};

inline constexpr double kMeanTolerance = 1e-10;
inline constexpr double kHullTolerance = 1e-9;

TowerInvariantReport check_tower_invariants(const DerivativeTower& tower);

struct TowerSweepOptions {
    std::uint64_t seed = 3;
    int count = 500;
    int n_min = 2;
    int n_max = 64;
    int k_max = 5;
    int threads = 1;
};

struct TowerCase {
    ZeroConfiguration roots;
    int depth = 0;
    TowerInvariantReport report;
    std::optional<std::string> error;
};

std::vector<TowerCase> tower_sweep(const TowerSweepOptions& options);

struct KacReplica {
    double fraction_p = 0.0;
    double fraction_dp = 0.0;
};

/// Share of roots of p and p' in the annulus inner < |z| < outer.
std::vector<KacReplica> kac_experiment(std::uint64_t seed, int n, int replicas, const Law& law, int threads,
                                       double inner = 0.85, double outer = 1.15);

struct SemicircleReplica {
    double ks_level0 = 0.0;
    double ks_level1 = 0.0;
    double levy_01 = 0.0;
};

std::vector<SemicircleReplica> semicircle_experiment(std::uint64_t seed, int n, int beta, int replicas, int threads);

/// Level-0 zeros of one replica at every grid point, fed to check_assumptions.
AssumptionReport assumption_diagnostics(const ExperimentConfig& config, double threshold = kDefaultAssumptionThreshold,
                                        int replica = 0);

/// Runs fn(i) for i in [0, count) on up to `threads` workers. The first exception is rethrown.
template <typename Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn)
{
    const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, threads)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

} // namespace rootlab
