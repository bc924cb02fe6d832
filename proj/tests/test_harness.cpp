#include <catch_amalgamated.hpp>

#include <sstream>
#include <string>

#include "rootlab/harness.hpp"

using namespace rootlab;
using nlohmann::json;

namespace {

json small_config()
{
    return json::parse(R"({
        "experiment_id": "unit",
        "ensemble": {"kind": "type1", "law": "circle"},
        "n_grid": [3],
        "k_max": 2,
        "replicas": 1,
        "master_seed": 77
    })");
}

std::string csv_of(const ExperimentResult& r)
{
    std::ostringstream out;
    write_csv(out, r.rows);
    return out.str();
}

int count_lines(const std::string& s)
{
    int n = 0;
    for (char c : s) n += c == '\n';
    return n;
}

} // namespace

TEST_CASE("one cell yields k_max + 1 rows", "[harness]")
{
    const auto config = ExperimentConfig::from_json(small_config());
    const auto result = run_experiment(config);
    REQUIRE(result.rows.size() == 3);
    CHECK(result.cells == 1);
    CHECK(result.error_cells == 0);
    for (int k = 0; k < 3; ++k) {
        const auto& row = result.rows[static_cast<std::size_t>(k)];
        CHECK(row.k == k);
        CHECK(row.n == 3);
        CHECK(row.experiment_id == "unit");
        CHECK(row.runtime_ms == 0.0);
    }
    CHECK(result.rows[0].diff_to_k0 == 0.0);
    CHECK_FALSE(result.rows[0].bound);
    REQUIRE(result.rows[1].bound);
    CHECK(result.rows[1].diff_to_k0 <= *result.rows[1].bound);

    const std::string csv = csv_of(result);
    CHECK(csv.rfind("experiment_id,n,k,ell,seed,value_re,value_im,centered,center_re,center_im,diff_to_k0,bound,runtime_ms\n", 0) ==
          0);
    CHECK(count_lines(csv) == 4);
}

TEST_CASE("seed column is the stream key of the cell", "[harness]")
{
    const auto config = ExperimentConfig::from_json(small_config());
    const auto result = run_experiment(config);
    CHECK(result.rows[0].seed == RngStream::derive_key(77, 0, "zeros:n=3"));
    CHECK(zeros_stage(3, false) == "zeros:n=3");
    CHECK(zeros_stage(3, true) == "reference-zeros:n=3");
}

TEST_CASE("reruns and thread counts give identical CSV", "[harness]")
{
    json j = small_config();
    j["n_grid"] = {5, 20, 60};
    j["replicas"] = 6;
    auto config = ExperimentConfig::from_json(j);
    const std::string once = csv_of(run_experiment(config));
    CHECK(once == csv_of(run_experiment(config)));
    config.threads = 8;
    CHECK(once == csv_of(run_experiment(config)));
}

TEST_CASE("k_max = 0 has no differences", "[harness]")
{
    json j = small_config();
    j["k_max"] = 0;
    j["replicas"] = 3;
    const auto result = run_experiment(ExperimentConfig::from_json(j));
    REQUIRE(result.rows.size() == 3);
    for (const auto& row : result.rows) CHECK(row.diff_to_k0 == 0.0);
}

TEST_CASE("empirical centering uses a separate batch", "[harness]")
{
    json j = small_config();
    j["ensemble"]["law"] = "uniform[-1,1]";
    j["n_grid"] = {10, 20};
    j["k_max"] = 1;
    j["replicas"] = 4;
    j["plan"] = {{"a", "sqrt(n)"}};
    j["centering"] = {{"method", "empirical"}, {"reference_replicas", 5}};
    const auto result = run_experiment(ExperimentConfig::from_json(j));
    REQUIRE(result.rows.size() == 16);
    for (const auto& row : result.rows) {
        CHECK(row.centered);
        CHECK(row.center);
        // Bounds only apply to uncentered a_n = n style runs.
        CHECK_FALSE(row.bound);
    }
    // Centers are shared across replicas at the same (n, k).
    CHECK(*result.rows[0].center == *result.rows[2].center);
}

TEST_CASE("analytic centering subtracts the quadrature mean", "[harness]")
{
    json j = small_config();
    j["ensemble"]["law"] = "uniform[-1,1]";
    j["k_max"] = 0;
    j["centering"] = {{"method", "analytic"}};
    const auto result = run_experiment(ExperimentConfig::from_json(j));
    REQUIRE(result.rows.size() == 1);
    CHECK(std::abs(result.rows[0].center->real() - 0.85562) < 1e-5);
}

TEST_CASE("config validation", "[harness]")
{
    auto bad = [](auto&& edit) {
        json j = small_config();
        edit(j);
        return ExperimentConfig::from_json(j);
    };
    CHECK_THROWS_AS(bad([](json& j) { j["n_grid"] = {10, 5}; }), ConfigError);
    CHECK_THROWS_AS(bad([](json& j) { j["k_max"] = 3; }), ConfigError);
    CHECK_THROWS_AS(bad([](json& j) { j["unknown"] = 1; }), ConfigError);
    CHECK_THROWS_AS(bad([](json& j) { j.erase("n_grid"); }), ConfigError);
    CHECK_THROWS_AS(bad([](json& j) { j["ell"] = 2; }), ConfigError);
    CHECK_THROWS_AS(bad([](json& j) { j["ensemble"]["law"] = "cauchy"; }), ConfigError);
    CHECK_THROWS_AS(bad([](json& j) { j["ensemble"]["kind"] = "type2"; }), ConfigError);
    CHECK_THROWS_AS(bad([](json& j) { j["ensemble"] = {{"kind", "type3"}, {"law", "beta-tridiag(beta=4)"}}; }),
                    ConfigError);
    CHECK_THROWS_AS(bad([](json& j) { j["centering"] = {{"method", "analytic"}}; }), ConfigError);
    CHECK_THROWS_AS(bad([](json& j) { j["centering"] = {{"method", "empirical"}, {"reference_replicas", 1}}; }),
                    ConfigError);
    CHECK_THROWS_AS(bad([](json& j) { j["master_seed"] = -4; }), ConfigError);
    CHECK_THROWS_AS(bad([](json& j) { j["replicas"] = "many"; }), ConfigError);

    CHECK(bad([](json& j) { j["master_seed"] = "0x10"; }).master_seed == 16);
    CHECK(bad([](json& j) { j["ensemble"] = {{"kind", "type3"}}; j["ell"] = 2; j["plan"] = {{"b", "1"}}; }).beta() == 2);
}

TEST_CASE("config round trips through JSON", "[harness]")
{
    json j = small_config();
    j["plan"] = {{"a", "n"}, {"b", "sqrt(n)"}};
    j["ell"] = 3;
    j["certificate_t"] = {0.5, 2.0};
    const auto config = ExperimentConfig::from_json(j);
    const auto again = ExperimentConfig::from_json(config.to_json());
    CHECK(again.to_json() == config.to_json());
    CHECK(again.plan.mode() == AssumptionMode::A4);
}

TEST_CASE("dotted overrides", "[harness]")
{
    json j = small_config();
    apply_override(j, "ensemble.law=uniform[-1,1]");
    apply_override(j, "replicas=12");
    apply_override(j, "solver.max_iter=50");
    CHECK(j["ensemble"]["law"] == "uniform[-1,1]");
    CHECK(j["replicas"] == 12);
    CHECK(j["solver"]["max_iter"] == 50);
    CHECK_THROWS_AS(apply_override(j, "replicas"), ConfigError);
    CHECK_THROWS_AS(apply_override(j, "=3"), ConfigError);
}

TEST_CASE("solver failure becomes an error row", "[harness]")
{
    json j = small_config();
    j["n_grid"] = {40};
    j["replicas"] = 2;
    j["solver"] = {{"max_iter", 1}};
    const auto result = run_experiment(ExperimentConfig::from_json(j));
    CHECK(result.error_cells == 2);
    REQUIRE(result.rows.size() == 2);
    for (const auto& row : result.rows) {
        CHECK(row.is_error());
        CHECK(row.k == -1);
    }
    std::ostringstream jl;
    write_jsonl(jl, result.rows);
    const auto line = json::parse(jl.str().substr(0, jl.str().find('\n')));
    CHECK(line.contains("error"));
    CHECK(count_lines(csv_of(result)) == 3);
}

TEST_CASE("certificates are emitted per t", "[harness]")
{
    json j = small_config();
    j["n_grid"] = {2, 4};
    j["k_max"] = 1;
    j["replicas"] = 2;
    j["certificate_t"] = {0.5, 1.0, 2.0};
    const auto result = run_experiment(ExperimentConfig::from_json(j));
    CHECK(result.certificates.size() == 12);
    std::ostringstream out;
    write_certificates_csv(out, result.certificates);
    CHECK(out.str().rfind("n,t,residual,bound_c_ok,bound_trace_ok\n", 0) == 0);
    // n = 2 is exact.
    for (const auto& c : result.certificates)
        if (c.n == 2) CHECK(c.certificate.identity_ok());
}

TEST_CASE("format_double keeps every bit", "[harness]")
{
    for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17}) CHECK(std::stod(format_double(v)) == v);
    CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("tower invariants on a known tower", "[harness]")
{
    const auto tower = derivative_tower(ZeroConfiguration::real(Eigen::Vector4d(-2.0, -1.0, 0.5, 3.0)), 3);
    const auto report = check_tower_invariants(tower);
    CHECK(report.passed());
    CHECK(report.mean_drift < kMeanTolerance);
    CHECK(report.abs_increase <= 1e-12);
}

TEST_CASE("parallel_for visits every index once and rethrows", "[harness]")
{
    std::vector<int> hits(100, 0);
    parallel_for(hits.size(), 4, [&](std::size_t i) { ++hits[i]; });
    for (int h : hits) REQUIRE(h == 1);
    CHECK_THROWS_AS(parallel_for(10, 3, [](std::size_t i) {
                        if (i == 7) throw DomainError("seven");
                    }),
                    DomainError);
}
