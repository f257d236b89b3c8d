#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qfr/bridge.hpp"
#include "qfr/types.hpp"

namespace qfr {

enum class Dgp : std::uint8_t {
    CobbDouglas,     // y = prod_k x_k^(0.8/k) + eps, x ~ U[1,10]
    QuadraticMisspec, // y = x + 0.1 x^2 + eps (d = 1)
    Outlier,          // Cobb-Douglas block plus a few U[90,100] input outliers
};

/// One Monte Carlo scenario: the data-generating process, the error law,
/// which estimators run at which quantile levels, and the replication plan.
struct ScenarioConfig {
    std::string id;
    int n = 0;
    int d = 1;
    double sigma2 = 1.88;
    double lambda = 1.66;
    ErrorKind error_kind = ErrorKind::Composite;
    Dgp dgp = Dgp::CobbDouglas;
    std::vector<double> tau_list;
    int replications = 1;
    std::uint64_t base_seed = 0;
    std::vector<Method> estimators;
    bool expectile_empirical = false; // efron calibration instead of the theoretical map
    int outlier_regular = 200;        // outlier DGP block sizes
    int outlier_count = 3;
    int rep_offset = 0; // first replication index (stream index), for batching

    void validate() const;
    ErrorSpec error_spec() const;
};

/// sigma_u = sigma*lambda/sqrt(1+lambda^2), sigma_v = sigma/sqrt(1+lambda^2).
std::pair<double, double> sigmas_from(double sigma2, double lambda);

struct GeneratedData {
    Dataset dataset;
    std::map<double, std::vector<double>> true_quantiles; // tau -> values at the inputs
};

/// Deterministic draw for one replication: the per-replication stream is
/// seeded by base_seed xor (replication * odd constant), normals via inverse
/// CDF, half-normals as |normal|. Per observation the inputs are drawn first,
/// then the error components.
GeneratedData generate(const ScenarioConfig& config, int replication);

std::pair<double, double> mse_bias(std::span<const double> fitted, std::span<const double> truth);

struct CellStats {
    double mse = 0.0;
    double bias = 0.0;
    double mse_se = 0.0;         // Monte Carlo standard error of the MSE mean
    double violation_rate = 0.0; // share of replications flagged
    int n_fail = 0;
    double seconds = 0.0;
};

struct ScenarioResult {
    std::string scenario_id;
    int replications = 0;
    struct Row {
        Method estimator;
        double tau;
        CellStats stats;
    };
    std::vector<Row> rows;

    const CellStats* find(Method m, double tau) const;
};

/// Runs every replication of a scenario and aggregates MSE/bias/violation
/// statistics per (estimator, tau). Individual estimation failures are
/// excluded and counted; more than 5% failures in a cell aborts the scenario.
ScenarioResult run_experiment(const ScenarioConfig& config, int threads = 1);

struct WinRateRow {
    std::string family; // "concavity" (CER vs CQR) or "monotonicity" (ICER vs ICQR)
    double tau;
    double win_rate; // share of scenarios with expectile MSE < quantile MSE
    int n_scenarios;
};

/// Table-5-style comparison across paired scenario results.
std::vector<WinRateRow> expectile_win_rate(const std::vector<ScenarioResult>& results);

/// JSON scenario file ({"scenarios": [...]}, field names as in ScenarioConfig).
std::vector<ScenarioConfig> load_scenarios(const std::string& path);

/// results CSV: scenario_id, estimator, tau, mse, bias, mse_se,
/// violation_rate, n_fail; 9 significant digits.
void write_results_csv(const std::string& path, const std::vector<ScenarioResult>& results);

Method parse_method(const std::string& name);

} // namespace qfr
