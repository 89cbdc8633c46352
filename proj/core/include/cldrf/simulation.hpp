#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "cldrf/metrics.hpp"
#include "cldrf/selection.hpp"

namespace cldrf {

enum class Scenario {
    Motivating,   // 4 clusters, quadratic outcomes, treatment intercept
    LinearC3,     // first three clusters of the linear 4-cluster design
    LinearC4,
    LinearC5,
    RandomC3,     // randomly assigned treatment t ~ N(1,1), no covariates
    RandomC4,
    RandomC5,
};

std::string scenario_name(Scenario s);
Scenario parse_scenario(const std::string& name);  // throws std::invalid_argument

int scenario_cluster_count(Scenario s);
int scenario_covariate_count(Scenario s);

/// Outcome terms and treatment-intercept convention matching the scenario's
/// generating design (quadratic with intercept for the motivating scenario,
/// linear otherwise; random scenarios model the treatment mean by intercept).
ModelSpec scenario_default_spec(Scenario s);

struct ScenarioConfig {
    Scenario scenario = Scenario::LinearC4;
    int n = 800;  // total units; must be divisible by the scenario's C
    std::uint64_t seed = 0;

    void validate() const;
};

/// Generated sample with its ground truth attached.
struct LabeledDataset {
    Dataset data;
    ClusterAssignment truth;
    // Mean outcome polynomial per cluster: mu(t,c) = a0 + a1*t + a2*t^2.
    std::vector<std::array<double, 3>> true_coeffs;

    double true_mu(int cluster, double t) const {
        const auto& a = true_coeffs[static_cast<std::size_t>(cluster - 1)];
        return a[0] + a[1] * t + a[2] * t * t;
    }
};

/// Draws a dataset from the scenario's published design, deterministically in
/// the seed. outcome_noise_sd = 0 yields noiseless outcomes (harness switch).
LabeledDataset generate(const ScenarioConfig& config, double outcome_noise_sd = 1.0);

struct RepRecord {
    std::uint64_t seed = 0;
    bool failed = false;
    std::string failure_reason;
    int chosen_C = 0;
    double rand = 0.0;
    // Indexed by true cluster; NaN when unmatched or without common support.
    std::vector<double> adrf_rmse;
};

struct ReplicationSummary {
    Scenario scenario = Scenario::LinearC4;
    int n = 0;
    int true_C = 0;
    int reps = 0;
    int failures = 0;
    std::vector<RepRecord> records;

    double rand_mean = 0.0;
    double rand_sd = 0.0;
    int chosen_mode = 0;
    double chosen_hit_rate = 0.0;         // fraction of reps with chosen_C == true_C
    std::vector<double> rmse_mean;        // per true cluster, over matched reps
};

struct ReplicationOptions {
    int reps = 100;
    int C_max = 7;
    FitOptions fit;      // seed/spec per rep are derived/overridden internally
    SelectionOptions selection;  // C_max/fit fields overridden internally
    int threads = 1;     // replication-level parallelism; 0 = hardware
    int adrf_grid_points = 100;
};

/// Full replication study: per rep, generate with a derived seed, select the
/// cluster count, fit, and score cluster recovery and dose-response error
/// against the truth on the common support. Per-rep failures are recorded,
/// never fatal.
ReplicationSummary run_replications(const ScenarioConfig& config,
                                    const ReplicationOptions& options);

}  // namespace cldrf
