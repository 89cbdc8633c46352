#pragma once

#include <cstdint>
#include <optional>

#include "cldrf/model_core.hpp"
#include "cldrf/types.hpp"

namespace cldrf {

enum class InitStrategy { RandomPartition, ResidualKmeans };

struct FitOptions {
    int C = 1;
    int max_iters = 100;
    int n_starts = 10;
    std::uint64_t seed = 0;
    InitStrategy init = InitStrategy::ResidualKmeans;
    ModelSpec spec = ModelSpec::linear();
    int threads = 1;  // 0 = hardware concurrency
    // Pins the first start's initial assignment; remaining starts are skipped.
    std::optional<ClusterAssignment> init_assignment;
    bool record_half_steps = false;

    // Throws std::invalid_argument unless C >= 1, iteration/start counts are
    // positive, the spec is valid, and C <= n / (|outcome_terms| + 1).
    void validate(const Dataset& data) const;
};

// Objective values bracketing the two exact-minimization half-steps of one
// iteration. before_params is NaN on the first iteration (no previous
// parameters exist yet).
struct HalfStepRecord {
    double before_params;
    double after_params;
    double after_assign;
};

struct StartDiagnostics {
    std::uint64_t seed = 0;
    bool failed = false;
    std::string failure_reason;
    std::vector<HalfStepRecord> half_steps;
};

struct FitResult {
    ClusterAssignment assignment;
    TreatmentModel treatment;
    OutcomeModel outcome;
    GpsVector gps;
    std::vector<double> objective_trace;
    int iterations = 0;
    bool converged = false;
    std::uint64_t seed_used = 0;

    // Populated when FitOptions::record_half_steps is set, one entry per start.
    std::vector<StartDiagnostics> start_diagnostics;

    double objective() const {
        return objective_trace.empty() ? 0.0 : objective_trace.back();
    }
};

/// Initial assignment plus the GPS implied by per-cluster treatment fits.
///
/// RandomPartition deals one unit to each cluster before assigning the rest
/// uniformly, so every cluster is nonempty. ResidualKmeans regresses y on
/// {1, t} globally and runs 1-d k-means (k-means++ seeding, 25 Lloyd
/// iterations) on the signed residuals.
std::pair<ClusterAssignment, GpsVector> initialize(const Dataset& data,
                                                   const FitOptions& options,
                                                   std::uint64_t seed);

inline std::pair<ClusterAssignment, GpsVector> initialize(const Dataset& data,
                                                          const FitOptions& options) {
    return initialize(data, options, options.seed);
}

/// One membership update: each unit moves to the cluster minimizing its
/// squared residual, with the design built from the unit's current (stale)
/// GPS value. Ties go to the lowest cluster index.
ClusterAssignment assign_step(const Dataset& data, const GpsVector& gps,
                              const OutcomeModel& outcome, const ModelSpec& spec);

/// Refits the per-cluster treatment models on the current members and
/// re-evaluates each unit's GPS under its own cluster.
std::pair<TreatmentModel, GpsVector> update_gps(const Dataset& data,
                                                const ClusterAssignment& assignment,
                                                const ModelSpec& spec);

/// Weighted sum of squared outcome residuals (the estimator's objective).
double objective(const Dataset& data, const ClusterAssignment& assignment,
                 const OutcomeModel& outcome, const GpsVector& gps,
                 const ModelSpec& spec);

/// Full alternating fit: n_starts independent starts, each alternating
/// parameter, membership and GPS updates until the partition repeats or
/// max_iters is hit. Returns the start with the lowest final objective
/// (ties broken by start index). Throws AllStartsFailedError when every
/// start dies in an unrepairable degeneracy.
FitResult fit(const Dataset& data, const FitOptions& options);

}  // namespace cldrf
