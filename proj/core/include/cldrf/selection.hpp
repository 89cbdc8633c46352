#pragma once

#include <map>
#include <optional>
#include <string>

#include "cldrf/estimator.hpp"

namespace cldrf {

enum class ElbowMethod { Eq10, LineDistance };
enum class ElbowTarget { InformationCriterion, RawObjective };
enum class PenaltyMode { TotalParams, PerClusterParams };
enum class BaselineMode { GpsFit, PlainOls };

struct SelectionOptions {
    int C_max = 7;
    ElbowMethod method = ElbowMethod::Eq10;
    ElbowTarget target = ElbowTarget::InformationCriterion;
    PenaltyMode penalty = PenaltyMode::TotalParams;
    BaselineMode baseline = BaselineMode::GpsFit;
    FitOptions fit;  // fit.C is ignored; candidates sweep C = 1..C_max
};

struct ElbowChoice {
    int C = 0;
    bool degenerate = false;  // values non-decreasing everywhere: no elbow
};

struct Candidate {
    int C = 0;
    double ic = 0.0;
    double j = 0.0;
    FitResult fit;
};

struct SelectionReport {
    std::vector<Candidate> candidates;  // sorted by C ascending, C >= 2
    double baseline_ic = 0.0;
    double baseline_j = 0.0;
    FitResult baseline_fit;  // the C = 1 reference fit
    int chosen_C = 0;
    bool degenerate = false;
    ElbowMethod method = ElbowMethod::Eq10;
    // Candidates whose fit failed, with the reason; excluded from the elbow.
    std::map<int, std::string> failed;

    const Candidate* candidate(int C) const;
};

/// BIC-like criterion: Gaussian outcome negative log-likelihood with
/// per-cluster ML residual variances plus a log(n) penalty per parameter.
/// The default parameter count is C * |outcome_terms|.
double information_criterion(const Dataset& data, const FitResult& fit,
                             const ModelSpec& spec,
                             PenaltyMode penalty = PenaltyMode::TotalParams);

/// Chooses the cluster count from criterion values at c = 2..C_max.
///
/// Eq10 minimizes (baseline / C_max) * c + value(c); LineDistance maximizes
/// the vertical gap between the chord from (0, baseline) to
/// (C_max, value(C_max)) and the curve. Non-decreasing values carry no elbow:
/// the choice falls back to the minimal value and the degenerate flag is set.
ElbowChoice elbow_select(const std::vector<double>& values, double baseline,
                         ElbowMethod method = ElbowMethod::Eq10);

/// Fits C = 1 (baseline) and C = 2..C_max, then applies the elbow rule to
/// the criterion sequence. Every candidate FitResult is retained for
/// downstream dose-response construction.
SelectionReport select_clusters(const Dataset& data, const SelectionOptions& options);

}  // namespace cldrf
