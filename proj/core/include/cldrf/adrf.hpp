#pragma once

#include "cldrf/estimator.hpp"

namespace cldrf {

/// Per-cluster average dose-response curve on a treatment grid.
struct AdrfCurve {
    int cluster = 0;
    std::vector<double> grid;  // strictly increasing
    std::vector<double> mu;
    double support_min = 0.0;  // observed member treatment range
    double support_max = 0.0;

    bool in_support(double t) const {
        return t >= support_min && t <= support_max;
    }
};

struct TreatmentGrid {
    std::vector<double> values;
    bool degenerate = false;  // cluster had a single distinct treatment value
};

/// Evenly spaced grid spanning the cluster's observed treatment range
/// (or the full-sample range when extended). A single distinct treatment
/// value collapses the grid to that point and flags it.
TreatmentGrid default_grid(const Dataset& data, const FitResult& fit, int cluster,
                           int points = 100, bool extended = false);

/// mu_hat(t, c) = mean over cluster members of alpha_c' z(t, r_i(t)), with
/// the GPS re-evaluated at the counterfactual dose t for each member's
/// covariates. Throws std::out_of_range for an unknown cluster.
AdrfCurve estimate_adrf(const Dataset& data, const FitResult& fit, int cluster,
                        const std::vector<double>& grid, const ModelSpec& spec);

}  // namespace cldrf
