#pragma once

#include <span>

#include "cldrf/types.hpp"

namespace cldrf {

/// Evaluates the outcome design row z_i for one unit at (t, r).
Vector build_design(double t, double r, const ModelSpec& spec);

/// Fills row `row` of Z with the design for (t, r).
void build_design_into(double t, double r, const ModelSpec& spec, Matrix& Z,
                       Eigen::Index row);

/// Design matrix for a whole sample given current GPS values.
Matrix build_design_matrix(const Vector& t, const Vector& r, const ModelSpec& spec);

/// Least-squares coefficients over the member rows of Z.
///
/// Solves min_a sum_{i in members} (y_i - a'z_i)^2 by column-pivoted
/// Householder QR. Throws RankDeficientError when the member design has
/// rank < k at relative pivot tolerance 1e-10 (this covers
/// |members| < k as well).
Vector weighted_ols(const Matrix& Z, const Vector& y, std::span<const int> members,
                    int cluster_id = -1);

struct TreatmentFit {
    Vector beta;    // p entries, or p+1 with leading intercept
    double sigma2;  // ML residual variance, floored at kSigma2Floor
};

/// Gaussian treatment model fitted by maximum likelihood over one cluster.
///
/// Regresses t on X (optionally with intercept) over the member rows;
/// sigma2 = RSS / |members| (ML divisor). For p = 0 with intercept the
/// coefficient is the member mean of t.
/// Throws InsufficientMembersError when |members| < (p + intercept) + 1
/// and RankDeficientError when the member covariates are collinear.
TreatmentFit fit_treatment_cluster(const Matrix& X, const Vector& t,
                                   std::span<const int> members,
                                   const ModelSpec& spec, int cluster_id = -1);

/// Treatment-model mean beta'x for one unit (handles the intercept layout).
double treatment_mean(const Vector& x, const Vector& beta, bool intercept);

/// Conditional treatment density r_i = N(t; beta'x, sigma2), computed via
/// the log density so extreme tails underflow cleanly to 0.
double gps_density(double t, const Vector& x, const Vector& beta, double sigma2,
                   bool intercept);

double log_gps_density(double t, const Vector& x, const Vector& beta, double sigma2,
                       bool intercept);

}  // namespace cldrf
