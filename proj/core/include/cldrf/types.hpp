#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace cldrf {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Thrown when a (member-restricted) design matrix has numerical rank below
// its column count. Signals a degenerate cluster; callers repair or abort.
class RankDeficientError : public std::runtime_error {
public:
    explicit RankDeficientError(std::string what, int cluster = -1)
        : std::runtime_error(std::move(what)), cluster_(cluster) {}
    int cluster() const noexcept { return cluster_; }

private:
    int cluster_;
};

class InsufficientMembersError : public std::runtime_error {
public:
    explicit InsufficientMembersError(std::string what, int cluster = -1)
        : std::runtime_error(std::move(what)), cluster_(cluster) {}
    int cluster() const noexcept { return cluster_; }

private:
    int cluster_;
};

// Every multi-start run of the estimator hit an unrepairable degeneracy.
class AllStartsFailedError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class LengthMismatchError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Basis terms available for the outcome design row.
enum class Term { One, T, T2, R, R2, TxR };

std::string term_name(Term t);

/// Outcome-model functional form plus the treatment-model intercept switch.
///
/// The outcome design is an ordered list of terms drawn from
/// {1, t, t^2, r, r^2, t*r}; the same form is shared by all clusters.
struct ModelSpec {
    bool treatment_intercept = true;
    std::vector<Term> outcome_terms;

    static ModelSpec linear(bool intercept = true) {
        return ModelSpec{intercept, {Term::One, Term::T, Term::R}};
    }
    static ModelSpec quadratic(bool intercept = true) {
        return ModelSpec{intercept,
                         {Term::One, Term::T, Term::T2, Term::R, Term::R2, Term::TxR}};
    }

    int num_terms() const { return static_cast<int>(outcome_terms.size()); }

    // Throws std::invalid_argument when the term list is empty, has
    // duplicates, or includes a square without its base term.
    void validate() const;
};

/// Observed sample: outcomes y, treatment intensities t, covariate matrix X.
/// p = 0 is allowed (randomly assigned treatment, no covariates).
struct Dataset {
    Vector y;
    Vector t;
    Matrix X;  // n x p

    Eigen::Index n() const { return y.size(); }
    Eigen::Index p() const { return X.cols(); }

    // Checks shared length n >= 1 and finiteness of all entries.
    void validate() const;
};

/// Hard partition of n units into C clusters; labels are 1-based.
struct ClusterAssignment {
    std::vector<int> labels;  // each in {1..C}
    int C = 0;

    Eigen::Index n() const { return static_cast<Eigen::Index>(labels.size()); }

    std::vector<std::vector<int>> members() const;
    std::vector<int> cluster_sizes() const;

    void validate() const;

    bool operator==(const ClusterAssignment&) const = default;
};

/// Per-cluster Gaussian treatment model: t | x, c ~ N(beta_c'x, sigma2_c).
/// beta_c has p entries, or p+1 with a leading intercept.
struct TreatmentModel {
    std::vector<Vector> beta;
    std::vector<double> sigma2;

    int C() const { return static_cast<int>(beta.size()); }
};

/// Per-cluster outcome coefficients, one vector per cluster,
/// length = |outcome_terms|.
struct OutcomeModel {
    std::vector<Vector> alpha;

    int C() const { return static_cast<int>(alpha.size()); }
};

/// Propensity densities, one per unit, evaluated under the unit's own cluster.
struct GpsVector {
    Vector r;
};

// Variance floor shared by treatment and outcome residual variances.
inline constexpr double kSigma2Floor = 1e-10;

// Relative pivot tolerance for rank decisions in least-squares solves.
inline constexpr double kRankTolerance = 1e-10;

}  // namespace cldrf
