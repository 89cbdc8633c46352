#include "cldrf/model_core.hpp"

#include <cmath>
#include <numbers>

namespace cldrf {

namespace {

double term_value(Term term, double t, double r) {
    switch (term) {
        case Term::One: return 1.0;
        case Term::T: return t;
        case Term::T2: return t * t;
        case Term::R: return r;
        case Term::R2: return r * r;
        case Term::TxR: return t * r;
    }
    return 0.0;
}

// Gathers the member rows of a matrix (or vector) into a dense block.
Matrix gather_rows(const Matrix& A, std::span<const int> rows) {
    Matrix out(static_cast<Eigen::Index>(rows.size()), A.cols());
    for (Eigen::Index k = 0; k < out.rows(); ++k) {
        out.row(k) = A.row(rows[static_cast<std::size_t>(k)]);
    }
    return out;
}

Vector gather(const Vector& v, std::span<const int> rows) {
    Vector out(static_cast<Eigen::Index>(rows.size()));
    for (Eigen::Index k = 0; k < out.size(); ++k) {
        out[k] = v[rows[static_cast<std::size_t>(k)]];
    }
    return out;
}

// Rank-checked least squares on already-gathered rows.
Vector solve_ols(const Matrix& A, const Vector& b, int cluster_id,
                 const char* context) {
    const Eigen::Index k = A.cols();
    if (A.rows() < k) {
        throw RankDeficientError(std::string(context) + ": " +
                                     std::to_string(A.rows()) + " members for " +
                                     std::to_string(k) + " columns",
                                 cluster_id);
    }
    Eigen::ColPivHouseholderQR<Matrix> qr(A);
    qr.setThreshold(kRankTolerance);
    if (qr.rank() < k) {
        throw RankDeficientError(std::string(context) + ": member design has rank " +
                                     std::to_string(qr.rank()) + " < " +
                                     std::to_string(k),
                                 cluster_id);
    }
    return qr.solve(b);
}

}  // namespace

Vector build_design(double t, double r, const ModelSpec& spec) {
    Vector z(spec.num_terms());
    for (Eigen::Index j = 0; j < z.size(); ++j) {
        z[j] = term_value(spec.outcome_terms[static_cast<std::size_t>(j)], t, r);
    }
    return z;
}

void build_design_into(double t, double r, const ModelSpec& spec, Matrix& Z,
                       Eigen::Index row) {
    for (Eigen::Index j = 0; j < Z.cols(); ++j) {
        Z(row, j) = term_value(spec.outcome_terms[static_cast<std::size_t>(j)], t, r);
    }
}

Matrix build_design_matrix(const Vector& t, const Vector& r, const ModelSpec& spec) {
    Matrix Z(t.size(), spec.num_terms());
    for (Eigen::Index i = 0; i < t.size(); ++i) {
        build_design_into(t[i], r[i], spec, Z, i);
    }
    return Z;
}

Vector weighted_ols(const Matrix& Z, const Vector& y, std::span<const int> members,
                    int cluster_id) {
    return solve_ols(gather_rows(Z, members), gather(y, members), cluster_id,
                     "weighted_ols");
}

TreatmentFit fit_treatment_cluster(const Matrix& X, const Vector& t,
                                   std::span<const int> members,
                                   const ModelSpec& spec, int cluster_id) {
    const Eigen::Index p = X.cols();
    const Eigen::Index cols = p + (spec.treatment_intercept ? 1 : 0);
    if (cols < 1) {
        throw std::invalid_argument(
            "treatment model needs p >= 1 or an intercept");
    }
    const auto m = static_cast<Eigen::Index>(members.size());
    if (m < cols + 1) {
        throw InsufficientMembersError(
            "fit_treatment_cluster: " + std::to_string(m) + " members, need >= " +
                std::to_string(cols + 1),
            cluster_id);
    }

    Matrix D(m, cols);
    if (spec.treatment_intercept) {
        D.col(0).setOnes();
        if (p > 0) {
            D.rightCols(p) = gather_rows(X, members);
        }
    } else {
        D = gather_rows(X, members);
    }
    Vector tm = gather(t, members);

    TreatmentFit fit;
    fit.beta = solve_ols(D, tm, cluster_id, "fit_treatment_cluster");
    const double rss = (tm - D * fit.beta).squaredNorm();
    fit.sigma2 = std::max(rss / static_cast<double>(m), kSigma2Floor);
    return fit;
}

double treatment_mean(const Vector& x, const Vector& beta, bool intercept) {
    if (intercept) {
        double mean = beta[0];
        for (Eigen::Index j = 0; j < x.size(); ++j) {
            mean += beta[j + 1] * x[j];
        }
        return mean;
    }
    return beta.dot(x);
}

double log_gps_density(double t, const Vector& x, const Vector& beta, double sigma2,
                       bool intercept) {
    const double d = t - treatment_mean(x, beta, intercept);
    return -0.5 * std::log(2.0 * std::numbers::pi * sigma2) - d * d / (2.0 * sigma2);
}

double gps_density(double t, const Vector& x, const Vector& beta, double sigma2,
                   bool intercept) {
    return std::exp(log_gps_density(t, x, beta, sigma2, intercept));
}

}  // namespace cldrf
