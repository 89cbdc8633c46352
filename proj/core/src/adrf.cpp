#include "cldrf/adrf.hpp"

#include <algorithm>
#include <limits>

namespace cldrf {

namespace {

void check_cluster(const FitResult& fit, int cluster) {
    if (cluster < 1 || cluster > fit.assignment.C) {
        throw std::out_of_range("unknown cluster " + std::to_string(cluster) +
                                " (C = " + std::to_string(fit.assignment.C) + ")");
    }
}

std::pair<double, double> member_support(const Dataset& data, const FitResult& fit,
                                         int cluster) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        if (fit.assignment.labels[static_cast<std::size_t>(i)] == cluster) {
            lo = std::min(lo, data.t[i]);
            hi = std::max(hi, data.t[i]);
        }
    }
    return {lo, hi};
}

}  // namespace

TreatmentGrid default_grid(const Dataset& data, const FitResult& fit, int cluster,
                           int points, bool extended) {
    check_cluster(fit, cluster);
    if (points < 2) {
        throw std::invalid_argument("grid needs at least 2 points");
    }
    const auto [lo, hi] = extended
                              ? std::pair{data.t.minCoeff(), data.t.maxCoeff()}
                              : member_support(data, fit, cluster);
    TreatmentGrid grid;
    if (lo == hi) {
        grid.values = {lo};
        grid.degenerate = true;
        return grid;
    }
    grid.values.resize(static_cast<std::size_t>(points));
    const double step = (hi - lo) / (points - 1);
    for (int k = 0; k < points; ++k) {
        grid.values[static_cast<std::size_t>(k)] = lo + step * k;
    }
    grid.values.back() = hi;  // exact endpoint regardless of rounding
    return grid;
}

AdrfCurve estimate_adrf(const Dataset& data, const FitResult& fit, int cluster,
                        const std::vector<double>& grid, const ModelSpec& spec) {
    check_cluster(fit, cluster);
    AdrfCurve curve;
    curve.cluster = cluster;
    curve.grid = grid;
    std::tie(curve.support_min, curve.support_max) =
        member_support(data, fit, cluster);

    const auto c = static_cast<std::size_t>(cluster - 1);
    const Vector& alpha = fit.outcome.alpha[c];
    const Vector& beta = fit.treatment.beta[c];
    const double sigma2 = fit.treatment.sigma2[c];

    std::vector<int> members;
    for (int i = 0; i < data.n(); ++i) {
        if (fit.assignment.labels[static_cast<std::size_t>(i)] == cluster) {
            members.push_back(i);
        }
    }

    curve.mu.reserve(grid.size());
    for (double t : grid) {
        double sum = 0.0;
        for (int i : members) {
            const double r = gps_density(t, data.X.row(i), beta, sigma2,
                                         spec.treatment_intercept);
            sum += build_design(t, r, spec).dot(alpha);
        }
        curve.mu.push_back(sum / static_cast<double>(members.size()));
    }
    return curve;
}

}  // namespace cldrf
