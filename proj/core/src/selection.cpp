#include "cldrf/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace cldrf {

namespace {

// Plain baseline: the outcome regression with every GPS term dropped.
ModelSpec strip_gps_terms(const ModelSpec& spec) {
    ModelSpec plain = spec;
    plain.outcome_terms.clear();
    for (Term t : spec.outcome_terms) {
        if (t == Term::One || t == Term::T || t == Term::T2) {
            plain.outcome_terms.push_back(t);
        }
    }
    if (plain.outcome_terms.empty()) {
        plain.outcome_terms = {Term::One};
    }
    return plain;
}

}  // namespace

const Candidate* SelectionReport::candidate(int C) const {
    for (const auto& cand : candidates) {
        if (cand.C == C) return &cand;
    }
    return nullptr;
}

double information_criterion(const Dataset& data, const FitResult& fit,
                             const ModelSpec& spec, PenaltyMode penalty) {
    const Matrix Z = build_design_matrix(data.t, fit.gps.r, spec);
    const int C = fit.assignment.C;

    // Per-cluster ML residual variance of the outcome model.
    std::vector<double> rss(static_cast<std::size_t>(C), 0.0);
    std::vector<int> count(static_cast<std::size_t>(C), 0);
    Vector resid(data.n());
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        const auto c = static_cast<std::size_t>(fit.assignment.labels[i] - 1);
        resid[i] = data.y[i] - Z.row(i).dot(fit.outcome.alpha[c]);
        rss[c] += resid[i] * resid[i];
        ++count[c];
    }
    std::vector<double> sigma2(static_cast<std::size_t>(C));
    for (int c = 0; c < C; ++c) {
        sigma2[static_cast<std::size_t>(c)] =
            std::max(rss[static_cast<std::size_t>(c)] /
                         std::max(1, count[static_cast<std::size_t>(c)]),
                     kSigma2Floor);
    }

    double nll2 = 0.0;  // -2 log-likelihood
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        const auto c = static_cast<std::size_t>(fit.assignment.labels[i] - 1);
        nll2 += std::log(2.0 * std::numbers::pi * sigma2[c]) +
                resid[i] * resid[i] / sigma2[c];
    }

    const int params = penalty == PenaltyMode::TotalParams
                           ? C * spec.num_terms()
                           : spec.num_terms();
    return nll2 + std::log(static_cast<double>(data.n())) * params;
}

ElbowChoice elbow_select(const std::vector<double>& values, double baseline,
                         ElbowMethod method) {
    if (values.size() < 2) {
        throw std::invalid_argument("elbow_select needs values for c = 2..C_max >= 3");
    }
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("elbow_select requires finite values");
        }
    }
    const int C_max = static_cast<int>(values.size()) + 1;

    ElbowChoice choice;
    // No elbow exists when the curve never falls or carries no curvature.
    const bool non_decreasing = std::is_sorted(values.begin(), values.end());
    double scale = 1.0;
    for (double v : values) scale = std::max(scale, std::abs(v));
    bool linear = values.size() >= 3;
    for (std::size_t i = 0; i + 2 < values.size() && linear; ++i) {
        const double dd = values[i] - 2.0 * values[i + 1] + values[i + 2];
        linear = std::abs(dd) <= 1e-9 * scale;
    }
    if (non_decreasing || linear) {
        choice.degenerate = true;
        const auto it = std::min_element(values.begin(), values.end());
        choice.C = 2 + static_cast<int>(std::distance(values.begin(), it));
        return choice;
    }

    if (method == ElbowMethod::Eq10) {
        const double slope = baseline / C_max;
        double best = std::numeric_limits<double>::infinity();
        for (int c = 2; c <= C_max; ++c) {
            const double score =
                slope * c + values[static_cast<std::size_t>(c - 2)];
            if (score < best) {
                best = score;
                choice.C = c;
            }
        }
    } else {
        // Vertical gap under the chord from (0, baseline) to (C_max, J(C_max)).
        const double end = values.back();
        const double slope = (end - baseline) / C_max;
        double best = -std::numeric_limits<double>::infinity();
        for (int c = 2; c <= C_max; ++c) {
            const double gap =
                baseline + slope * c - values[static_cast<std::size_t>(c - 2)];
            if (gap > best) {
                best = gap;
                choice.C = c;
            }
        }
    }
    return choice;
}

SelectionReport select_clusters(const Dataset& data, const SelectionOptions& options) {
    if (options.C_max < 3) {
        throw std::invalid_argument("C_max must be >= 3");
    }

    SelectionReport report;
    report.method = options.method;

    // C = 1 baseline, optionally without GPS adjustment.
    FitOptions base_options = options.fit;
    base_options.C = 1;
    if (options.baseline == BaselineMode::PlainOls) {
        base_options.spec = strip_gps_terms(options.fit.spec);
    }
    report.baseline_fit = fit(data, base_options);
    report.baseline_j = report.baseline_fit.objective();
    report.baseline_ic = information_criterion(
        data, report.baseline_fit, base_options.spec, options.penalty);

    for (int C = 2; C <= options.C_max; ++C) {
        FitOptions cand_options = options.fit;
        cand_options.C = C;
        try {
            Candidate cand;
            cand.C = C;
            cand.fit = fit(data, cand_options);
            cand.j = cand.fit.objective();
            cand.ic = information_criterion(data, cand.fit, cand_options.spec,
                                            options.penalty);
            report.candidates.push_back(std::move(cand));
        } catch (const std::exception& e) {
            report.failed.emplace(C, e.what());
        }
    }
    if (report.candidates.empty()) {
        throw AllStartsFailedError("no candidate cluster count could be fitted");
    }

    // The elbow runs over the consecutive candidates actually available.
    std::vector<double> values;
    values.reserve(report.candidates.size());
    for (const auto& cand : report.candidates) {
        values.push_back(options.target == ElbowTarget::InformationCriterion
                             ? cand.ic
                             : cand.j);
    }
    const double baseline = options.target == ElbowTarget::InformationCriterion
                                ? report.baseline_ic
                                : report.baseline_j;
    if (values.size() < 2) {
        report.chosen_C = report.candidates.front().C;
        report.degenerate = true;
        return report;
    }
    const ElbowChoice choice = elbow_select(values, baseline, options.method);
    report.degenerate = choice.degenerate;
    // Map the elbow index back through any failed candidates.
    report.chosen_C = report.candidates[static_cast<std::size_t>(choice.C - 2)].C;
    return report;
}

}  // namespace cldrf
