#include "cldrf/estimator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "cldrf/rng.hpp"

namespace cldrf {

namespace {

// Minimum viable cluster size: enough rows for the outcome design and for
// the treatment model refit.
int min_cluster_size(const Dataset& data, const ModelSpec& spec) {
    const int treat_cols =
        static_cast<int>(data.p()) + (spec.treatment_intercept ? 1 : 0);
    return std::max(spec.num_terms() + 1, treat_cols + 1);
}

double objective_with_design(const Matrix& Z, const Vector& y,
                             const ClusterAssignment& assignment,
                             const OutcomeModel& outcome) {
    double j = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const Vector& a =
            outcome.alpha[static_cast<std::size_t>(assignment.labels[i] - 1)];
        const double resid = y[i] - Z.row(i).dot(a);
        j += resid * resid;
    }
    return j;
}

OutcomeModel update_params(const Matrix& Z, const Vector& y,
                           const ClusterAssignment& assignment) {
    OutcomeModel outcome;
    outcome.alpha.resize(static_cast<std::size_t>(assignment.C));
    const auto members = assignment.members();
    for (int c = 0; c < assignment.C; ++c) {
        outcome.alpha[static_cast<std::size_t>(c)] =
            weighted_ols(Z, y, members[static_cast<std::size_t>(c)], c + 1);
    }
    return outcome;
}

ClusterAssignment assign_with_design(const Matrix& Z, const Vector& y,
                                     const OutcomeModel& outcome) {
    const int C = outcome.C();
    ClusterAssignment next;
    next.C = C;
    next.labels.resize(static_cast<std::size_t>(y.size()));
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        int best = 1;
        double best_r2 = std::numeric_limits<double>::infinity();
        for (int c = 0; c < C; ++c) {
            const double resid =
                y[i] - Z.row(i).dot(outcome.alpha[static_cast<std::size_t>(c)]);
            const double r2 = resid * resid;
            if (r2 < best_r2) {
                best_r2 = r2;
                best = c + 1;
            }
        }
        next.labels[static_cast<std::size_t>(i)] = best;
    }
    return next;
}

// Reseeds clusters that fell below the viability threshold with the units
// carrying the largest squared residuals, largest first. Donor clusters must
// stay viable. Throws InsufficientMembersError when no donor remains.
void repair_assignment(ClusterAssignment& assignment, const Matrix& Z,
                       const Vector& y, const OutcomeModel& outcome,
                       int min_members) {
    auto sizes = assignment.cluster_sizes();
    if (std::all_of(sizes.begin(), sizes.end(),
                    [&](int s) { return s >= min_members; })) {
        return;
    }

    const Eigen::Index n = y.size();
    std::vector<double> r2(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        const Vector& a =
            outcome.alpha[static_cast<std::size_t>(assignment.labels[i] - 1)];
        const double resid = y[i] - Z.row(i).dot(a);
        r2[static_cast<std::size_t>(i)] = resid * resid;
    }
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const double ra = r2[static_cast<std::size_t>(a)];
        const double rb = r2[static_cast<std::size_t>(b)];
        return ra != rb ? ra > rb : a < b;
    });

    for (int c = 1; c <= assignment.C; ++c) {
        while (sizes[static_cast<std::size_t>(c - 1)] < min_members) {
            int donor_unit = -1;
            for (int u : order) {
                const int lab = assignment.labels[static_cast<std::size_t>(u)];
                if (lab != c && sizes[static_cast<std::size_t>(lab - 1)] > min_members) {
                    donor_unit = u;
                    break;
                }
            }
            if (donor_unit < 0) {
                throw InsufficientMembersError(
                    "cluster " + std::to_string(c) +
                        " cannot be repaired: no donor cluster has spare members",
                    c);
            }
            const int from = assignment.labels[static_cast<std::size_t>(donor_unit)];
            assignment.labels[static_cast<std::size_t>(donor_unit)] = c;
            --sizes[static_cast<std::size_t>(from - 1)];
            ++sizes[static_cast<std::size_t>(c - 1)];
        }
    }
}

// Moves trailing members of the largest clusters into undersized ones so the
// first parameter update cannot fail on a thin initial cluster.
void pad_initial_assignment(ClusterAssignment& assignment, int min_members) {
    auto sizes = assignment.cluster_sizes();
    for (int c = 1; c <= assignment.C; ++c) {
        while (sizes[static_cast<std::size_t>(c - 1)] < min_members) {
            const int donor =
                1 + static_cast<int>(std::distance(
                        sizes.begin(), std::max_element(sizes.begin(), sizes.end())));
            if (donor == c || sizes[static_cast<std::size_t>(donor - 1)] <= 1) {
                throw InsufficientMembersError(
                    "initial assignment cannot reach " +
                        std::to_string(min_members) + " members per cluster",
                    c);
            }
            for (Eigen::Index i = assignment.n() - 1; i >= 0; --i) {
                if (assignment.labels[static_cast<std::size_t>(i)] == donor) {
                    assignment.labels[static_cast<std::size_t>(i)] = c;
                    break;
                }
            }
            --sizes[static_cast<std::size_t>(donor - 1)];
            ++sizes[static_cast<std::size_t>(c - 1)];
        }
    }
}

ClusterAssignment random_partition(Eigen::Index n, int C, Rng& rng) {
    ClusterAssignment a;
    a.C = C;
    a.labels.assign(static_cast<std::size_t>(n), 0);
    // Deal one unit per cluster first so no cluster is empty.
    std::vector<int> units(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) units[static_cast<std::size_t>(i)] = i;
    rng.shuffle(units);
    for (int c = 0; c < C; ++c) {
        a.labels[static_cast<std::size_t>(units[static_cast<std::size_t>(c)])] = c + 1;
    }
    for (Eigen::Index k = C; k < n; ++k) {
        a.labels[static_cast<std::size_t>(units[static_cast<std::size_t>(k)])] =
            1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(C)));
    }
    return a;
}

std::vector<double> global_outcome_residuals(const Dataset& data) {
    Matrix D(data.n(), 2);
    D.col(0).setOnes();
    D.col(1) = data.t;
    Eigen::ColPivHouseholderQR<Matrix> qr(D);
    qr.setThreshold(kRankTolerance);
    Vector fitted;
    if (qr.rank() < 2) {
        fitted = Vector::Constant(data.n(), data.y.mean());
    } else {
        fitted = D * qr.solve(data.y);
    }
    std::vector<double> resid(static_cast<std::size_t>(data.n()));
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        resid[static_cast<std::size_t>(i)] = data.y[i] - fitted[i];
    }
    return resid;
}

ClusterAssignment residual_kmeans(const Dataset& data, int C, Rng& rng) {
    const auto e = global_outcome_residuals(data);
    const auto n = e.size();

    // k-means++ seeding on the 1-d residuals.
    std::vector<double> centers;
    centers.reserve(static_cast<std::size_t>(C));
    centers.push_back(e[rng.below(n)]);
    std::vector<double> d2(n);
    for (int j = 1; j < C; ++j) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (double cen : centers) {
                best = std::min(best, (e[i] - cen) * (e[i] - cen));
            }
            d2[i] = best;
            total += best;
        }
        if (total <= 0.0) {
            centers.push_back(e[rng.below(n)]);
            continue;
        }
        double threshold = rng.u01() * total;
        std::size_t pick = n - 1;
        double cum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            cum += d2[i];
            if (cum >= threshold) {
                pick = i;
                break;
            }
        }
        centers.push_back(e[pick]);
    }

    std::vector<int> labels(n, 1);
    auto assign_pass = [&]() {
        for (std::size_t i = 0; i < n; ++i) {
            int best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (int c = 0; c < C; ++c) {
                const double d =
                    (e[i] - centers[static_cast<std::size_t>(c)]) *
                    (e[i] - centers[static_cast<std::size_t>(c)]);
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            labels[i] = best + 1;
        }
    };
    auto fix_empty = [&]() {
        std::vector<int> sizes(static_cast<std::size_t>(C), 0);
        for (int lab : labels) ++sizes[static_cast<std::size_t>(lab - 1)];
        for (int c = 0; c < C; ++c) {
            if (sizes[static_cast<std::size_t>(c)] > 0) continue;
            // Steal the point farthest from its current center.
            std::size_t far = 0;
            double far_d = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                const int lab = labels[i];
                if (sizes[static_cast<std::size_t>(lab - 1)] <= 1) continue;
                const double d =
                    (e[i] - centers[static_cast<std::size_t>(lab - 1)]) *
                    (e[i] - centers[static_cast<std::size_t>(lab - 1)]);
                if (d > far_d) {
                    far_d = d;
                    far = i;
                }
            }
            --sizes[static_cast<std::size_t>(labels[far] - 1)];
            labels[far] = c + 1;
            ++sizes[static_cast<std::size_t>(c)];
            centers[static_cast<std::size_t>(c)] = e[far];
        }
    };

    for (int iter = 0; iter < 25; ++iter) {
        assign_pass();
        fix_empty();
        std::vector<double> sum(static_cast<std::size_t>(C), 0.0);
        std::vector<int> cnt(static_cast<std::size_t>(C), 0);
        for (std::size_t i = 0; i < n; ++i) {
            sum[static_cast<std::size_t>(labels[i] - 1)] += e[i];
            ++cnt[static_cast<std::size_t>(labels[i] - 1)];
        }
        for (int c = 0; c < C; ++c) {
            if (cnt[static_cast<std::size_t>(c)] > 0) {
                centers[static_cast<std::size_t>(c)] =
                    sum[static_cast<std::size_t>(c)] /
                    cnt[static_cast<std::size_t>(c)];
            }
        }
    }
    assign_pass();
    fix_empty();

    ClusterAssignment a;
    a.C = C;
    a.labels = std::move(labels);
    return a;
}

GpsVector gps_for_assignment(const Dataset& data, const ClusterAssignment& assignment,
                             const ModelSpec& spec) {
    const auto members = assignment.members();
    const int treat_cols =
        static_cast<int>(data.p()) + (spec.treatment_intercept ? 1 : 0);

    std::vector<TreatmentFit> fits(static_cast<std::size_t>(assignment.C));
    bool need_global = false;
    std::vector<bool> fitted(static_cast<std::size_t>(assignment.C), false);
    for (int c = 0; c < assignment.C; ++c) {
        const auto& m = members[static_cast<std::size_t>(c)];
        if (static_cast<int>(m.size()) >= treat_cols + 1) {
            try {
                fits[static_cast<std::size_t>(c)] =
                    fit_treatment_cluster(data.X, data.t, m, spec, c + 1);
                fitted[static_cast<std::size_t>(c)] = true;
                continue;
            } catch (const RankDeficientError&) {
            }
        }
        need_global = true;
    }
    if (need_global) {
        // Fallback for clusters too thin to carry their own treatment model
        // (only reachable from initialize with extreme C).
        std::vector<int> all(static_cast<std::size_t>(data.n()));
        for (int i = 0; i < data.n(); ++i) all[static_cast<std::size_t>(i)] = i;
        const TreatmentFit global = fit_treatment_cluster(data.X, data.t, all, spec);
        for (int c = 0; c < assignment.C; ++c) {
            if (!fitted[static_cast<std::size_t>(c)]) {
                fits[static_cast<std::size_t>(c)] = global;
            }
        }
    }

    GpsVector gps;
    gps.r.resize(data.n());
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        const auto& fit = fits[static_cast<std::size_t>(assignment.labels[i] - 1)];
        gps.r[i] = gps_density(data.t[i], data.X.row(i), fit.beta, fit.sigma2,
                               spec.treatment_intercept);
    }
    return gps;
}

struct StartResult {
    bool failed = false;
    std::string failure_reason;
    ClusterAssignment assignment;
    TreatmentModel treatment;
    OutcomeModel outcome;
    GpsVector gps;
    std::vector<double> trace;
    std::vector<HalfStepRecord> half_steps;
    int iterations = 0;
    bool converged = false;
    std::uint64_t seed = 0;
};

StartResult run_start(const Dataset& data, const FitOptions& options,
                      std::uint64_t seed) {
    StartResult out;
    out.seed = seed;
    const int min_members = min_cluster_size(data, options.spec);

    ClusterAssignment kappa;
    GpsVector gps;
    if (options.init_assignment) {
        kappa = *options.init_assignment;
        kappa.validate();
        pad_initial_assignment(kappa, min_members);
        gps = gps_for_assignment(data, kappa, options.spec);
    } else {
        std::tie(kappa, gps) = initialize(data, options, seed);
        auto sizes = kappa.cluster_sizes();
        if (std::any_of(sizes.begin(), sizes.end(),
                        [&](int s) { return s < min_members; })) {
            pad_initial_assignment(kappa, min_members);
            gps = gps_for_assignment(data, kappa, options.spec);
        }
    }

    Matrix Z = build_design_matrix(data.t, gps.r, options.spec);
    OutcomeModel alpha;
    bool have_alpha = false;

    for (int s = 1; s <= options.max_iters; ++s) {
        out.iterations = s;
        const double j_before =
            have_alpha ? objective_with_design(Z, data.y, kappa, alpha)
                       : std::numeric_limits<double>::quiet_NaN();

        alpha = update_params(Z, data.y, kappa);
        have_alpha = true;
        const double j_after_params = objective_with_design(Z, data.y, kappa, alpha);

        ClusterAssignment next = assign_with_design(Z, data.y, alpha);
        const double j_after_assign =
            objective_with_design(Z, data.y, next, alpha);
        repair_assignment(next, Z, data.y, alpha, min_members);

        out.trace.push_back(objective_with_design(Z, data.y, next, alpha));
        if (options.record_half_steps) {
            out.half_steps.push_back({j_before, j_after_params, j_after_assign});
        }

        out.converged = (next == kappa);
        kappa = std::move(next);

        std::tie(out.treatment, gps) = update_gps(data, kappa, options.spec);
        Z = build_design_matrix(data.t, gps.r, options.spec);

        if (out.converged) break;
    }

    out.assignment = std::move(kappa);
    out.outcome = std::move(alpha);
    out.gps = std::move(gps);
    return out;
}

}  // namespace

void FitOptions::validate(const Dataset& data) const {
    spec.validate();
    data.validate();
    if (C < 1) throw std::invalid_argument("cluster count C must be >= 1");
    if (max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
    if (n_starts < 1) throw std::invalid_argument("n_starts must be >= 1");
    if (threads < 0) throw std::invalid_argument("threads must be >= 0");
    const auto bound =
        static_cast<double>(data.n()) / (spec.num_terms() + 1);
    if (static_cast<double>(C) > bound) {
        throw std::invalid_argument(
            "C = " + std::to_string(C) + " exceeds n / (|outcome_terms| + 1) = " +
            std::to_string(bound) + "; clusters would not be identifiable");
    }
    if (data.p() == 0 && !spec.treatment_intercept) {
        throw std::invalid_argument(
            "p = 0 requires a treatment-model intercept");
    }
    if (init_assignment) {
        if (init_assignment->n() != data.n() || init_assignment->C != C) {
            throw std::invalid_argument("init_assignment shape mismatch");
        }
    }
}

std::pair<ClusterAssignment, GpsVector> initialize(const Dataset& data,
                                                   const FitOptions& options,
                                                   std::uint64_t seed) {
    Rng rng(seed);
    ClusterAssignment assignment =
        options.init == InitStrategy::RandomPartition
            ? random_partition(data.n(), options.C, rng)
            : residual_kmeans(data, options.C, rng);
    GpsVector gps = gps_for_assignment(data, assignment, options.spec);
    return {std::move(assignment), std::move(gps)};
}

ClusterAssignment assign_step(const Dataset& data, const GpsVector& gps,
                              const OutcomeModel& outcome, const ModelSpec& spec) {
    const Matrix Z = build_design_matrix(data.t, gps.r, spec);
    return assign_with_design(Z, data.y, outcome);
}

std::pair<TreatmentModel, GpsVector> update_gps(const Dataset& data,
                                                const ClusterAssignment& assignment,
                                                const ModelSpec& spec) {
    const auto members = assignment.members();
    TreatmentModel model;
    model.beta.resize(static_cast<std::size_t>(assignment.C));
    model.sigma2.resize(static_cast<std::size_t>(assignment.C));
    for (int c = 0; c < assignment.C; ++c) {
        const TreatmentFit fit = fit_treatment_cluster(
            data.X, data.t, members[static_cast<std::size_t>(c)], spec, c + 1);
        model.beta[static_cast<std::size_t>(c)] = fit.beta;
        model.sigma2[static_cast<std::size_t>(c)] = fit.sigma2;
    }
    GpsVector gps;
    gps.r.resize(data.n());
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        const auto c = static_cast<std::size_t>(assignment.labels[i] - 1);
        gps.r[i] = gps_density(data.t[i], data.X.row(i), model.beta[c],
                               model.sigma2[c], spec.treatment_intercept);
    }
    return {std::move(model), std::move(gps)};
}

double objective(const Dataset& data, const ClusterAssignment& assignment,
                 const OutcomeModel& outcome, const GpsVector& gps,
                 const ModelSpec& spec) {
    const Matrix Z = build_design_matrix(data.t, gps.r, spec);
    return objective_with_design(Z, data.y, assignment, outcome);
}

FitResult fit(const Dataset& data, const FitOptions& options) {
    options.validate(data);
    const int n_starts = options.init_assignment ? 1 : options.n_starts;

    std::vector<StartResult> results(static_cast<std::size_t>(n_starts));
    auto run_one = [&](int k) {
        const std::uint64_t seed =
            derive_seed(options.seed, static_cast<std::uint64_t>(k));
        try {
            results[static_cast<std::size_t>(k)] = run_start(data, options, seed);
        } catch (const std::exception& e) {
            results[static_cast<std::size_t>(k)].failed = true;
            results[static_cast<std::size_t>(k)].failure_reason = e.what();
            results[static_cast<std::size_t>(k)].seed = seed;
        }
    };

    int workers = options.threads == 0
                      ? static_cast<int>(std::thread::hardware_concurrency())
                      : options.threads;
    workers = std::max(1, std::min(workers, n_starts));
    if (workers <= 1) {
        for (int k = 0; k < n_starts; ++k) run_one(k);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&]() {
                for (int k = next.fetch_add(1); k < n_starts; k = next.fetch_add(1)) {
                    run_one(k);
                }
            });
        }
        for (auto& th : pool) th.join();
    }

    int best = -1;
    for (int k = 0; k < n_starts; ++k) {
        const auto& r = results[static_cast<std::size_t>(k)];
        if (r.failed || r.trace.empty()) continue;
        if (best < 0 ||
            r.trace.back() < results[static_cast<std::size_t>(best)].trace.back()) {
            best = k;
        }
    }
    if (best < 0) {
        std::string why = "all starts failed";
        if (!results.empty() && results[0].failed) {
            why += ": " + results[0].failure_reason;
        }
        throw AllStartsFailedError(why);
    }

    auto& win = results[static_cast<std::size_t>(best)];
    FitResult out;
    out.assignment = std::move(win.assignment);
    out.treatment = std::move(win.treatment);
    out.outcome = std::move(win.outcome);
    out.gps = std::move(win.gps);
    out.objective_trace = std::move(win.trace);
    out.iterations = win.iterations;
    out.converged = win.converged;
    out.seed_used = win.seed;
    if (options.record_half_steps) {
        out.start_diagnostics.reserve(results.size());
        for (auto& r : results) {
            StartDiagnostics d;
            d.seed = r.seed;
            d.failed = r.failed;
            d.failure_reason = r.failure_reason;
            d.half_steps = std::move(r.half_steps);
            out.start_diagnostics.push_back(std::move(d));
        }
    }
    return out;
}

}  // namespace cldrf
