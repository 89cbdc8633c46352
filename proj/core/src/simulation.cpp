#include "cldrf/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "cldrf/adrf.hpp"
#include "cldrf/rng.hpp"

namespace cldrf {

namespace {

struct ClusterDesign {
    std::array<double, 2> x1_range;
    std::array<double, 2> x2_range;
    Vector beta;                      // treatment coefficients
    std::array<double, 3> outcome;    // a0 + a1*t + a2*t^2
};

struct ScenarioDesign {
    int C;
    int p;
    bool treatment_intercept;
    bool random_treatment;            // t ~ N(1,1), covariates absent
    std::vector<ClusterDesign> clusters;
};

Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

// Linear designs share the outcome list; the c-th scenario truncates it.
const std::array<std::array<double, 3>, 5> kLinearOutcomes = {{
    {5.0, 1.0, 0.0},
    {15.0, -2.0, 0.0},
    {-5.0, -0.01, 0.0},
    {25.0, 2.0, 0.0},
    {-20.0, -10.0, 0.0},
}};

ScenarioDesign make_design(Scenario s) {
    ScenarioDesign d;
    switch (s) {
        case Scenario::Motivating:
            d = {4, 2, true, false, {}};
            d.clusters = {
                {{0.0, 0.4}, {0.0, 0.4}, vec({3.0, 1.5, 1.2}), {5.0, 2.0, 1.6}},
                {{0.2, 0.6}, {0.3, 0.6}, vec({3.0, 1.8, 1.5}), {15.0, -1.0, -1.6}},
                {{0.5, 0.8}, {0.5, 0.9}, vec({3.0, 2.0, 1.8}), {-5.0, 2.0, 0.0}},
                {{0.7, 1.0}, {0.7, 1.0}, vec({3.0, 2.2, 2.0}), {25.0, -1.0, 0.0}},
            };
            return d;
        case Scenario::LinearC3:
        case Scenario::LinearC4: {
            const int C = s == Scenario::LinearC3 ? 3 : 4;
            d = {C, 2, false, false, {}};
            const std::vector<ClusterDesign> all = {
                {{0.0, 0.4}, {0.0, 0.5}, vec({1.7, 2.0}), kLinearOutcomes[0]},
                {{0.2, 0.6}, {0.3, 0.6}, vec({1.2, 1.2}), kLinearOutcomes[1]},
                {{0.5, 0.8}, {0.5, 0.9}, vec({0.7, 0.5}), kLinearOutcomes[2]},
                {{0.7, 1.0}, {0.7, 1.0}, vec({0.5, 0.2}), kLinearOutcomes[3]},
            };
            d.clusters.assign(all.begin(), all.begin() + C);
            return d;
        }
        case Scenario::LinearC5:
            d = {5, 2, false, false, {}};
            d.clusters = {
                {{0.0, 0.4}, {0.0, 0.4}, vec({1.7, 2.0}), kLinearOutcomes[0]},
                {{0.2, 0.6}, {0.3, 0.6}, vec({1.2, 1.2}), kLinearOutcomes[1]},
                {{0.5, 0.8}, {0.5, 0.9}, vec({0.7, 0.5}), kLinearOutcomes[2]},
                {{0.7, 1.0}, {0.7, 1.0}, vec({0.5, 0.2}), kLinearOutcomes[3]},
                {{0.9, 1.0}, {0.9, 1.0}, vec({0.4, 0.1}), kLinearOutcomes[4]},
            };
            return d;
        case Scenario::RandomC3:
        case Scenario::RandomC4:
        case Scenario::RandomC5: {
            const int C = s == Scenario::RandomC3 ? 3 : (s == Scenario::RandomC4 ? 4 : 5);
            d = {C, 0, true, true, {}};
            for (int c = 0; c < C; ++c) {
                d.clusters.push_back(
                    {{0.0, 0.0}, {0.0, 0.0}, Vector(), kLinearOutcomes[static_cast<std::size_t>(c)]});
            }
            return d;
        }
    }
    throw std::invalid_argument("unknown scenario");
}

}  // namespace

std::string scenario_name(Scenario s) {
    switch (s) {
        case Scenario::Motivating: return "motivating";
        case Scenario::LinearC3: return "linear-c3";
        case Scenario::LinearC4: return "linear-c4";
        case Scenario::LinearC5: return "linear-c5";
        case Scenario::RandomC3: return "random-c3";
        case Scenario::RandomC4: return "random-c4";
        case Scenario::RandomC5: return "random-c5";
    }
    return "?";
}

Scenario parse_scenario(const std::string& name) {
    for (Scenario s : {Scenario::Motivating, Scenario::LinearC3, Scenario::LinearC4,
                       Scenario::LinearC5, Scenario::RandomC3, Scenario::RandomC4,
                       Scenario::RandomC5}) {
        if (scenario_name(s) == name) return s;
    }
    throw std::invalid_argument("unknown scenario: " + name);
}

int scenario_cluster_count(Scenario s) { return make_design(s).C; }

int scenario_covariate_count(Scenario s) { return make_design(s).p; }

ModelSpec scenario_default_spec(Scenario s) {
    const ScenarioDesign d = make_design(s);
    ModelSpec spec = s == Scenario::Motivating
                         ? ModelSpec::quadratic(d.treatment_intercept)
                         : ModelSpec::linear(d.treatment_intercept);
    return spec;
}

void ScenarioConfig::validate() const {
    const int C = scenario_cluster_count(scenario);
    if (n < C) {
        throw std::invalid_argument("n must be at least the cluster count");
    }
    if (n % C != 0) {
        throw std::invalid_argument("n = " + std::to_string(n) +
                                    " is not divisible by C = " + std::to_string(C) +
                                    " (clusters are equally sized)");
    }
}

LabeledDataset generate(const ScenarioConfig& config, double outcome_noise_sd) {
    config.validate();
    const ScenarioDesign design = make_design(config.scenario);
    const int per_cluster = config.n / design.C;

    Rng rng(config.seed);
    LabeledDataset out;
    out.data.y.resize(config.n);
    out.data.t.resize(config.n);
    out.data.X.resize(config.n, design.p);
    out.truth.C = design.C;
    out.truth.labels.resize(static_cast<std::size_t>(config.n));

    int i = 0;
    for (int c = 0; c < design.C; ++c) {
        const ClusterDesign& cd = design.clusters[static_cast<std::size_t>(c)];
        out.true_coeffs.push_back(cd.outcome);
        for (int k = 0; k < per_cluster; ++k, ++i) {
            out.truth.labels[static_cast<std::size_t>(i)] = c + 1;
            double mean_t;
            if (design.random_treatment) {
                mean_t = 1.0;
            } else {
                const double x1 = rng.uniform(cd.x1_range[0], cd.x1_range[1]);
                const double x2 = rng.uniform(cd.x2_range[0], cd.x2_range[1]);
                out.data.X(i, 0) = x1;
                out.data.X(i, 1) = x2;
                mean_t = design.treatment_intercept
                             ? cd.beta[0] + cd.beta[1] * x1 + cd.beta[2] * x2
                             : cd.beta[0] * x1 + cd.beta[1] * x2;
            }
            const double t = mean_t + rng.normal();
            out.data.t[i] = t;
            out.data.y[i] = cd.outcome[0] + cd.outcome[1] * t +
                            cd.outcome[2] * t * t +
                            outcome_noise_sd * rng.normal();
        }
    }
    return out;
}

namespace {

// Dose-response error vs. the truth for one replication: estimated clusters
// are matched to true clusters by maximal overlap, curves compared on 100
// evenly spaced points over the intersection of observed treatment ranges.
std::vector<double> adrf_rmse_vs_truth(const LabeledDataset& labeled,
                                       const FitResult& fit, const ModelSpec& spec,
                                       int grid_points) {
    const auto& data = labeled.data;
    std::vector<double> rmse(static_cast<std::size_t>(labeled.truth.C),
                             std::numeric_limits<double>::quiet_NaN());
    const std::vector<int> match = match_clusters(fit.assignment, labeled.truth);

    // Observed treatment range per true cluster.
    std::vector<double> lo(static_cast<std::size_t>(labeled.truth.C),
                           std::numeric_limits<double>::infinity());
    std::vector<double> hi(static_cast<std::size_t>(labeled.truth.C),
                           -std::numeric_limits<double>::infinity());
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        const auto c = static_cast<std::size_t>(labeled.truth.labels[i] - 1);
        lo[c] = std::min(lo[c], data.t[i]);
        hi[c] = std::max(hi[c], data.t[i]);
    }

    for (int est = 1; est <= fit.assignment.C; ++est) {
        const int truth = match[static_cast<std::size_t>(est - 1)];
        if (truth == 0) continue;
        double a = lo[static_cast<std::size_t>(truth - 1)];
        double b = hi[static_cast<std::size_t>(truth - 1)];
        // Intersect with the estimated cluster's own support.
        double est_lo = std::numeric_limits<double>::infinity();
        double est_hi = -std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < data.n(); ++i) {
            if (fit.assignment.labels[static_cast<std::size_t>(i)] == est) {
                est_lo = std::min(est_lo, data.t[i]);
                est_hi = std::max(est_hi, data.t[i]);
            }
        }
        a = std::max(a, est_lo);
        b = std::min(b, est_hi);
        if (!(a < b)) continue;

        std::vector<double> grid(static_cast<std::size_t>(grid_points));
        const double step = (b - a) / (grid_points - 1);
        for (int k = 0; k < grid_points; ++k) {
            grid[static_cast<std::size_t>(k)] = a + step * k;
        }
        const AdrfCurve curve = estimate_adrf(data, fit, est, grid, spec);
        double sq = 0.0;
        for (std::size_t k = 0; k < grid.size(); ++k) {
            const double diff = curve.mu[k] - labeled.true_mu(truth, grid[k]);
            sq += diff * diff;
        }
        rmse[static_cast<std::size_t>(truth - 1)] =
            std::sqrt(sq / static_cast<double>(grid.size()));
    }
    return rmse;
}

}  // namespace

ReplicationSummary run_replications(const ScenarioConfig& config,
                                    const ReplicationOptions& options) {
    if (options.reps < 1) {
        throw std::invalid_argument("reps must be >= 1");
    }
    config.validate();

    ReplicationSummary summary;
    summary.scenario = config.scenario;
    summary.n = config.n;
    summary.true_C = scenario_cluster_count(config.scenario);
    summary.reps = options.reps;
    summary.records.resize(static_cast<std::size_t>(options.reps));

    auto run_rep = [&](int rep) {
        RepRecord& rec = summary.records[static_cast<std::size_t>(rep)];
        const std::uint64_t data_seed =
            derive_seed(config.seed, static_cast<std::uint64_t>(rep));
        rec.seed = data_seed;
        try {
            ScenarioConfig rep_config = config;
            rep_config.seed = data_seed;
            const LabeledDataset labeled = generate(rep_config);

            SelectionOptions sel = options.selection;
            sel.C_max = options.C_max;
            sel.fit = options.fit;
            sel.fit.seed = derive_seed(data_seed, 1000003);
            sel.fit.threads = 1;  // parallelism lives at the rep level

            const SelectionReport report = select_clusters(labeled.data, sel);
            rec.chosen_C = report.chosen_C;
            const Candidate* chosen = report.candidate(report.chosen_C);
            const FitResult& fit = chosen->fit;
            rec.rand = rand_index(fit.assignment, labeled.truth);
            rec.adrf_rmse = adrf_rmse_vs_truth(labeled, fit, options.fit.spec,
                                               options.adrf_grid_points);
        } catch (const std::exception& e) {
            rec.failed = true;
            rec.failure_reason = e.what();
            rec.adrf_rmse.assign(static_cast<std::size_t>(summary.true_C),
                                 std::numeric_limits<double>::quiet_NaN());
        }
    };

    int workers = options.threads == 0
                      ? static_cast<int>(std::thread::hardware_concurrency())
                      : options.threads;
    workers = std::max(1, std::min(workers, options.reps));
    if (workers <= 1) {
        for (int rep = 0; rep < options.reps; ++rep) run_rep(rep);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&]() {
                for (int rep = next.fetch_add(1); rep < options.reps;
                     rep = next.fetch_add(1)) {
                    run_rep(rep);
                }
            });
        }
        for (auto& th : pool) th.join();
    }

    // Aggregates over successful reps.
    double sum = 0.0;
    double sumsq = 0.0;
    int ok = 0;
    std::vector<int> chosen_counts;
    std::vector<double> rmse_sum(static_cast<std::size_t>(summary.true_C), 0.0);
    std::vector<int> rmse_count(static_cast<std::size_t>(summary.true_C), 0);
    int hits = 0;
    for (const auto& rec : summary.records) {
        if (rec.failed) {
            ++summary.failures;
            continue;
        }
        ++ok;
        sum += rec.rand;
        sumsq += rec.rand * rec.rand;
        if (rec.chosen_C >= static_cast<int>(chosen_counts.size())) {
            chosen_counts.resize(static_cast<std::size_t>(rec.chosen_C) + 1, 0);
        }
        ++chosen_counts[static_cast<std::size_t>(rec.chosen_C)];
        if (rec.chosen_C == summary.true_C) ++hits;
        for (int c = 0; c < summary.true_C; ++c) {
            const double v = rec.adrf_rmse[static_cast<std::size_t>(c)];
            if (std::isfinite(v)) {
                rmse_sum[static_cast<std::size_t>(c)] += v;
                ++rmse_count[static_cast<std::size_t>(c)];
            }
        }
    }
    if (ok > 0) {
        summary.rand_mean = sum / ok;
        summary.rand_sd =
            ok > 1 ? std::sqrt(std::max(0.0, (sumsq - sum * sum / ok) / (ok - 1)))
                   : 0.0;
        summary.chosen_hit_rate = static_cast<double>(hits) / ok;
        int best = 0;
        for (std::size_t c = 1; c < chosen_counts.size(); ++c) {
            if (chosen_counts[c] > chosen_counts[static_cast<std::size_t>(best)]) {
                best = static_cast<int>(c);
            }
        }
        summary.chosen_mode = best;
    }
    summary.rmse_mean.assign(static_cast<std::size_t>(summary.true_C),
                             std::numeric_limits<double>::quiet_NaN());
    for (int c = 0; c < summary.true_C; ++c) {
        if (rmse_count[static_cast<std::size_t>(c)] > 0) {
            summary.rmse_mean[static_cast<std::size_t>(c)] =
                rmse_sum[static_cast<std::size_t>(c)] /
                rmse_count[static_cast<std::size_t>(c)];
        }
    }
    return summary;
}

}  // namespace cldrf
