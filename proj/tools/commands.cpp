#include "commands.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>

#include <json.hpp>

#include "cldrf/adrf.hpp"
#include "cldrf/csv.hpp"
#include "cldrf/metrics.hpp"
#include "cldrf/selection.hpp"
#include "cldrf/simulation.hpp"

namespace cldrf::cli {

namespace {

using json = nlohmann::ordered_json;

constexpr int kSchemaVersion = 1;

ModelSpec parse_spec(const std::string& name, bool intercept) {
    if (name == "linear") return ModelSpec::linear(intercept);
    if (name == "quadratic") return ModelSpec::quadratic(intercept);
    throw std::invalid_argument("unknown spec '" + name +
                                "' (expected linear or quadratic)");
}

Term parse_term(const std::string& name) {
    for (Term t : {Term::One, Term::T, Term::T2, Term::R, Term::R2, Term::TxR}) {
        if (term_name(t) == name) return t;
    }
    throw std::invalid_argument("unknown outcome term '" + name + "'");
}

json spec_to_json(const ModelSpec& spec) {
    json terms = json::array();
    for (Term t : spec.outcome_terms) terms.push_back(term_name(t));
    return json{{"outcome_terms", terms},
                {"treatment_intercept", spec.treatment_intercept}};
}

ModelSpec spec_from_json(const json& j) {
    ModelSpec spec;
    spec.treatment_intercept = j.at("treatment_intercept").get<bool>();
    for (const auto& name : j.at("outcome_terms")) {
        spec.outcome_terms.push_back(parse_term(name.get<std::string>()));
    }
    spec.validate();
    return spec;
}

json vector_to_json(const Vector& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

json fit_report_json(const Dataset& data, const FitResult& result,
                     const FitOptions& options) {
    const Matrix Z = build_design_matrix(data.t, result.gps.r, options.spec);
    const auto sizes = result.assignment.cluster_sizes();

    json clusters = json::array();
    for (int c = 0; c < result.assignment.C; ++c) {
        const auto ci = static_cast<std::size_t>(c);
        double rss = 0.0;
        for (Eigen::Index i = 0; i < data.n(); ++i) {
            if (result.assignment.labels[static_cast<std::size_t>(i)] != c + 1) continue;
            const double resid = data.y[i] - Z.row(i).dot(result.outcome.alpha[ci]);
            rss += resid * resid;
        }
        clusters.push_back(json{
            {"cluster", c + 1},
            {"size", sizes[ci]},
            {"alpha", vector_to_json(result.outcome.alpha[ci])},
            {"beta", vector_to_json(result.treatment.beta[ci])},
            {"sigma2", result.treatment.sigma2[ci]},
            {"outcome_sigma2",
             std::max(rss / std::max(1, sizes[ci]), kSigma2Floor)},
        });
    }

    json report{
        {"schema_version", kSchemaVersion},
        {"kind", "fit"},
        {"n", data.n()},
        {"p", data.p()},
        {"clusters", result.assignment.C},
        {"spec", spec_to_json(options.spec)},
        {"options",
         json{{"seed", options.seed},
              {"starts", options.n_starts},
              {"max_iters", options.max_iters},
              {"init",
               options.init == InitStrategy::RandomPartition ? "random-partition"
                                                             : "residual-kmeans"}}},
        {"objective", result.objective()},
        {"iterations", result.iterations},
        {"converged", result.converged},
        {"seed_used", result.seed_used},
        {"objective_trace", result.objective_trace},
        {"clusters_detail", clusters},
        {"assignment", result.assignment.labels},
    };
    return report;
}

void write_json(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open for writing: " + path.string());
    }
    out << j.dump(2) << "\n";
}

void write_fit_outputs(const std::filesystem::path& out_dir, const Dataset& data,
                       const FitResult& result, const FitOptions& options) {
    write_json(out_dir / "fit.json", fit_report_json(data, result, options));
    write_labels_csv(out_dir / "assignment.csv", result.assignment.labels, "cluster");
}

// Reconstructs the pieces of a FitResult that the dose-response step needs.
std::pair<FitResult, ModelSpec> fit_from_json(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw CsvError("cannot open fit report: " + path.string(), 0);
    }
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw CsvError("invalid fit report " + path.string() + ": " + e.what(), 0);
    }
    if (j.value("kind", "") != "fit") {
        throw CsvError("not a fit report: " + path.string(), 0);
    }

    ModelSpec spec = spec_from_json(j.at("spec"));
    FitResult fit;
    fit.assignment.C = j.at("clusters").get<int>();
    fit.assignment.labels = j.at("assignment").get<std::vector<int>>();
    for (const auto& cj : j.at("clusters_detail")) {
        const auto alpha = cj.at("alpha").get<std::vector<double>>();
        const auto beta = cj.at("beta").get<std::vector<double>>();
        fit.outcome.alpha.push_back(
            Eigen::Map<const Vector>(alpha.data(), static_cast<Eigen::Index>(alpha.size())));
        fit.treatment.beta.push_back(
            Eigen::Map<const Vector>(beta.data(), static_cast<Eigen::Index>(beta.size())));
        fit.treatment.sigma2.push_back(cj.at("sigma2").get<double>());
    }
    fit.assignment.validate();
    return {std::move(fit), std::move(spec)};
}

int report_error(const std::exception& e, int code) {
    std::cerr << "error: " << e.what() << "\n";
    return code;
}

template <typename Fn>
int guarded(Fn&& fn) {
    try {
        fn();
        return kExitOk;
    } catch (const CsvError& e) {
        return report_error(e, kExitData);
    } catch (const LengthMismatchError& e) {
        return report_error(e, kExitData);
    } catch (const AllStartsFailedError& e) {
        return report_error(e, kExitNumerical);
    } catch (const std::invalid_argument& e) {
        return report_error(e, kExitConfig);
    } catch (const std::out_of_range& e) {
        return report_error(e, kExitConfig);
    } catch (const std::exception& e) {
        return report_error(e, kExitConfig);
    }
}

}  // namespace

FitOptions CommonOptions::to_fit_options() const {
    FitOptions options;
    options.max_iters = max_iters;
    options.n_starts = starts;
    options.seed = seed;
    options.threads = threads;
    options.spec = parse_spec(spec, treatment_intercept);
    if (init == "random-partition") {
        options.init = InitStrategy::RandomPartition;
    } else if (init == "residual-kmeans") {
        options.init = InitStrategy::ResidualKmeans;
    } else {
        throw std::invalid_argument("unknown init strategy '" + init + "'");
    }
    return options;
}

int run_simulate(const SimulateConfig& config) {
    return guarded([&] {
        ScenarioConfig sc;
        sc.scenario = parse_scenario(config.scenario);
        sc.n = config.n;
        sc.seed = config.seed;
        sc.validate();
        const LabeledDataset labeled = generate(sc);
        std::filesystem::create_directories(config.out_dir);
        write_dataset_csv(config.out_dir / "dataset.csv", labeled.data);
        write_labels_csv(config.out_dir / "truth.csv", labeled.truth.labels,
                         "true_cluster");
    });
}

int run_fit(const FitConfig& config) {
    return guarded([&] {
        const Dataset data = read_dataset_csv(config.data);
        FitOptions options = config.common.to_fit_options();
        options.C = config.clusters;
        const FitResult result = fit(data, options);
        std::filesystem::create_directories(config.common.out_dir);
        write_fit_outputs(config.common.out_dir, data, result, options);
    });
}

int run_select(const SelectConfig& config) {
    return guarded([&] {
        const Dataset data = read_dataset_csv(config.data);

        SelectionOptions options;
        options.C_max = config.cmax;
        options.fit = config.common.to_fit_options();
        if (config.elbow == "eq10") {
            options.method = ElbowMethod::Eq10;
        } else if (config.elbow == "line-distance") {
            options.method = ElbowMethod::LineDistance;
        } else {
            throw std::invalid_argument("unknown elbow method '" + config.elbow + "'");
        }
        if (config.elbow_on == "ic") {
            options.target = ElbowTarget::InformationCriterion;
        } else if (config.elbow_on == "j") {
            options.target = ElbowTarget::RawObjective;
        } else {
            throw std::invalid_argument("unknown elbow target '" + config.elbow_on + "'");
        }
        if (config.penalty == "total") {
            options.penalty = PenaltyMode::TotalParams;
        } else if (config.penalty == "per-cluster") {
            options.penalty = PenaltyMode::PerClusterParams;
        } else {
            throw std::invalid_argument("unknown penalty mode '" + config.penalty + "'");
        }
        if (config.baseline == "gps") {
            options.baseline = BaselineMode::GpsFit;
        } else if (config.baseline == "plain") {
            options.baseline = BaselineMode::PlainOls;
        } else {
            throw std::invalid_argument("unknown baseline mode '" + config.baseline + "'");
        }

        const SelectionReport report = select_clusters(data, options);
        std::filesystem::create_directories(config.common.out_dir);

        json candidates = json::array();
        for (const auto& cand : report.candidates) {
            candidates.push_back(json{{"C", cand.C},
                                      {"ic", cand.ic},
                                      {"j", cand.j},
                                      {"converged", cand.fit.converged},
                                      {"iterations", cand.fit.iterations}});
        }
        json failed = json::object();
        for (const auto& [C, reason] : report.failed) {
            failed[std::to_string(C)] = reason;
        }
        write_json(config.common.out_dir / "select.json",
                   json{{"schema_version", kSchemaVersion},
                        {"kind", "select"},
                        {"cmax", config.cmax},
                        {"method", config.elbow},
                        {"elbow_on", config.elbow_on},
                        {"penalty", config.penalty},
                        {"baseline_mode", config.baseline},
                        {"baseline", json{{"C", 1},
                                          {"ic", report.baseline_ic},
                                          {"j", report.baseline_j}}},
                        {"candidates", candidates},
                        {"failed", failed},
                        {"degenerate", report.degenerate},
                        {"chosen_C", report.chosen_C}});

        std::ofstream ic(config.common.out_dir / "ic.csv", std::ios::binary);
        ic << "C,ic,j\n";
        ic << "1," << format_double(report.baseline_ic) << ','
           << format_double(report.baseline_j) << "\n";
        for (const auto& cand : report.candidates) {
            ic << cand.C << ',' << format_double(cand.ic) << ','
               << format_double(cand.j) << "\n";
        }

        // Persist the chosen fit so `adrf` can pick it up directly.
        const Candidate* chosen = report.candidate(report.chosen_C);
        FitOptions chosen_options = options.fit;
        chosen_options.C = report.chosen_C;
        write_fit_outputs(config.common.out_dir, data, chosen->fit, chosen_options);
    });
}

int run_adrf(const AdrfConfig& config) {
    return guarded([&] {
        const Dataset data = read_dataset_csv(config.data);
        auto [fit, spec] = fit_from_json(config.fit_report);
        if (fit.assignment.n() != data.n()) {
            throw LengthMismatchError("fit report is for n = " +
                                      std::to_string(fit.assignment.n()) +
                                      " but dataset has n = " +
                                      std::to_string(data.n()));
        }
        std::vector<int> clusters;
        if (config.cluster == 0) {
            for (int c = 1; c <= fit.assignment.C; ++c) clusters.push_back(c);
        } else {
            if (config.cluster < 1 || config.cluster > fit.assignment.C) {
                throw std::invalid_argument("unknown cluster " +
                                            std::to_string(config.cluster));
            }
            clusters.push_back(config.cluster);
        }

        std::vector<AdrfCurve> curves;
        for (int c : clusters) {
            const TreatmentGrid grid =
                default_grid(data, fit, c, config.points, config.extended);
            curves.push_back(estimate_adrf(data, fit, c, grid.values, spec));
        }
        std::filesystem::create_directories(config.out_dir);
        write_curves_csv(config.out_dir / "adrf.csv", curves);
    });
}

int run_replicate(const ReplicateConfig& config) {
    return guarded([&] {
        ScenarioConfig sc;
        sc.scenario = parse_scenario(config.scenario);
        sc.n = config.n;
        sc.seed = config.common.seed;
        sc.validate();

        ReplicationOptions options;
        options.reps = config.reps;
        options.C_max = config.cmax;
        options.threads = config.common.threads;
        options.fit = config.common.to_fit_options();
        if (!config.spec_overridden) {
            options.fit.spec = scenario_default_spec(sc.scenario);
        }

        const ReplicationSummary summary = run_replications(sc, options);
        std::filesystem::create_directories(config.common.out_dir);

        std::ofstream csv(config.common.out_dir / "replications.csv",
                          std::ios::binary);
        csv << "rep,seed,failed,chosen_c,rand_index";
        for (int c = 1; c <= summary.true_C; ++c) csv << ",adrf_rmse_c" << c;
        csv << "\n";
        for (int rep = 0; rep < summary.reps; ++rep) {
            const auto& rec = summary.records[static_cast<std::size_t>(rep)];
            csv << rep << ',' << rec.seed << ',' << (rec.failed ? 1 : 0) << ','
                << rec.chosen_C << ',' << format_double(rec.rand);
            for (int c = 0; c < summary.true_C; ++c) {
                csv << ','
                    << format_double(rec.adrf_rmse.empty()
                                         ? std::numeric_limits<double>::quiet_NaN()
                                         : rec.adrf_rmse[static_cast<std::size_t>(c)]);
            }
            csv << "\n";
        }

        std::ofstream rep(config.common.out_dir / "summary.txt", std::ios::binary);
        rep << "scenario: " << scenario_name(summary.scenario) << "\n"
            << "n: " << summary.n << "\n"
            << "true clusters: " << summary.true_C << "\n"
            << "replications: " << summary.reps << "\n"
            << "failures: " << summary.failures << "\n"
            << "chosen C mode: " << summary.chosen_mode << "\n"
            << "chosen C hit rate: " << format_double(summary.chosen_hit_rate) << "\n"
            << "rand index mean: " << format_double(summary.rand_mean) << "\n"
            << "rand index sd: " << format_double(summary.rand_sd) << "\n";
        for (int c = 0; c < summary.true_C; ++c) {
            rep << "adrf rmse mean, true cluster " << (c + 1) << ": "
                << format_double(summary.rmse_mean[static_cast<std::size_t>(c)])
                << "\n";
        }
    });
}

int run_rand_index(const std::filesystem::path& path_a,
                   const std::filesystem::path& path_b) {
    return guarded([&] {
        const std::vector<int> la = read_labels_csv(path_a);
        const std::vector<int> lb = read_labels_csv(path_b);
        if (la.size() != lb.size()) {
            throw LengthMismatchError("label files differ in length: " +
                                      std::to_string(la.size()) + " vs " +
                                      std::to_string(lb.size()));
        }
        // Arbitrary label values are fine for a partition metric; compact
        // them to 1..K first.
        auto to_assignment = [](const std::vector<int>& labels) {
            std::map<int, int> remap;
            for (int lab : labels) remap.emplace(lab, 0);
            int next = 1;
            for (auto& [raw, compact] : remap) compact = next++;
            ClusterAssignment a;
            a.C = next - 1;
            a.labels.reserve(labels.size());
            for (int lab : labels) a.labels.push_back(remap[lab]);
            return a;
        };
        const double value = rand_index(to_assignment(la), to_assignment(lb));
        std::cout << format_double(value) << "\n";
    });
}

}  // namespace cldrf::cli
