#include <CLI11.hpp>

#include "commands.hpp"

namespace {

using namespace cldrf::cli;

void add_common(CLI::App* cmd, CommonOptions& common) {
    cmd->add_option("--seed", common.seed, "Base RNG seed");
    cmd->add_option("--starts", common.starts, "Number of independent starts")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--max-iters", common.max_iters, "Iteration cap per start")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--spec", common.spec, "Outcome design: linear or quadratic")
        ->check(CLI::IsMember({"linear", "quadratic"}));
    cmd->add_option("--init", common.init, "Initialization strategy")
        ->check(CLI::IsMember({"random-partition", "residual-kmeans"}));
    cmd->add_flag("--treatment-intercept,!--no-treatment-intercept",
                  common.treatment_intercept,
                  "Include an intercept in the treatment model");
    cmd->add_option("--threads", common.threads,
                    "Worker threads (0 = hardware concurrency)")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--out", common.out_dir, "Output directory");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Clustered dose-response estimation for continuous treatments"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Plain key=value config file; flags override it");
    app.allow_config_extras(false);

    SimulateConfig simulate;
    auto* sim_cmd = app.add_subcommand("simulate", "Draw a scenario dataset");
    sim_cmd->add_option("--scenario", simulate.scenario, "Scenario name")->required();
    sim_cmd->add_option("--n", simulate.n, "Total units")->required();
    sim_cmd->add_option("--seed", simulate.seed, "RNG seed");
    sim_cmd->add_option("--out", simulate.out_dir, "Output directory");

    FitConfig fit;
    auto* fit_cmd = app.add_subcommand("fit", "Fit the clustered estimator");
    fit_cmd->add_option("--data", fit.data, "Dataset CSV (y,t,x1..xp)")->required();
    fit_cmd->add_option("--clusters", fit.clusters, "Number of clusters C")
        ->required()
        ->check(CLI::PositiveNumber);
    add_common(fit_cmd, fit.common);

    SelectConfig select;
    auto* sel_cmd = app.add_subcommand("select", "Choose the number of clusters");
    sel_cmd->add_option("--data", select.data, "Dataset CSV (y,t,x1..xp)")->required();
    sel_cmd->add_option("--cmax", select.cmax, "Largest candidate C (>= 3)")
        ->required();
    sel_cmd->add_option("--elbow", select.elbow, "Elbow method")
        ->check(CLI::IsMember({"eq10", "line-distance"}));
    sel_cmd->add_option("--elbow-on", select.elbow_on,
                        "Apply the elbow to 'ic' or raw 'j'")
        ->check(CLI::IsMember({"ic", "j"}));
    sel_cmd->add_option("--penalty", select.penalty, "IC parameter count mode")
        ->check(CLI::IsMember({"total", "per-cluster"}));
    sel_cmd->add_option("--baseline", select.baseline, "No-cluster baseline flavor")
        ->check(CLI::IsMember({"gps", "plain"}));
    add_common(sel_cmd, select.common);

    AdrfConfig adrf;
    auto* adrf_cmd =
        app.add_subcommand("adrf", "Evaluate per-cluster dose-response curves");
    adrf_cmd->add_option("--data", adrf.data, "Dataset CSV used for the fit")
        ->required();
    adrf_cmd->add_option("--fit", adrf.fit_report, "fit.json from fit/select")
        ->required();
    adrf_cmd->add_option("--cluster", adrf.cluster, "Cluster id (0 = all)");
    adrf_cmd->add_option("--points", adrf.points, "Grid points");
    adrf_cmd->add_flag("--extended", adrf.extended,
                       "Span the full-sample treatment range");
    adrf_cmd->add_option("--out", adrf.out_dir, "Output directory");

    ReplicateConfig replicate;
    auto* rep_cmd = app.add_subcommand("replicate", "Monte Carlo replication study");
    rep_cmd->add_option("--scenario", replicate.scenario, "Scenario name")->required();
    rep_cmd->add_option("--n", replicate.n, "Total units per replication")->required();
    rep_cmd->add_option("--reps", replicate.reps, "Number of replications")->required();
    rep_cmd->add_option("--cmax", replicate.cmax, "Largest candidate C (>= 3)");
    add_common(rep_cmd, replicate.common);
    auto* spec_opt = rep_cmd->get_option("--spec");

    std::filesystem::path rand_a;
    std::filesystem::path rand_b;
    auto* rand_cmd =
        app.add_subcommand("rand-index", "Agreement between two partitions");
    rand_cmd->add_option("a", rand_a, "First label CSV")->required();
    rand_cmd->add_option("b", rand_b, "Second label CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    if (sim_cmd->parsed()) return run_simulate(simulate);
    if (fit_cmd->parsed()) return run_fit(fit);
    if (sel_cmd->parsed()) return run_select(select);
    if (adrf_cmd->parsed()) return run_adrf(adrf);
    if (rep_cmd->parsed()) {
        replicate.spec_overridden = spec_opt->count() > 0;
        return run_replicate(replicate);
    }
    if (rand_cmd->parsed()) return run_rand_index(rand_a, rand_b);
    return kExitConfig;
}
