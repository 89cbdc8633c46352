#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "cldrf/estimator.hpp"

namespace cldrf::cli {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;   // configuration / validation error
inline constexpr int kExitData = 3;     // ingestion / malformed data
inline constexpr int kExitNumerical = 4;  // unrecoverable numerical failure

struct CommonOptions {
    std::uint64_t seed = 0;
    int starts = 10;
    int max_iters = 100;
    std::string spec = "linear";  // linear | quadratic
    std::string init = "residual-kmeans";
    bool treatment_intercept = true;
    int threads = 1;
    std::filesystem::path out_dir = ".";

    FitOptions to_fit_options() const;  // throws std::invalid_argument
};

struct SimulateConfig {
    std::string scenario;
    int n = 0;
    std::uint64_t seed = 0;
    std::filesystem::path out_dir = ".";
};

struct FitConfig {
    std::filesystem::path data;
    int clusters = 0;
    CommonOptions common;
};

struct SelectConfig {
    std::filesystem::path data;
    int cmax = 7;
    std::string elbow = "eq10";     // eq10 | line-distance
    std::string elbow_on = "ic";    // ic | j
    std::string penalty = "total";  // total | per-cluster
    std::string baseline = "gps";   // gps | plain
    CommonOptions common;
};

struct AdrfConfig {
    std::filesystem::path data;
    std::filesystem::path fit_report;
    int cluster = 0;  // 0 = every cluster
    int points = 100;
    bool extended = false;
    std::filesystem::path out_dir = ".";
};

struct ReplicateConfig {
    std::string scenario;
    int n = 0;
    int reps = 0;
    int cmax = 7;
    CommonOptions common;
    bool spec_overridden = false;  // otherwise the scenario default applies
};

// Each command writes its files under out_dir and returns an exit code,
// printing any error to stderr.
int run_simulate(const SimulateConfig& config);
int run_fit(const FitConfig& config);
int run_select(const SelectConfig& config);
int run_adrf(const AdrfConfig& config);
int run_replicate(const ReplicateConfig& config);
int run_rand_index(const std::filesystem::path& path_a,
                   const std::filesystem::path& path_b);

}  // namespace cldrf::cli
