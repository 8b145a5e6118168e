#pragma once

#include "demand/dgp.hpp"
#include "demand/evaluation.hpp"
#include "demand/learner.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace demand {

// Declarative run configuration; one JSON file drives every subcommand.
struct RunConfig {
    uint64_t seed = 1;
    int threads = 0;  // 0 = hardware concurrency
    std::string out_dir = "run";

    // Data source: synthetic generator or CSV + vocabulary files.
    std::optional<DgpConfig> dgp;
    std::string csv_path, vocab_path;

    std::array<double, 3> split_fractions{0.60, 0.15, 0.25};
    std::optional<uint64_t> split_seed;  // default: seed

    std::vector<Family> families{Family::ols, Family::ridge, Family::lasso,
                                 Family::random_forest};
    // Shared learner hyperparameters (see LearnerSpec).
    int folds = 10;
    int lambda_count = 100;
    double lambda_min_ratio = 1e-4;
    int ntree = 50;
    std::optional<int> mtry;  // nullopt = cross-validated
    int nodesize = 5;
    int max_nodes = 0;  // 0 = unbounded

    std::vector<double> alpha_grid;  // empty = default grid
    bool ensemble = true;

    int bootstrap_replications = 1000;
    int effect_replications = 1000;
    std::pair<double, double> perturbation_range{0.01, 1.0};
};

RunConfig run_config_from_json(const std::string& text);
std::string run_config_to_json(const RunConfig& config);
RunConfig load_run_config(const std::string& path);

// Subcommand bodies. Each writes its artifacts under config.out_dir and is
// deterministic in the config (including across thread counts).
void cmd_generate(const RunConfig& config);
void cmd_fit(const RunConfig& config);
void cmd_evaluate(const RunConfig& config);
void cmd_report(const std::string& run_dir);

// Artifact names inside a run directory.
std::string censored_model_file(Family family);
std::string uncensored_model_file(Family family);

}  // namespace demand
