#include "demand/parallel.hpp"
#include "demand/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <stdexcept>

namespace {

demand::RunConfig resolve_config(const std::string& config_path, const std::string& out_dir,
                                 long long seed, int threads) {
    demand::RunConfig config;
    if (!config_path.empty()) config = demand::load_run_config(config_path);
    if (!out_dir.empty()) config.out_dir = out_dir;
    if (seed >= 0) config.seed = static_cast<uint64_t>(seed);
    if (threads >= 0) config.threads = threads;
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Censorship-aware retail demand prediction"};
    app.require_subcommand(1);

    std::string config_path, out_dir, run_dir;
    long long seed = -1;
    int threads = -1;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "run configuration JSON file");
        cmd->add_option("--out", out_dir, "run directory (overrides config)");
        cmd->add_option("--seed", seed, "root seed (overrides config)");
        cmd->add_option("--threads", threads, "worker threads, 0 = all cores");
    };

    CLI::App* generate = app.add_subcommand("generate", "write a synthetic dataset");
    add_common(generate);
    CLI::App* fit = app.add_subcommand("fit", "fit censored and uncensored models and ensembles");
    add_common(fit);
    CLI::App* evaluate = app.add_subcommand("evaluate", "compute RMSE, bootstrap and price-effect tables");
    add_common(evaluate);
    CLI::App* report = app.add_subcommand("report", "render report tables from a run directory");
    report->add_option("run_dir", run_dir, "run directory (default: --out or config out_dir)");
    add_common(report);

    CLI11_PARSE(app, argc, argv);

    try {
        if (generate->parsed()) {
            demand::cmd_generate(resolve_config(config_path, out_dir, seed, threads));
        } else if (fit->parsed()) {
            demand::cmd_fit(resolve_config(config_path, out_dir, seed, threads));
        } else if (evaluate->parsed()) {
            demand::cmd_evaluate(resolve_config(config_path, out_dir, seed, threads));
        } else if (report->parsed()) {
            std::string dir = run_dir;
            if (dir.empty()) dir = resolve_config(config_path, out_dir, seed, threads).out_dir;
            demand::cmd_report(dir);
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
