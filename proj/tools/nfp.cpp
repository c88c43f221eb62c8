#include <algorithm>
#include <filesystem>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "nfp/trainer.hpp"

namespace {

// Command-line overrides route through the same key dispatcher as config
// files, so the CLI cannot drift from the file schema.
struct Overrides {
    std::string seed, out_dir, iters;
    bool has_seed = false, has_out_dir = false, has_iters = false;

    void apply(nfp::ExperimentConfig& cfg) const {
        if (has_seed) nfp::apply_config_key(cfg, "seed", seed);
        if (has_out_dir) nfp::apply_config_key(cfg, "out_dir", out_dir);
        if (has_iters) nfp::apply_config_key(cfg, "train.iters", iters);
    }
};

// Column label for a compare member: the config's filename stem, suffixed
// on repeats so self-comparisons still get distinct headers.
std::string label_for(const std::string& path, std::vector<std::string>& used) {
    std::string stem = std::filesystem::path(path).stem().string();
    if (stem.empty()) stem = "run";
    std::string label = stem;
    int n = 2;
    while (std::find(used.begin(), used.end(), label) != used.end())
        label = stem + "_" + std::to_string(n++);
    used.push_back(label);
    return label;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"neural-field training with curvature-aware diagonal preconditioners"};
    app.require_subcommand(1);

    Overrides ov;
    auto* seed_opt = app.add_option("--seed", ov.seed, "Override the config seed");
    auto* dir_opt = app.add_option("--out-dir", ov.out_dir, "Override the output directory");
    auto* iters_opt = app.add_option("--iters", ov.iters, "Override the iteration budget");

    std::string train_config, resume_path;
    auto* train = app.add_subcommand("train", "Run one training experiment");
    train->fallthrough();
    train->add_option("config", train_config, "Experiment config (key=value text or .json)")
        ->required();
    train->add_option("--resume", resume_path, "Continue from a checkpoint file");

    std::string diag_config, diag_checkpoint;
    bool want_kappa = false, want_sparsity = false;
    auto* diagnose =
        app.add_subcommand("diagnose", "Measure conditioning / sparsity at a checkpoint");
    diagnose->fallthrough();
    diagnose->add_option("config", diag_config, "Experiment config")->required();
    diagnose->add_option("--checkpoint", diag_checkpoint, "Checkpoint to diagnose")->required();
    diagnose->add_flag("--kappa", want_kappa,
                       "Write spectrum.csv (raw / Jacobi / equilibrated kappa)");
    diagnose->add_flag("--sparsity", want_sparsity, "Write sparsity.csv (per-layer HVP sparsity)");

    std::vector<std::string> cmp_configs;
    std::string cmp_out;
    double threshold = 0.0;
    auto* compare = app.add_subcommand("compare", "Train several configs and join their metrics");
    compare->fallthrough();
    compare->add_option("configs", cmp_configs, "Two or more experiment configs")->required();
    compare->add_option("--out", cmp_out, "Joined report CSV path")->required();
    auto* thr_opt = compare->add_option(
        "--threshold", threshold, "Metric level for the iterations-to-threshold column");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;  // bad usage is a config error
    }

    ov.has_seed = seed_opt->count() > 0;
    ov.has_out_dir = dir_opt->count() > 0;
    ov.has_iters = iters_opt->count() > 0;

    try {
        if (*train) {
            nfp::ExperimentConfig cfg = nfp::load_config(train_config);
            ov.apply(cfg);
            const nfp::TrainResult res = nfp::run_train(cfg, resume_path);
            std::cout << "train: " << res.final_iteration << " iterations, final loss "
                      << nfp::detail::csv_double(res.final_loss) << ", final "
                      << nfp::metric_name_for(cfg.task.kind) << " "
                      << nfp::detail::csv_double(res.final_metric) << "\n"
                      << "metrics: " << res.metrics_path << "\n"
                      << "checkpoint: " << res.checkpoint_path << "\n";
        } else if (*diagnose) {
            nfp::ExperimentConfig cfg = nfp::load_config(diag_config);
            ov.apply(cfg);
            // no flags = full report
            if (!want_kappa && !want_sparsity) want_kappa = want_sparsity = true;
            nfp::run_diagnose(cfg, diag_checkpoint, want_kappa, want_sparsity);
            if (want_kappa) std::cout << "spectrum: " << cfg.out_dir << "/spectrum.csv\n";
            if (want_sparsity) std::cout << "sparsity: " << cfg.out_dir << "/sparsity.csv\n";
        } else if (*compare) {
            std::vector<std::pair<std::string, nfp::ExperimentConfig>> runs;
            std::vector<std::string> used;
            for (const std::string& path : cmp_configs) {
                nfp::ExperimentConfig cfg = nfp::load_config(path);
                ov.apply(cfg);
                runs.emplace_back(label_for(path, used), std::move(cfg));
            }
            nfp::CompareOptions opts;
            if (thr_opt->count() > 0) {
                opts.threshold = threshold;
                opts.has_threshold = true;
            }
            nfp::run_compare(runs, cmp_out, opts);
            std::cout << "report: " << cmp_out << "\n";
        }
    } catch (const nfp::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const nfp::NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 3;
    } catch (const nfp::LimitError& e) {
        std::cerr << "refused: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
