#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "nfp/checkpoint.hpp"
#include "nfp/config.hpp"
#include "nfp/diagnostics.hpp"
#include "nfp/metrics.hpp"
#include "nfp/network.hpp"
#include "nfp/optim.hpp"
#include "nfp/tape.hpp"
#include "nfp/tasks.hpp"

namespace nfp {

inline Dataset build_dataset(const ExperimentConfig& cfg) {
    if (cfg.task.kind == "1d") return make_1d_task(cfg.task.n_points);
    if (cfg.task.kind == "image") return make_image_task(cfg.task.source, cfg.task.size);
    if (cfg.task.kind == "occupancy") {
        if (cfg.task.shape.find('.') != std::string::npos)
            return make_occupancy_task(read_mesh(cfg.task.shape), cfg.task.n_points, cfg.seed);
        return make_occupancy_task(shape_from_name(cfg.task.shape), cfg.task.n_points, cfg.seed);
    }
    throw ConfigError("config: unknown task kind '" + cfg.task.kind + "'");
}

inline const char* metric_name_for(const std::string& task_kind) {
    if (task_kind == "1d") return "mse";
    if (task_kind == "image") return "psnr";
    return "iou";
}

namespace detail {

inline std::unique_ptr<DiffProgram> make_loss_program(const ExperimentConfig& cfg,
                                                      const NetworkSpec& spec, const Tensor& x,
                                                      const Tensor& y) {
    if (cfg.task.kind == "occupancy") return make_bce_program(spec, x, y);
    return make_mse_program(spec, x, y);
}

inline std::string zero_pad(std::int64_t v, int width) {
    std::string s = std::to_string(v);
    while (static_cast<int>(s.size()) < width) s.insert(s.begin(), '0');
    return s;
}

}  // namespace detail

// Evaluation snapshot over the full training set: loss in the task's
// training objective, plus the task metric (mse / psnr / iou).
struct EvalResult {
    double loss = 0.0;
    double metric = 0.0;
    Tensor predictions{{0}};
};

inline EvalResult evaluate(const ExperimentConfig& cfg, const NetworkSpec& spec,
                           const ParamVector& theta, const Dataset& ds) {
    EvalResult ev;
    ev.predictions = forward(spec, theta, ds.inputs);
    if (cfg.task.kind == "occupancy") {
        ev.loss = bce_loss(ev.predictions, ds.targets);
        Tensor probs(ev.predictions.shape());
        for (std::int64_t i = 0; i < probs.numel(); ++i)
            probs[i] = stable_sigmoid(ev.predictions[i]);
        ev.metric = iou(probs, ds.targets);
    } else {
        ev.loss = mse_loss(ev.predictions, ds.targets);
        ev.metric = cfg.task.kind == "image" ? psnr(ev.predictions, ds.targets) : ev.loss;
    }
    return ev;
}

struct TrainResult {
    std::vector<MetricsRecord> records;
    std::string metrics_path;
    std::string checkpoint_path;
    double final_loss = 0.0;
    double final_metric = 0.0;
    std::int64_t final_iteration = 0;
};

// Full training loop: minibatch -> loss/grad (+ probes for HVP methods) ->
// optimizer step, with metric rows at eval intervals, optional diagnostics,
// PPM snapshots for image tasks, and checkpoint/resume.
inline TrainResult run_train(const ExperimentConfig& cfg, const std::string& resume_path = "") {
    cfg.validate();
    check_referenced_files(cfg);
    if (cfg.optim.algorithm == Algorithm::kPrecondSgd)
        throw ConfigError(
            "config: precond-sgd takes a caller-supplied diagonal and has no training-loop "
            "driver; use esgd for the stochastically equilibrated variant");
    const NetworkSpec spec = cfg.make_network_spec();
    const std::uint64_t digest = network_digest(spec);
    const Dataset ds = build_dataset(cfg);
    ds.validate();

    if (cfg.diag.kappa) {
        const std::int64_t p = make_layout(spec).total();
        if (p > kFullHessianLimit)
            throw LimitError("diagnostics: kappa tracking needs <= " +
                             std::to_string(kFullHessianLimit) + " parameters, network has " +
                             std::to_string(p));
    }

    const std::int64_t batch =
        cfg.train.batch == 0 ? ds.size() : std::min<std::int64_t>(cfg.train.batch, ds.size());
    MinibatchStream stream(ds, {batch, cfg.seed});
    const std::int64_t total_iters = cfg.train.iters >= 0
                                         ? cfg.train.iters
                                         : cfg.train.epochs * stream.batches_per_epoch();

    ParamVector theta = init_params(spec, cfg.seed);
    OptimizerState st(cfg.optim, theta.layout(), cfg.seed);
    std::int64_t start_iter = 0;

    if (!resume_path.empty()) {
        const Checkpoint ck = load_checkpoint(resume_path);
        if (ck.digest != digest)
            throw ConfigError("checkpoint: architecture digest mismatch (checkpoint " +
                              std::to_string(ck.digest) + ", config " + std::to_string(digest) +
                              ")");
        restore_state(ck, theta, st);
        stream.seek(ck.epoch, ck.cursor);
        start_iter = ck.iteration;
    }

    std::filesystem::create_directories(cfg.out_dir);
    const std::string metrics_path = cfg.out_dir + "/metrics.csv";
    const std::string checkpoint_path = cfg.out_dir + "/checkpoint.nfpc";
    MetricsWriter writer(metrics_path);

    Rng probe_rng = Rng::substream(cfg.seed, 0xD1A6);
    const char* metric_name = metric_name_for(cfg.task.kind);

    TrainResult result;
    result.metrics_path = metrics_path;
    result.checkpoint_path = checkpoint_path;

    Checkpoint last_good = snapshot_state(digest, start_iter, stream.epoch(), stream.cursor(),
                                          theta, st);
    std::int64_t last_recorded = -1;
    double pending_wall_ms = 0.0;

    auto record = [&](std::int64_t iteration) {
        EvalResult ev = evaluate(cfg, spec, theta, ds);
        MetricsRecord rec;
        rec.iteration = iteration;
        rec.epoch = stream.epoch();
        rec.loss = ev.loss;
        rec.metric_name = metric_name;
        rec.metric_value = ev.metric;
        rec.wall_ms = cfg.wall_clock ? pending_wall_ms : 0.0;
        if (cfg.diag.sparsity || cfg.diag.kappa) {
            auto prog = detail::make_loss_program(cfg, spec, ds.inputs, ds.targets);
            if (cfg.diag.sparsity) {
                Tensor v({theta.size()});
                for (std::int64_t i = 0; i < v.numel(); ++i) v[i] = probe_rng.rademacher();
                rec.sparsity_global =
                    hvp_sparsity(hvp(*prog, theta, v), theta.layout(), kSparsityTau, iteration)
                        .global_fraction;
            }
            if (cfg.diag.kappa) {
                const Tensor h = full_hessian(*prog, theta);
                Tensor jac({theta.size()}), equ({theta.size()});
                for (std::int64_t i = 0; i < theta.size(); ++i) {
                    jac[i] = std::abs(h.at(i, i));
                    double acc = 0.0;
                    for (std::int64_t j = 0; j < theta.size(); ++j)
                        acc += h.at(i, j) * h.at(i, j);
                    equ[i] = std::sqrt(acc);
                }
                rec.kappa_raw = condition_number(h).kappa;
                rec.kappa_jacobi =
                    preconditioned_condition_number(h, jac, cfg.optim.damping).kappa;
                rec.kappa_equilibrated =
                    preconditioned_condition_number(h, equ, cfg.optim.damping).kappa;
            }
        }
        writer.append(rec);
        result.records.push_back(rec);
        last_recorded = iteration;
        result.final_loss = ev.loss;
        result.final_metric = ev.metric;
        result.final_iteration = iteration;
        if (cfg.task.kind == "image" && cfg.train.snapshot_interval > 0 &&
            iteration % cfg.train.snapshot_interval == 0)
            write_ppm(cfg.out_dir + "/render_" + detail::zero_pad(iteration, 6) + ".ppm",
                      render_to_image(ds, ev.predictions));
        last_good = snapshot_state(digest, iteration, stream.epoch(), stream.cursor(), theta, st);
    };

    record(start_iter);

    for (std::int64_t it = start_iter; it < total_iters; ++it) {
        auto [x, y] = stream.next();
        auto prog = detail::make_loss_program(cfg, spec, x, y);
        try {
            const GradResult gr = value_and_grad(*prog, theta);
            const auto t0 = std::chrono::steady_clock::now();
            if (uses_hvp(cfg.optim.algorithm)) {
                const HvpFn hvp_fn = [&](const Tensor& v) { return hvp(*prog, theta, v); };
                optimizer_step(cfg.optim, st, theta, gr.grad, hvp_fn);
            } else {
                optimizer_step(cfg.optim, st, theta, gr.grad, nullptr);
            }
            if (cfg.wall_clock) {
                const auto t1 = std::chrono::steady_clock::now();
                pending_wall_ms +=
                    std::chrono::duration<double, std::milli>(t1 - t0).count();
            }
        } catch (const NumericError& e) {
            // keep the last evaluated state on disk, then surface the failure
            save_checkpoint(checkpoint_path, last_good);
            writer.flush();
            throw NumericError("iteration " + std::to_string(it + 1) + ": " + e.what());
        }
        const std::int64_t done = it + 1;
        if (done % cfg.train.eval_interval == 0 || done == total_iters) {
            record(done);
            pending_wall_ms = 0.0;
        }
        if (cfg.train.checkpoint_interval > 0 && done % cfg.train.checkpoint_interval == 0)
            save_checkpoint(checkpoint_path, last_good);
    }
    if (last_recorded != total_iters) record(total_iters);

    save_checkpoint(checkpoint_path,
                    snapshot_state(digest, total_iters, stream.epoch(), stream.cursor(), theta,
                                   st));
    if (cfg.task.kind == "image")
        write_ppm(cfg.out_dir + "/render_final.ppm",
                  render_to_image(ds, evaluate(cfg, spec, theta, ds).predictions));
    writer.flush();
    return result;
}

// ------------------------------------------------------------------ diagnose

// Offline measurement pass at a parameter point (checkpoint or fresh init):
// spectrum report (raw / Jacobi / equilibrated kappa) and per-layer HVP
// sparsity, each as a small CSV.
inline void run_diagnose(const ExperimentConfig& cfg, const std::string& checkpoint_path,
                         bool want_kappa, bool want_sparsity) {
    cfg.validate();
    check_referenced_files(cfg);
    const NetworkSpec spec = cfg.make_network_spec();
    const Dataset ds = build_dataset(cfg);
    ParamVector theta = init_params(spec, cfg.seed);
    if (!checkpoint_path.empty()) {
        const Checkpoint ck = load_checkpoint(checkpoint_path);
        if (ck.digest != network_digest(spec))
            throw ConfigError("checkpoint: architecture digest mismatch");
        if (ck.params.numel() != theta.size())
            throw ConfigError("checkpoint: parameter count mismatch");
        for (std::int64_t i = 0; i < theta.size(); ++i) theta.flat()[i] = ck.params[i];
    }
    std::filesystem::create_directories(cfg.out_dir);
    auto prog = detail::make_loss_program(cfg, spec, ds.inputs, ds.targets);

    if (want_kappa) {
        const std::int64_t p = theta.size();
        if (p > kFullHessianLimit)
            throw LimitError("diagnose: kappa needs <= " + std::to_string(kFullHessianLimit) +
                             " parameters, network has " + std::to_string(p));
        const Tensor h = full_hessian(*prog, theta);
        Tensor jac({p}), equ({p});
        for (std::int64_t i = 0; i < p; ++i) {
            jac[i] = std::abs(h.at(i, i));
            double acc = 0.0;
            for (std::int64_t j = 0; j < p; ++j) acc += h.at(i, j) * h.at(i, j);
            equ[i] = std::sqrt(acc);
        }
        const auto raw = condition_number(h);
        const auto kj = preconditioned_condition_number(h, jac, cfg.optim.damping);
        const auto ke = preconditioned_condition_number(h, equ, cfg.optim.damping);
        std::ofstream out(cfg.out_dir + "/spectrum.csv", std::ios::binary);
        out << "kappa_raw,kappa_jacobi,kappa_equilibrated,n_dropped,param_count\n";
        out << detail::csv_double(raw.kappa) << "," << detail::csv_double(kj.kappa) << ","
            << detail::csv_double(ke.kappa) << "," << raw.n_dropped << "," << raw.param_count
            << "\n";
    }
    if (want_sparsity) {
        Rng rng = Rng::substream(cfg.seed, 0xD1A6);
        Tensor v({theta.size()});
        for (std::int64_t i = 0; i < v.numel(); ++i) v[i] = rng.rademacher();
        const auto rec = hvp_sparsity(hvp(*prog, theta, v), theta.layout());
        std::ofstream out(cfg.out_dir + "/sparsity.csv", std::ios::binary);
        out << "layer,fraction\n";
        for (std::size_t l = 0; l < rec.per_layer.size(); ++l)
            out << (l + 1) << "," << detail::csv_double(rec.per_layer[l]) << "\n";
        out << "global," << detail::csv_double(rec.global_fraction) << "\n";
    }
}

// ------------------------------------------------------------------ compare

// Runs each config (isolated out-dirs), joins their metric rows by
// iteration, and appends a per-run summary with final/best metric and the
// first iteration reaching the threshold ("unreached" when never).
struct CompareOptions {
    double threshold = std::numeric_limits<double>::infinity();
    bool has_threshold = false;
};

inline void run_compare(const std::vector<std::pair<std::string, ExperimentConfig>>& runs,
                        const std::string& out_path, const CompareOptions& opts = {}) {
    if (runs.size() < 2) throw ConfigError("compare: need at least two configs");
    for (std::size_t i = 1; i < runs.size(); ++i) {
        if (runs[i].second.task.kind != runs[0].second.task.kind)
            throw ConfigError("compare: configs disagree on task kind");
        if (runs[i].second.train.eval_interval != runs[0].second.train.eval_interval)
            throw ConfigError("compare: configs disagree on eval interval");
    }
    std::vector<TrainResult> results;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        ExperimentConfig member = runs[i].second;
        member.out_dir += "/cmp" + std::to_string(i);
        results.push_back(run_train(member));
    }

    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw ConfigError("compare: cannot write '" + out_path + "'");
    out << "iteration";
    for (const auto& [label, cfg] : runs) out << "," << label << "_loss," << label << "_metric";
    out << "\n";
    std::size_t longest = 0;
    for (std::size_t i = 1; i < results.size(); ++i)
        if (results[i].records.size() > results[longest].records.size()) longest = i;
    for (std::size_t row = 0; row < results[longest].records.size(); ++row) {
        out << results[longest].records[row].iteration;
        for (const auto& res : results) {
            if (row < res.records.size())
                out << "," << detail::csv_double(res.records[row].loss) << ","
                    << detail::csv_double(res.records[row].metric_value);
            else
                out << ",,";
        }
        out << "\n";
    }
    out << "\n";
    out << "label,final_metric,best_metric,iters_to_threshold\n";
    const bool higher_better = runs[0].second.task.kind != "1d";
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const auto& recs = results[i].records;
        double best = recs.front().metric_value;
        std::int64_t reach = -1;
        for (const auto& r : recs) {
            best = higher_better ? std::max(best, r.metric_value)
                                 : std::min(best, r.metric_value);
            const bool reached = opts.has_threshold &&
                                 (higher_better ? r.metric_value >= opts.threshold
                                                : r.metric_value <= opts.threshold);
            if (reached && reach < 0) reach = r.iteration;
        }
        out << runs[i].first << "," << detail::csv_double(recs.back().metric_value) << ","
            << detail::csv_double(best) << ",";
        if (reach >= 0)
            out << reach;
        else
            out << "unreached";
        out << "\n";
    }
}

}  // namespace nfp
