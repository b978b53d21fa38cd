#pragma once

#include <chrono>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <optional>

#include "cvcl/dataset.hpp"
#include "cvcl/losses.hpp"
#include "cvcl/metrics.hpp"
#include "cvcl/model.hpp"
#include "cvcl/optimizer.hpp"

namespace cvcl {

struct TrainConfig {
    int pretrain_epochs = 200;
    int finetune_epochs = 100;
    int batch_size = 64;
    OptimizerConfig opt;
    LossWeights weights;
    std::uint64_t seed = 1;
    bool detach_target = false;  // stop gradient at the sharpened target
    double clip_norm = 0;        // 0 disables gradient clipping
    bool mean_recon = false;     // scale reconstruction loss by 1/batch
};

struct FineEpochTrace {
    double fine = 0;
    double pre = 0;
    double contrastive = 0;
    double consistency = 0;
};

struct TrainReport {
    std::vector<double> pretrain_loss;        // per-epoch mean of batch L_pre
    std::vector<FineEpochTrace> finetune;     // per-epoch means of batch losses
    double wall_seconds = 0;
};

// Plain text trace: stage,epoch,L_fine,L_pre,L_c,L_a. Stage-1 rows leave the
// fine-tuning columns empty.
inline void write_trace_csv(const TrainReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write trace file: " + path);
    out << "stage,epoch,L_fine,L_pre,L_c,L_a\n";
    for (std::size_t e = 0; e < report.pretrain_loss.size(); ++e)
        out << "pretrain," << e << ",," << report.pretrain_loss[e] << ",,\n";
    for (std::size_t e = 0; e < report.finetune.size(); ++e) {
        const auto& t = report.finetune[e];
        out << "finetune," << e << "," << t.fine << "," << t.pre << "," << t.contrastive << ","
            << t.consistency << "\n";
    }
}

namespace detail {

template <typename T>
std::vector<Matrix<T>> cast_views(const MultiviewDataset& ds) {
    std::vector<Matrix<T>> views;
    for (const auto& v : ds.views) views.push_back(v.template cast<T>());
    return views;
}

template <typename T>
void clip_and_step(ParamStore<T>& store, const TrainConfig& cfg) {
    if (cfg.clip_norm > 0) {
        const double norm = store.grad_norm();
        if (norm > cfg.clip_norm) store.scale_grads(static_cast<T>(cfg.clip_norm / norm));
    }
    optimizer_step(store, cfg.opt);
}

}  // namespace detail

// Stage 1: minibatch descent on the reconstruction loss only; heads untouched.
template <typename T>
void pretrain(CvclModel<T>& model, const MultiviewDataset& ds, const TrainConfig& cfg,
              TrainReport& report) {
    if (cfg.pretrain_epochs == 0) return;
    const auto data = detail::cast_views<T>(ds);
    ParamStore<T> store;
    model.collect_params(store, /*include_heads=*/false);
    for (int epoch = 0; epoch < cfg.pretrain_epochs; ++epoch) {
        const auto plan = plan_epoch(ds.n_samples(), cfg.batch_size, cfg.seed, epoch);
        double epoch_loss = 0;
        for (std::size_t b = 0; b < plan.batches.size(); ++b) {
            std::vector<Matrix<T>> xs, recs;
            for (std::size_t v = 0; v < model.n_views(); ++v) {
                xs.push_back(gather_rows(data[v], plan.batches[b]));
                recs.push_back(model.decode(v, model.encode(v, xs.back())));
            }
            const T scale =
                cfg.mean_recon ? T{1} / static_cast<T>(plan.batches[b].size()) : T{1};
            const T loss = scale * reconstruction_loss(xs, recs);
            if (!std::isfinite(static_cast<double>(loss)))
                throw NumericError("non-finite pretraining loss at epoch " +
                                   std::to_string(epoch) + " batch " + std::to_string(b));
            epoch_loss += static_cast<double>(loss);
            store.zero_grads();
            std::vector<Matrix<T>> grad_recs;
            for (const auto& r : recs) grad_recs.emplace_back(r.rows(), r.cols());
            reconstruction_backward(xs, recs, scale, grad_recs);
            for (std::size_t v = 0; v < model.n_views(); ++v)
                model.views()[v].encoder.backward(model.views()[v].decoder.backward(grad_recs[v]));
            detail::clip_and_step(store, cfg);
        }
        report.pretrain_loss.push_back(epoch_loss / static_cast<double>(plan.batches.size()));
    }
}

// Stage 2: joint descent on L_fine; all parameters including heads.
template <typename T>
void finetune(CvclModel<T>& model, const MultiviewDataset& ds, const TrainConfig& cfg,
              TrainReport& report) {
    if (cfg.batch_size < 2) throw ConfigError("batch size must be >= 2 for fine-tuning");
    if (model.n_clusters() > cfg.batch_size)
        std::fprintf(stderr, "warning: batch size %d is smaller than n_clusters %d\n",
                     cfg.batch_size, model.n_clusters());
    const auto data = detail::cast_views<T>(ds);
    ParamStore<T> store;
    model.collect_params(store);
    const T tau = static_cast<T>(cfg.weights.tau);
    for (int epoch = 0; epoch < cfg.finetune_epochs; ++epoch) {
        const auto plan = plan_epoch(ds.n_samples(), cfg.batch_size, cfg.seed + 0x5be5e1, epoch);
        FineEpochTrace trace;
        for (std::size_t b = 0; b < plan.batches.size(); ++b) {
            std::vector<Matrix<T>> xs;
            for (std::size_t v = 0; v < model.n_views(); ++v)
                xs.push_back(gather_rows(data[v], plan.batches[b]));
            auto fwd = model.forward_all(xs);
            std::vector<Matrix<T>> ps;
            for (const auto& h : fwd.assignments) ps.push_back(target_distribution(h));

            const T scale =
                cfg.mean_recon ? T{1} / static_cast<T>(plan.batches[b].size()) : T{1};
            LossBreakdown<T> loss;
            loss.pre = scale * reconstruction_loss(xs, fwd.reconstructions);
            loss.contrastive = cross_view_contrastive_loss(ps, tau);
            loss.consistency = consistency_regularizer(ps);
            loss.total = loss.pre + static_cast<T>(cfg.weights.alpha) * loss.contrastive +
                         static_cast<T>(cfg.weights.beta) * loss.consistency;
            if (!std::isfinite(static_cast<double>(loss.total)))
                throw NumericError("non-finite fine-tuning loss at epoch " +
                                   std::to_string(epoch) + " batch " + std::to_string(b));
            trace.fine += static_cast<double>(loss.total);
            trace.pre += static_cast<double>(loss.pre);
            trace.contrastive += static_cast<double>(loss.contrastive);
            trace.consistency += static_cast<double>(loss.consistency);

            store.zero_grads();
            std::vector<Matrix<T>> grad_recs, grad_ps;
            for (const auto& r : fwd.reconstructions) grad_recs.emplace_back(r.rows(), r.cols());
            for (const auto& p : ps) grad_ps.emplace_back(p.rows(), p.cols());
            reconstruction_backward(xs, fwd.reconstructions, scale, grad_recs);
            cross_view_contrastive_backward(ps, tau, static_cast<T>(cfg.weights.alpha), grad_ps);
            consistency_regularizer_backward(ps, static_cast<T>(cfg.weights.beta), grad_ps);
            for (std::size_t v = 0; v < model.n_views(); ++v) {
                Matrix<T> grad_z =
                    model.views()[v].decoder.backward(grad_recs[v]);
                if (!cfg.detach_target) {
                    const Matrix<T> grad_h =
                        target_distribution_backward(fwd.assignments[v], grad_ps[v]);
                    grad_z += model.views()[v].head.backward(grad_h);
                }
                model.views()[v].encoder.backward(grad_z);
            }
            detail::clip_and_step(store, cfg);
        }
        const double nb = static_cast<double>(plan.batches.size());
        report.finetune.push_back(
            {trace.fine / nb, trace.pre / nb, trace.contrastive / nb, trace.consistency / nb});
    }
}

struct EvalOptions {
    int batch_size = 64;
    bool from_h = false;        // predict from raw H instead of sharpened P
    bool full_sharpen = false;  // sharpen with full-dataset column sums
};

// Per-view assignment matrices over the full dataset (rows in sample order),
// sharpened per evaluation batch unless full_sharpen is set.
template <typename T>
std::vector<Matrix<double>> assignment_matrices(CvclModel<T>& model, const MultiviewDataset& ds,
                                                const EvalOptions& opts) {
    const auto data = detail::cast_views<T>(ds);
    const std::size_t n = ds.n_samples();
    const std::size_t m = std::min<std::size_t>(n, static_cast<std::size_t>(opts.batch_size));
    std::vector<Matrix<double>> out;
    for (std::size_t v = 0; v < model.n_views(); ++v) {
        Matrix<double> full(n, model.n_clusters());
        for (std::size_t start = 0; start < n; start += m) {
            const std::size_t end = std::min(n, start + m);
            std::vector<std::size_t> idx(end - start);
            std::iota(idx.begin(), idx.end(), start);
            Matrix<T> h = model.cluster_probabilities(v, model.encode(v, gather_rows(data[v], idx)));
            if (!opts.from_h && !opts.full_sharpen) h = target_distribution(h);
            for (std::size_t i = 0; i < h.rows(); ++i)
                for (std::size_t j = 0; j < h.cols(); ++j)
                    full(start + i, j) = static_cast<double>(h(i, j));
        }
        if (!opts.from_h && opts.full_sharpen) full = target_distribution(full);
        out.push_back(std::move(full));
    }
    return out;
}

template <typename T>
struct RunResult {
    CvclModel<T> model;
    TrainReport report;
    std::vector<int> labels;
    std::optional<MetricsReport> metrics;
};

// The whole pipeline: pretrain, fine-tune, predict labels, evaluate when
// ground truth is present.
template <typename T>
RunResult<T> run_full(const MultiviewDataset& ds, const ModelConfig& model_cfg,
                      const TrainConfig& cfg) {
    ds.validate();
    const auto t0 = std::chrono::steady_clock::now();
    RunResult<T> result;
    result.model = CvclModel<T>::make(ds.view_dims(), ds.n_clusters, model_cfg, cfg.seed);
    pretrain(result.model, ds, cfg, result.report);
    finetune(result.model, ds, cfg, result.report);
    EvalOptions eval{.batch_size = cfg.batch_size};
    result.labels = predict_labels(assignment_matrices(result.model, ds, eval));
    if (ds.labels) result.metrics = evaluate_clustering(result.labels, *ds.labels);
    result.report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

}  // namespace cvcl
