// Command-line front end: dataset generation, training, evaluation, theory
// verification and alpha/beta grid search.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "cvcl/checkpoint.hpp"
#include "cvcl/config.hpp"
#include "cvcl/trainer.hpp"

namespace fs = std::filesystem;
using namespace cvcl;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

void write_labels(const std::vector<int>& labels, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write " + path.string());
    for (int l : labels) out << l << "\n";
}

void write_metrics(const MetricsReport& m, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write " + path.string());
    char buf[128];
    std::snprintf(buf, sizeof buf, "acc=%.6f\nnmi=%.6f\npurity=%.6f\n", m.acc, m.nmi, m.purity);
    out << buf;
}

std::map<std::string, std::string> parse_overrides(const std::vector<std::string>& sets) {
    std::map<std::string, std::string> out;
    for (const auto& s : sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError("--set expects key=value, got '" + s + "'");
        out[s.substr(0, eq)] = s.substr(eq + 1);
    }
    return out;
}

struct TrainOutcome {
    TrainReport report;
    std::vector<int> labels;
    std::optional<MetricsReport> metrics;
};

// Runs the pipeline in the configured precision and writes the checkpoint.
TrainOutcome run_and_save(const RunConfig& cfg, const MultiviewDataset& ds,
                          const fs::path& ckpt_path) {
    TrainOutcome out;
    if (cfg.precision == "float") {
        auto res = run_full<float>(ds, cfg.model, cfg.train);
        save_checkpoint(res.model, ckpt_path.string());
        out = {std::move(res.report), std::move(res.labels), std::move(res.metrics)};
    } else {
        auto res = run_full<double>(ds, cfg.model, cfg.train);
        save_checkpoint(res.model, ckpt_path.string());
        out = {std::move(res.report), std::move(res.labels), std::move(res.metrics)};
    }
    return out;
}

int cmd_generate(const SyntheticSpec& spec, const std::string& out_dir) {
    const MultiviewDataset ds = generate_synthetic(spec);
    save_dataset(ds, out_dir);
    std::cout << "wrote " << out_dir << ": N=" << ds.n_samples() << " views=" << ds.n_views()
              << " K=" << ds.n_clusters << " dims=";
    for (std::size_t v = 0; v < ds.n_views(); ++v)
        std::cout << (v ? "," : "") << ds.views[v].cols();
    std::cout << "\n";
    return kExitOk;
}

int cmd_train(const RunConfig& cfg) {
    if (cfg.output_dir.empty()) throw ConfigError("train: output directory not set");
    fs::create_directories(cfg.output_dir);
    const MultiviewDataset ds = load_config_dataset(cfg);
    const fs::path out(cfg.output_dir);
    const TrainOutcome res = run_and_save(cfg, ds, out / "model.ckpt");
    write_trace_csv(res.report, (out / "trace.csv").string());
    write_labels(res.labels, out / "labels.txt");
    if (res.metrics) {
        write_metrics(*res.metrics, out / "metrics.txt");
        std::printf("acc=%.6f nmi=%.6f purity=%.6f\n", res.metrics->acc, res.metrics->nmi,
                    res.metrics->purity);
    }
    std::printf("trained in %.1fs, artifacts in %s\n", res.report.wall_seconds,
                cfg.output_dir.c_str());
    return kExitOk;
}

int cmd_eval(const std::string& ckpt_path, const std::string& dataset_dir,
             const std::string& out_dir, const std::string& normalize_mode, int batch_size,
             bool from_h, bool full_sharpen) {
    CvclModel<double> model = load_checkpoint<double>(ckpt_path);
    MultiviewDataset ds = normalize(load_dataset(dataset_dir), parse_normalize_mode(normalize_mode));
    const auto model_dims = model.view_dims();
    const auto data_dims = ds.view_dims();
    if (model_dims != data_dims) {
        std::string msg = "checkpoint/dataset shape mismatch: model dims [";
        for (std::size_t i = 0; i < model_dims.size(); ++i)
            msg += (i ? "," : "") + std::to_string(model_dims[i]);
        msg += "] vs dataset dims [";
        for (std::size_t i = 0; i < data_dims.size(); ++i)
            msg += (i ? "," : "") + std::to_string(data_dims[i]);
        throw ConfigError(msg + "]");
    }
    EvalOptions opts{.batch_size = batch_size, .from_h = from_h, .full_sharpen = full_sharpen};
    const auto labels = predict_labels(assignment_matrices(model, ds, opts));
    fs::create_directories(out_dir);
    write_labels(labels, fs::path(out_dir) / "labels.txt");
    if (ds.labels) {
        const MetricsReport m = evaluate_clustering(labels, *ds.labels);
        write_metrics(m, fs::path(out_dir) / "metrics.txt");
        std::printf("acc=%.6f nmi=%.6f purity=%.6f\n", m.acc, m.nmi, m.purity);
    } else {
        std::printf("no labels in dataset; wrote predictions only\n");
    }
    return kExitOk;
}

int cmd_verify(int k_min, int k_max, int m_min, int m_max, std::vector<double> taus, int trials,
               std::uint64_t seed) {
    if (trials < 1) throw ConfigError("verify: --trials must be >= 1");
    if (k_min < 2 || k_max < k_min || m_min < 1 || m_max < m_min)
        throw ConfigError("verify: invalid K/m ranges");
    std::mt19937_64 rng(seed);
    long violations = 0;
    long checked = 0;
    for (double tau : taus) {
        for (int k = k_min; k <= k_max; ++k) {
            for (int m = m_min; m <= m_max; ++m) {
                const double bound = contrastive_loss_lower_bound(k, m, tau);
                for (int t = 0; t < trials; ++t) {
                    const auto pa = random_row_stochastic(m, k, rng);
                    const auto pb = random_row_stochastic(m, k, rng);
                    const double l = pairwise_contrastive_loss(pa, pb, tau);
                    ++checked;
                    if (l < bound) ++violations;
                }
            }
        }
    }
    std::printf("bound sweep: %ld checks, %ld violations\n", checked, violations);

    bool alignment_ok = true;
    const std::vector<std::vector<int>> size_sets = {{1, 1, 1}, {2, 3, 4}, {5, 5, 5}};
    for (double tau : taus) {
        for (const auto& sizes : size_sets) {
            const auto rep = verify_strict_alignment_minimality(sizes, tau, 100, seed);
            std::printf("alignment sizes=[%d,%d,%d] tau=%.3g: aligned=%.6g min_perturbed=%.6g "
                        "bound=%.3g %s\n",
                        sizes[0], sizes[1], sizes[2], tau, rep.aligned_loss, rep.min_perturbed,
                        rep.bound, rep.aligned_is_min ? "ok" : "VIOLATION");
            alignment_ok = alignment_ok && rep.aligned_is_min && rep.aligned_loss >= rep.bound;
        }
    }
    if (violations > 0 || !alignment_ok) {
        std::fprintf(stderr, "verification FAILED\n");
        return kExitRuntime;
    }
    std::printf("verification passed\n");
    return kExitOk;
}

int cmd_gridsearch(const RunConfig& base, const std::vector<double>& alphas,
                   const std::vector<double>& betas, const std::string& out_csv) {
    const MultiviewDataset ds = load_config_dataset(base);
    if (!ds.labels) throw ConfigError("gridsearch needs a labeled dataset");
    std::ofstream out(out_csv);
    if (!out) throw FormatError("cannot write " + out_csv);
    out << "alpha,beta,acc,nmi,purity\n";
    for (double a : alphas) {
        for (double b : betas) {
            RunConfig cfg = base;
            cfg.train.weights.alpha = a;
            cfg.train.weights.beta = b;
            try {
                std::optional<MetricsReport> m;
                if (cfg.precision == "float")
                    m = run_full<float>(ds, cfg.model, cfg.train).metrics;
                else
                    m = run_full<double>(ds, cfg.model, cfg.train).metrics;
                char buf[160];
                std::snprintf(buf, sizeof buf, "%g,%g,%.6f,%.6f,%.6f\n", a, b, m->acc, m->nmi,
                              m->purity);
                out << buf;
                out.flush();
                std::printf("alpha=%g beta=%g acc=%.4f nmi=%.4f purity=%.4f\n", a, b, m->acc,
                            m->nmi, m->purity);
            } catch (const std::exception& e) {
                std::fprintf(stderr, "cell alpha=%g beta=%g failed: %s\n", a, b, e.what());
            }
        }
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cross-view contrastive multiview clustering"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "Write a synthetic multiview dataset");
    SyntheticSpec spec;
    std::string gen_out;
    std::vector<int> gen_dims;
    gen->add_option("--views", spec.n_views, "number of views")->default_val(2);
    gen->add_option("--clusters", spec.n_clusters, "number of clusters")->default_val(3);
    gen->add_option("--per-cluster", spec.samples_per_cluster, "samples per cluster")
        ->default_val(100);
    gen->add_option("--dims", gen_dims, "per-view feature dimensions (comma separated)")
        ->delimiter(',')
        ->required();
    gen->add_option("--sigma", spec.noise_sigma, "noise standard deviation")->default_val(0.3);
    gen->add_option("--sep", spec.center_separation, "minimum center separation")
        ->default_val(4.0);
    gen->add_option("--disagreement", spec.view_disagreement,
                    "fraction of conflicting samples per non-first view")
        ->default_val(0.0);
    gen->add_option("--seed", spec.seed, "generator seed")->default_val(7);
    gen->add_option("--out", gen_out, "output directory")->required();

    // shared train/gridsearch config options
    std::string config_path, train_dataset, train_out;
    std::vector<std::string> overrides;
    auto add_config_opts = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "key=value config file");
        cmd->add_option("--dataset", train_dataset, "dataset directory (overrides config)");
        cmd->add_option("--out", train_out, "output directory (overrides config)");
        cmd->add_option("--set", overrides, "override a config key, e.g. --set train.tau=0.2");
    };

    auto* train = app.add_subcommand("train", "Two-stage training run");
    add_config_opts(train);
    std::map<std::string, std::string> flag_overrides;
    auto add_passthrough = [&](CLI::App* cmd, const std::string& flag, const std::string& key) {
        cmd->add_option_function<std::string>(
            flag, [&flag_overrides, key](const std::string& v) { flag_overrides[key] = v; });
    };
    add_passthrough(train, "--pretrain-epochs", "train.pretrain_epochs");
    add_passthrough(train, "--finetune-epochs", "train.finetune_epochs");
    add_passthrough(train, "--alpha", "train.alpha");
    add_passthrough(train, "--beta", "train.beta");
    add_passthrough(train, "--tau", "train.tau");
    add_passthrough(train, "--seed", "train.seed");
    add_passthrough(train, "--batch-size", "train.batch_size");
    add_passthrough(train, "--precision", "precision");

    // eval
    auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset");
    std::string eval_ckpt, eval_dataset, eval_out = ".", eval_norm = "minmax";
    int eval_batch = 64;
    bool eval_from_h = false, eval_full_sharpen = false;
    ev->add_option("--checkpoint", eval_ckpt)->required();
    ev->add_option("--dataset", eval_dataset)->required();
    ev->add_option("--out", eval_out, "output directory");
    ev->add_option("--normalize", eval_norm, "minmax|zscore|none");
    ev->add_option("--batch-size", eval_batch);
    ev->add_flag("--from-h", eval_from_h, "predict from raw assignments");
    ev->add_flag("--full-sharpen", eval_full_sharpen, "sharpen with full-dataset column sums");

    // verify
    auto* ver = app.add_subcommand("verify", "Theory checks: loss bound and alignment");
    int k_min = 2, k_max = 6, m_min = 4, m_max = 32, trials = 1000;
    std::uint64_t ver_seed = 1;
    std::vector<double> taus{0.2, 0.5, 1.0};
    ver->add_option("--k-min", k_min);
    ver->add_option("--k-max", k_max);
    ver->add_option("--m-min", m_min);
    ver->add_option("--m-max", m_max);
    ver->add_option("--tau", taus, "temperatures (comma separated)")->delimiter(',');
    ver->add_option("--trials", trials, "random pairs per (K,m,tau)");
    ver->add_option("--seed", ver_seed);

    // gridsearch
    auto* grid = app.add_subcommand("gridsearch", "Train per (alpha,beta) grid cell");
    add_config_opts(grid);
    std::vector<double> grid_alphas{0.005, 0.01, 0.05}, grid_betas{0.005, 0.01, 0.05};
    std::string grid_out = "grid.csv";
    grid->add_option("--alpha", grid_alphas, "alpha values")->delimiter(',');
    grid->add_option("--beta", grid_betas, "beta values")->delimiter(',');
    grid->add_option("--grid-out", grid_out, "output CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (gen->parsed()) {
            if (static_cast<int>(gen_dims.size()) != spec.n_views)
                throw ConfigError("--dims lists " + std::to_string(gen_dims.size()) +
                                  " values for " + std::to_string(spec.n_views) + " views");
            spec.dims_per_view = gen_dims;
            return cmd_generate(spec, gen_out);
        }
        if (train->parsed() || grid->parsed()) {
            std::map<std::string, std::string> file_keys;
            if (!config_path.empty()) file_keys = parse_key_value_file(config_path);
            auto merged_overrides = parse_overrides(overrides);
            for (const auto& [k, v] : flag_overrides) merged_overrides[k] = v;
            if (!train_dataset.empty()) merged_overrides["dataset"] = train_dataset;
            if (!train_out.empty()) merged_overrides["output"] = train_out;
            const RunConfig cfg = build_run_config(file_keys, merged_overrides);
            if (train->parsed()) return cmd_train(cfg);
            return cmd_gridsearch(cfg, grid_alphas, grid_betas, grid_out);
        }
        if (ev->parsed())
            return cmd_eval(eval_ckpt, eval_dataset, eval_out, eval_norm, eval_batch, eval_from_h,
                            eval_full_sharpen);
        if (ver->parsed())
            return cmd_verify(k_min, k_max, m_min, m_max, taus, trials, ver_seed);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitValidation;
    } catch (const FormatError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitValidation;
    } catch (const UsageError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitValidation;
    } catch (const GenerationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitValidation;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "runtime error: %s\n", e.what());
        return kExitRuntime;
    }
    return kExitValidation;
}
