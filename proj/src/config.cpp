#include "cvcl/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace cvcl {

namespace {

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "dataset",
        "normalize",
        "output",
        "precision",
        "synthetic.views",
        "synthetic.clusters",
        "synthetic.per_cluster",
        "synthetic.dims",
        "synthetic.sigma",
        "synthetic.separation",
        "synthetic.disagreement",
        "synthetic.seed",
        "model.hidden",
        "model.r1",
        "model.r2",
        "model.head_relu",
        "train.pretrain_epochs",
        "train.finetune_epochs",
        "train.batch_size",
        "train.alpha",
        "train.beta",
        "train.tau",
        "train.seed",
        "train.optimizer",
        "train.lr",
        "train.momentum",
        "train.beta1",
        "train.beta2",
        "train.eps",
        "train.weight_decay",
        "train.detach_target",
        "train.clip_norm",
        "train.mean_recon",
        "eval.from_h",
        "eval.full_sharpen",
    };
    return keys;
}

int to_int(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const int x = std::stoi(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': expected integer, got '" + v + "'");
    }
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': expected number, got '" + v + "'");
    }
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "1" || v == "true" || v == "on") return true;
    if (v == "0" || v == "false" || v == "off") return false;
    throw ConfigError("config key '" + key + "': expected boolean, got '" + v + "'");
}

std::vector<int> to_int_list(const std::string& key, const std::string& v) {
    std::vector<int> out;
    std::stringstream ss(v);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(to_int(key, cell));
    return out;
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

}  // namespace

std::map<std::string, std::string> parse_key_value_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::map<std::string, std::string> keys;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key=value");
        keys[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
    }
    return keys;
}

RunConfig build_run_config(const std::map<std::string, std::string>& file_keys,
                           const std::map<std::string, std::string>& overrides) {
    std::map<std::string, std::string> merged = file_keys;
    for (const auto& [k, v] : overrides) merged[k] = v;
    for (const auto& [k, v] : merged)
        if (!known_keys().count(k)) throw ConfigError("unknown config key '" + k + "'");

    RunConfig cfg;
    bool has_synth = false;
    for (const auto& [k, v] : merged)
        if (k.rfind("synthetic.", 0) == 0) has_synth = true;
    if (has_synth) cfg.synthetic = SyntheticSpec{};

    for (const auto& [k, v] : merged) {
        if (k == "dataset") cfg.dataset_path = v;
        else if (k == "normalize") cfg.normalize = parse_normalize_mode(v);
        else if (k == "output") cfg.output_dir = v;
        else if (k == "precision") {
            if (v != "double" && v != "float")
                throw ConfigError("precision must be 'double' or 'float'");
            cfg.precision = v;
        } else if (k == "synthetic.views") cfg.synthetic->n_views = to_int(k, v);
        else if (k == "synthetic.clusters") cfg.synthetic->n_clusters = to_int(k, v);
        else if (k == "synthetic.per_cluster") cfg.synthetic->samples_per_cluster = to_int(k, v);
        else if (k == "synthetic.dims") cfg.synthetic->dims_per_view = to_int_list(k, v);
        else if (k == "synthetic.sigma") cfg.synthetic->noise_sigma = to_double(k, v);
        else if (k == "synthetic.separation") cfg.synthetic->center_separation = to_double(k, v);
        else if (k == "synthetic.disagreement") cfg.synthetic->view_disagreement = to_double(k, v);
        else if (k == "synthetic.seed")
            cfg.synthetic->seed = static_cast<std::uint64_t>(to_int(k, v));
        else if (k == "model.hidden") cfg.model.hidden = to_int_list(k, v);
        else if (k == "model.r1") cfg.model.r1 = to_int(k, v);
        else if (k == "model.r2") cfg.model.r2 = to_int(k, v);
        else if (k == "model.head_relu") cfg.model.head_relu = to_bool(k, v);
        else if (k == "train.pretrain_epochs") cfg.train.pretrain_epochs = to_int(k, v);
        else if (k == "train.finetune_epochs") cfg.train.finetune_epochs = to_int(k, v);
        else if (k == "train.batch_size") cfg.train.batch_size = to_int(k, v);
        else if (k == "train.alpha") cfg.train.weights.alpha = to_double(k, v);
        else if (k == "train.beta") cfg.train.weights.beta = to_double(k, v);
        else if (k == "train.tau") cfg.train.weights.tau = to_double(k, v);
        else if (k == "train.seed") cfg.train.seed = static_cast<std::uint64_t>(to_int(k, v));
        else if (k == "train.optimizer") {
            if (v == "adam") cfg.train.opt.kind = OptimizerConfig::Kind::Adam;
            else if (v == "momentum") cfg.train.opt.kind = OptimizerConfig::Kind::Momentum;
            else throw ConfigError("train.optimizer must be 'adam' or 'momentum'");
        } else if (k == "train.lr") cfg.train.opt.learning_rate = to_double(k, v);
        else if (k == "train.momentum") cfg.train.opt.momentum = to_double(k, v);
        else if (k == "train.beta1") cfg.train.opt.beta1 = to_double(k, v);
        else if (k == "train.beta2") cfg.train.opt.beta2 = to_double(k, v);
        else if (k == "train.eps") cfg.train.opt.eps = to_double(k, v);
        else if (k == "train.weight_decay") cfg.train.opt.weight_decay = to_double(k, v);
        else if (k == "train.detach_target") cfg.train.detach_target = to_bool(k, v);
        else if (k == "train.clip_norm") cfg.train.clip_norm = to_double(k, v);
        else if (k == "train.mean_recon") cfg.train.mean_recon = to_bool(k, v);
        else if (k == "eval.from_h") cfg.eval.from_h = to_bool(k, v);
        else if (k == "eval.full_sharpen") cfg.eval.full_sharpen = to_bool(k, v);
    }
    cfg.eval.batch_size = cfg.train.batch_size;

    if (cfg.dataset_path.empty() && !cfg.synthetic)
        throw ConfigError("config must set 'dataset' or synthetic.* keys");
    if (!cfg.dataset_path.empty() && cfg.synthetic)
        throw ConfigError("'dataset' and synthetic.* keys are mutually exclusive");
    if (cfg.train.pretrain_epochs < 0 || cfg.train.finetune_epochs < 0)
        throw ConfigError("epoch counts must be >= 0");
    if (!(cfg.train.weights.tau > 0)) throw ConfigError("train.tau must be > 0");
    if (cfg.train.weights.alpha < 0 || cfg.train.weights.beta < 0)
        throw ConfigError("train.alpha and train.beta must be >= 0");
    return cfg;
}

MultiviewDataset load_config_dataset(const RunConfig& cfg) {
    MultiviewDataset ds =
        cfg.synthetic ? generate_synthetic(*cfg.synthetic) : load_dataset(cfg.dataset_path);
    return normalize(ds, cfg.normalize);
}

}  // namespace cvcl
