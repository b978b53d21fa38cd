#pragma once

#include <map>
#include <string>

#include "cvcl/dataset.hpp"
#include "cvcl/model.hpp"
#include "cvcl/trainer.hpp"

namespace cvcl {

// One reproducible run: dataset source, architecture, training settings and
// the output directory, assembled from a flat key=value file plus overrides.
struct RunConfig {
    std::string dataset_path;                 // empty when synthetic.* is used
    std::optional<SyntheticSpec> synthetic;
    NormalizeMode normalize = NormalizeMode::MinMax;
    ModelConfig model;
    TrainConfig train;
    std::string precision = "double";  // or "float"
    EvalOptions eval;
    std::string output_dir;
};

// key=value lines, '#' comments, blank lines ignored.
std::map<std::string, std::string> parse_key_value_file(const std::string& path);

// Unknown keys are rejected; overrides win over file keys.
RunConfig build_run_config(const std::map<std::string, std::string>& file_keys,
                           const std::map<std::string, std::string>& overrides);

// The dataset named by the config, normalized per its mode.
MultiviewDataset load_config_dataset(const RunConfig& cfg);

}  // namespace cvcl
