#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "ae1svm/model.hpp"

namespace ae1svm {

// Everything a training run needs, resolved from a flat key=value
// config file plus command-line overrides (flags win). The effective
// config is written next to the outputs; re-running from that file
// reproduces the model and scores byte for byte.
struct RunConfig {
    // data source: exactly one of the two
    std::string generator;  // "gaussian" | "illustrative4d"
    std::string dataset;    // CSV path

    std::string label_column = "label";
    std::vector<std::string> positive_labels;
    std::vector<std::string> categorical_columns;

    std::vector<std::size_t> encoder_dims = {128, 32};
    double nu = 0.4;
    double alpha = 1000.0;
    double sigma = 3.0;
    std::size_t rff_dim = 500;

    std::size_t epochs = 30;
    std::size_t batch_size = 32;
    double learning_rate = 0.01;
    std::uint64_t seed = 1;
    std::string mode = "joint";  // "joint" | "two-stage"
    double split_ratio = 1.0;    // train fraction; 1.0 = no held-out split

    std::string out_dir;
};

// Parses `key = value` lines; '#' starts a comment. Unknown keys are
// rejected. Throws ArgumentError listing every violation at once.
RunConfig parse_config_file(const std::filesystem::path& path);

// Applies key=value overrides on top of a base config.
void apply_overrides(RunConfig& cfg, const std::map<std::string, std::string>& overrides);

// Validates ranges and cross-field rules; throws ArgumentError listing
// every violation at once.
void validate(const RunConfig& cfg);

// Serializes with all defaults resolved, parseable by parse_config_file.
std::string to_config_text(const RunConfig& cfg);

TrainMode parse_mode(const std::string& mode);
TrainConfig to_train_config(const RunConfig& cfg);
Ae1SvmModel::Config to_model_config(const RunConfig& cfg, std::size_t input_dim);

}  // namespace ae1svm
