#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ae1svm/matrix.hpp"

namespace ae1svm {

// Row-major sample matrix with optional {+1 normal, -1 anomaly} labels.
// Labels are used for evaluation only, never by training.
struct LabeledDataset {
    Matrix features;
    std::optional<std::vector<int>> labels;
    std::optional<std::vector<std::string>> feature_names;

    std::size_t rows() const { return features.rows(); }
    std::size_t cols() const { return features.cols(); }
};

// 950 normal rows ~ N(0,1)^512 plus 50 anomaly rows ~ N(0,5)^512,
// labeled and shuffled.
LabeledDataset gen_gaussian(std::uint64_t seed);

// 1950 normals: dims 1-2 uniform inside the circle centered (0.5, 0.5)
// with radius 0.35, dims 3-4 uniform [-0.2, 0.2]. 50 anomalies: dims 1-2
// on [-0.5, 1.5]^2 at distance > 1.5 * radius from the center, dims 3-4
// uniform [-2, 2].
LabeledDataset gen_illustrative_4d(std::uint64_t seed);

inline constexpr double kIllustrativeCircleRadius = 0.35;

struct CsvSchema {
    std::optional<std::string> label_column;
    // Label cells in this set map to +1. When empty, only the canonical
    // values "1" / "+1" (normal) and "-1" (anomaly) are accepted.
    std::vector<std::string> positive_label_values;
    std::vector<std::string> categorical_columns;  // expanded one-hot
};

// Comma-delimited, header row required. Numeric columns parse as 64-bit
// reals; categorical columns expand one-hot in sorted category order.
LabeledDataset load_csv(const std::filesystem::path& path, const CsvSchema& schema = {});

// Writes header + rows; labels appear as a trailing `label` column of
// 1 / -1. Numeric formatting round-trips bit-exactly through load_csv.
void save_csv(const LabeledDataset& data, const std::filesystem::path& path);

// Disjoint (train, test) row partition, stratified by label when labels
// exist. `ratio` is the train fraction.
std::pair<LabeledDataset, LabeledDataset> split(const LabeledDataset& data, double ratio,
                                                std::uint64_t seed);

}  // namespace ae1svm
