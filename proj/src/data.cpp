#include "ae1svm/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "ae1svm/errors.hpp"
#include "ae1svm/numio.hpp"
#include "ae1svm/rng.hpp"

namespace ae1svm {

namespace {

// Shuffles rows (and labels) in place with the given seed.
void shuffle_rows(LabeledDataset& data, std::uint64_t seed) {
    std::vector<std::size_t> order(data.rows());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng = seeded_rng(seed, streams::dataset);
    std::shuffle(order.begin(), order.end(), rng);

    Matrix shuffled(data.rows(), data.cols());
    std::vector<int> labels(data.rows());
    for (std::size_t i = 0; i < order.size(); ++i) {
        auto src = data.features.row(order[i]);
        std::copy(src.begin(), src.end(), shuffled.row(i).begin());
        labels[i] = (*data.labels)[order[i]];
    }
    data.features = std::move(shuffled);
    data.labels = std::move(labels);
}

LabeledDataset take_rows(const LabeledDataset& data, const std::vector<std::size_t>& indices) {
    LabeledDataset out;
    out.features = Matrix(indices.size(), data.cols());
    if (data.labels) out.labels = std::vector<int>(indices.size());
    out.feature_names = data.feature_names;
    for (std::size_t i = 0; i < indices.size(); ++i) {
        auto src = data.features.row(indices[i]);
        std::copy(src.begin(), src.end(), out.features.row(i).begin());
        if (data.labels) (*out.labels)[i] = (*data.labels)[indices[i]];
    }
    return out;
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

std::string strip(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

LabeledDataset gen_gaussian(std::uint64_t seed) {
    constexpr std::size_t kDims = 512;
    constexpr std::size_t kNormals = 950;
    constexpr std::size_t kAnomalies = 50;

    std::mt19937_64 rng = seeded_rng(seed, streams::dataset);
    std::normal_distribution<double> normal_dist(0.0, 1.0);
    std::normal_distribution<double> anomaly_dist(0.0, 5.0);

    LabeledDataset data;
    data.features = Matrix(kNormals + kAnomalies, kDims);
    data.labels = std::vector<int>(kNormals + kAnomalies);
    for (std::size_t i = 0; i < kNormals + kAnomalies; ++i) {
        const bool anomaly = i >= kNormals;
        auto row = data.features.row(i);
        for (double& v : row) v = anomaly ? anomaly_dist(rng) : normal_dist(rng);
        (*data.labels)[i] = anomaly ? -1 : 1;
    }
    shuffle_rows(data, derive_seed(seed, 1));
    return data;
}

LabeledDataset gen_illustrative_4d(std::uint64_t seed) {
    constexpr std::size_t kNormals = 1950;
    constexpr std::size_t kAnomalies = 50;
    constexpr double kRadius = kIllustrativeCircleRadius;

    std::mt19937_64 rng = seeded_rng(seed, streams::dataset);
    std::uniform_real_distribution<double> in_box(0.5 - kRadius, 0.5 + kRadius);
    std::uniform_real_distribution<double> wide_box(-0.5, 1.5);
    std::uniform_real_distribution<double> tail_normal(-0.2, 0.2);
    std::uniform_real_distribution<double> tail_anomaly(-2.0, 2.0);

    LabeledDataset data;
    data.features = Matrix(kNormals + kAnomalies, 4);
    data.labels = std::vector<int>(kNormals + kAnomalies);

    for (std::size_t i = 0; i < kNormals; ++i) {
        double x1, x2;
        do {
            x1 = in_box(rng);
            x2 = in_box(rng);
        } while ((x1 - 0.5) * (x1 - 0.5) + (x2 - 0.5) * (x2 - 0.5) > kRadius * kRadius);
        auto row = data.features.row(i);
        row[0] = x1;
        row[1] = x2;
        row[2] = tail_normal(rng);
        row[3] = tail_normal(rng);
        (*data.labels)[i] = 1;
    }
    // anomalies stay clear of the circle by half a radius
    const double min_dist_sq = (1.5 * kRadius) * (1.5 * kRadius);
    for (std::size_t i = kNormals; i < kNormals + kAnomalies; ++i) {
        double x1, x2;
        do {
            x1 = wide_box(rng);
            x2 = wide_box(rng);
        } while ((x1 - 0.5) * (x1 - 0.5) + (x2 - 0.5) * (x2 - 0.5) <= min_dist_sq);
        auto row = data.features.row(i);
        row[0] = x1;
        row[1] = x2;
        row[2] = tail_anomaly(rng);
        row[3] = tail_anomaly(rng);
        (*data.labels)[i] = -1;
    }
    shuffle_rows(data, derive_seed(seed, 1));
    return data;
}

LabeledDataset load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw DataError("empty file: " + path.string());
    std::vector<std::string> header = split_line(strip(line));
    if (header.empty()) throw DataError("empty header row: " + path.string());
    for (std::string& h : header) h = strip(h);

    std::optional<std::size_t> label_idx;
    if (schema.label_column) {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == *schema.label_column) {
                label_idx = i;
                break;
            }
        }
        // a named label column may legitimately be absent (scoring-only data)
    }
    std::set<std::size_t> categorical_idx;
    for (const std::string& name : schema.categorical_columns) {
        bool found = false;
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) {
                categorical_idx.insert(i);
                found = true;
                break;
            }
        }
        if (!found) throw DataError("categorical column '" + name + "' not in header");
        if (label_idx && categorical_idx.count(*label_idx)) {
            throw DataError("label column '" + name + "' cannot also be categorical");
        }
    }

    std::vector<std::vector<std::string>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        std::string stripped = strip(line);
        if (stripped.empty()) continue;
        std::vector<std::string> cells = split_line(stripped);
        if (cells.size() != header.size()) {
            throw DataError("row " + std::to_string(line_no) + " has " +
                            std::to_string(cells.size()) + " cells, header has " +
                            std::to_string(header.size()));
        }
        rows.push_back(std::move(cells));
    }
    if (rows.empty()) throw DataError("no data rows in " + path.string());

    // collect categories per categorical column, sorted
    std::map<std::size_t, std::vector<std::string>> categories;
    for (std::size_t ci : categorical_idx) {
        std::set<std::string> values;
        for (const auto& row : rows) values.insert(strip(row[ci]));
        categories[ci] = std::vector<std::string>(values.begin(), values.end());
    }

    std::vector<std::string> feature_names;
    std::size_t width = 0;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (label_idx && c == *label_idx) continue;
        if (categorical_idx.count(c)) {
            for (const std::string& v : categories[c]) {
                feature_names.push_back(header[c] + "=" + v);
            }
            width += categories[c].size();
        } else {
            feature_names.push_back(header[c]);
            width += 1;
        }
    }
    if (width == 0) throw DataError("no feature columns in " + path.string());

    LabeledDataset data;
    data.features = Matrix(rows.size(), width);
    data.feature_names = std::move(feature_names);
    if (label_idx) data.labels = std::vector<int>(rows.size());

    const std::set<std::string> positive(schema.positive_label_values.begin(),
                                         schema.positive_label_values.end());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        auto out = data.features.row(r);
        std::size_t k = 0;
        for (std::size_t c = 0; c < header.size(); ++c) {
            const std::string cell = strip(rows[r][c]);
            if (label_idx && c == *label_idx) {
                int label;
                if (!positive.empty()) {
                    label = positive.count(cell) ? 1 : -1;
                } else if (cell == "1" || cell == "+1") {
                    label = 1;
                } else if (cell == "-1") {
                    label = -1;
                } else {
                    throw DataError("unknown label value '" + cell + "' at row " +
                                    std::to_string(r + 2));
                }
                (*data.labels)[r] = label;
            } else if (categorical_idx.count(c)) {
                const auto& cats = categories[c];
                for (std::size_t v = 0; v < cats.size(); ++v) {
                    out[k++] = (cats[v] == cell) ? 1.0 : 0.0;
                }
            } else {
                double value;
                try {
                    value = parse_double(cell);
                } catch (const DataError&) {
                    throw DataError("unparseable cell at row " + std::to_string(r + 2) +
                                    ", column '" + header[c] + "': '" + cell + "'");
                }
                if (!std::isfinite(value)) {
                    throw DataError("non-finite value at row " + std::to_string(r + 2) +
                                    ", column '" + header[c] + "'");
                }
                out[k++] = value;
            }
        }
    }
    return data;
}

void save_csv(const LabeledDataset& data, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);  // binary: byte-stable newlines
    if (!out) throw DataError("cannot write file: " + path.string());

    for (std::size_t c = 0; c < data.cols(); ++c) {
        if (c) out << ',';
        if (data.feature_names && c < data.feature_names->size()) {
            out << (*data.feature_names)[c];
        } else {
            out << 'f' << c;
        }
    }
    if (data.labels) out << ",label";
    out << '\n';

    for (std::size_t r = 0; r < data.rows(); ++r) {
        auto row = data.features.row(r);
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out << ',';
            out << format_double(row[c]);
        }
        if (data.labels) out << ',' << (*data.labels)[r];
        out << '\n';
    }
    if (!out) throw DataError("write failed: " + path.string());
}

std::pair<LabeledDataset, LabeledDataset> split(const LabeledDataset& data, double ratio,
                                                std::uint64_t seed) {
    if (!(ratio > 0.0) || !(ratio < 1.0)) {
        throw ArgumentError("split: ratio must be in (0, 1)");
    }
    std::mt19937_64 rng = seeded_rng(seed, streams::split);

    std::vector<std::size_t> train_idx;
    std::vector<std::size_t> test_idx;
    auto partition = [&](std::vector<std::size_t>& pool) {
        std::shuffle(pool.begin(), pool.end(), rng);
        const std::size_t n_train =
            static_cast<std::size_t>(std::llround(ratio * static_cast<double>(pool.size())));
        train_idx.insert(train_idx.end(), pool.begin(), pool.begin() + n_train);
        test_idx.insert(test_idx.end(), pool.begin() + n_train, pool.end());
    };

    if (data.labels) {
        std::vector<std::size_t> normals, anomalies;
        for (std::size_t i = 0; i < data.rows(); ++i) {
            ((*data.labels)[i] == -1 ? anomalies : normals).push_back(i);
        }
        partition(normals);
        partition(anomalies);
    } else {
        std::vector<std::size_t> all(data.rows());
        std::iota(all.begin(), all.end(), 0);
        partition(all);
    }
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());
    return {take_rows(data, train_idx), take_rows(data, test_idx)};
}

}  // namespace ae1svm
