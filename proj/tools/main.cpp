#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ae1svm/attribution.hpp"
#include "ae1svm/config.hpp"
#include "ae1svm/data.hpp"
#include "ae1svm/errors.hpp"
#include "ae1svm/eval.hpp"
#include "ae1svm/model.hpp"
#include "ae1svm/numio.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace ae1svm;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitArgument = 2;
constexpr int kExitData = 3;
constexpr int kExitTraining = 4;

LabeledDataset generate_dataset(const std::string& name, std::uint64_t seed) {
    if (name == "gaussian") return gen_gaussian(seed);
    if (name == "illustrative4d") return gen_illustrative_4d(seed);
    throw ArgumentError("unknown generator '" + name + "' (use gaussian or illustrative4d)");
}

void write_text_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path.string());
    out << text;
    if (!out) throw DataError("write failed: " + path.string());
}

void write_json_file(const fs::path& path, const json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

struct ScoresFile {
    std::vector<std::size_t> row_indices;
    Vector scores;
};

ScoresFile read_scores_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open scores file: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty scores file: " + path.string());
    ScoresFile out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const std::size_t c1 = line.find(',');
        const std::size_t c2 = line.find(',', c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos) {
            throw DataError("bad scores row at line " + std::to_string(line_no));
        }
        out.row_indices.push_back(static_cast<std::size_t>(std::stoull(line.substr(0, c1))));
        out.scores.push_back(parse_double(line.substr(c1 + 1, c2 - c1 - 1)));
    }
    if (out.scores.empty()) throw DataError("no scores in " + path.string());
    return out;
}

void write_scores_csv(const fs::path& path, const Vector& scores) {
    std::string text = "row_index,score,decision\n";
    for (std::size_t i = 0; i < scores.size(); ++i) {
        text += std::to_string(i);
        text += ',';
        text += format_double(scores[i]);
        text += ',';
        text += (scores[i] >= 0.0) ? "1" : "-1";
        text += '\n';
    }
    write_text_file(path, text);
}

// ---------------------------------------------------------------------------

int cmd_generate(const std::string& generator, std::uint64_t seed, const std::string& out_path) {
    LabeledDataset data = generate_dataset(generator, seed);
    save_csv(data, out_path);
    std::cout << "wrote " << out_path << ": " << data.rows() << " rows x "
              << (data.cols() + (data.labels ? 1 : 0)) << " columns (label included)\n";
    return kExitOk;
}

int cmd_train(const std::optional<std::string>& config_path,
              const std::map<std::string, std::string>& overrides) {
    RunConfig cfg;
    if (config_path) cfg = parse_config_file(*config_path);
    apply_overrides(cfg, overrides);
    validate(cfg);

    const fs::path out_dir(cfg.out_dir);
    fs::create_directories(out_dir);
    write_text_file(out_dir / "effective-config.cfg", to_config_text(cfg));

    LabeledDataset full;
    if (!cfg.generator.empty()) {
        full = generate_dataset(cfg.generator, cfg.seed);
    } else {
        CsvSchema schema;
        schema.label_column = cfg.label_column;
        schema.positive_label_values = cfg.positive_labels;
        schema.categorical_columns = cfg.categorical_columns;
        full = load_csv(cfg.dataset, schema);
    }

    LabeledDataset train_data;
    if (cfg.split_ratio < 1.0) {
        auto [train_half, test_half] = split(full, cfg.split_ratio, cfg.seed);
        save_csv(train_half, out_dir / "train.csv");
        save_csv(test_half, out_dir / "test.csv");
        train_data = std::move(train_half);
    } else {
        train_data = std::move(full);
    }

    Ae1SvmModel model(to_model_config(cfg, train_data.cols()), cfg.seed);
    const TrainReport report = model.fit(train_data, to_train_config(cfg));
    model.save(out_dir / "model.bin");

    json j;
    j["mode"] = cfg.mode;
    j["epochs"] = cfg.epochs;
    j["n_train"] = report.n_train;
    j["epoch_objectives"] = report.epoch_objectives;
    j["train_seconds"] = report.train_seconds;
    write_json_file(out_dir / "train_report.json", j);

    std::cout << "trained on " << report.n_train << " rows";
    if (!report.epoch_objectives.empty()) {
        std::cout << "; objective " << report.epoch_objectives.front() << " -> "
                  << report.epoch_objectives.back();
    }
    std::cout << " (" << report.train_seconds << " s)\n"
              << "model: " << (out_dir / "model.bin").string() << '\n';
    return kExitOk;
}

int cmd_score(const std::string& model_path, const std::string& data_path,
              const std::string& out_path, const std::string& label_column,
              const std::optional<std::string>& report_path) {
    const Ae1SvmModel model = Ae1SvmModel::load(model_path);
    CsvSchema schema;
    schema.label_column = label_column;
    const LabeledDataset data = load_csv(data_path, schema);
    if (data.cols() != model.input_dim()) {
        throw ArgumentError("feature width mismatch: model expects " +
                            std::to_string(model.input_dim()) + ", data has " +
                            std::to_string(data.cols()));
    }

    const auto t0 = std::chrono::steady_clock::now();
    const Vector scores = model.score(data.features);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    write_scores_csv(out_path, scores);
    if (report_path) {
        json j;
        j["n_scored"] = scores.size();
        j["score_seconds"] = seconds;
        write_json_file(*report_path, j);
    }
    std::size_t flagged = 0;
    for (double s : scores) {
        if (s < 0.0) ++flagged;
    }
    std::cout << "scored " << scores.size() << " rows, " << flagged << " flagged as anomalies ("
              << seconds << " s)\n";
    return kExitOk;
}

int cmd_explain(const std::string& model_path, const std::string& data_path,
                const std::vector<std::size_t>& rows, const std::string& label_column,
                const std::optional<std::string>& shape_text, const std::string& out_dir_path) {
    const Ae1SvmModel model = Ae1SvmModel::load(model_path);
    CsvSchema schema;
    schema.label_column = label_column;
    const LabeledDataset data = load_csv(data_path, schema);
    if (data.cols() != model.input_dim()) {
        throw ArgumentError("feature width mismatch: model expects " +
                            std::to_string(model.input_dim()) + ", data has " +
                            std::to_string(data.cols()));
    }

    std::optional<std::pair<std::size_t, std::size_t>> shape;
    if (shape_text) {
        const std::size_t x = shape_text->find('x');
        if (x == std::string::npos) throw ArgumentError("--shape must look like HxW, e.g. 16x16");
        try {
            shape = {std::stoull(shape_text->substr(0, x)), std::stoull(shape_text->substr(x + 1))};
        } catch (const std::exception&) {
            throw ArgumentError("--shape must look like HxW, e.g. 16x16");
        }
        if (shape->first * shape->second != data.cols()) {
            throw ArgumentError("shape " + *shape_text + " does not match feature count " +
                                std::to_string(data.cols()));
        }
    }

    const fs::path out_dir(out_dir_path);
    fs::create_directories(out_dir);
    for (std::size_t row : rows) {
        if (row >= data.rows()) {
            throw ArgumentError("row index " + std::to_string(row) + " out of range (" +
                                std::to_string(data.rows()) + " rows)");
        }
        const AttributionResult result = end_to_end_grad(model, data.features.row(row), row);

        const std::string stem = "row" + std::to_string(row);
        std::string text = "feature,gradient,positive,negative\n";
        for (std::size_t k = 0; k < result.gradient.size(); ++k) {
            const std::string name = (data.feature_names && k < data.feature_names->size())
                                         ? (*data.feature_names)[k]
                                         : ("f" + std::to_string(k));
            text += name + ',' + format_double(result.gradient[k]) + ',' +
                    format_double(result.positive_part[k]) + ',' +
                    format_double(result.negative_part[k]) + '\n';
        }
        write_text_file(out_dir / (stem + "_gradient.csv"), text);

        if (shape) {
            const GradientMaps maps = gradient_map(result, shape->first, shape->second);
            write_grid_csv(maps.positive, out_dir / (stem + "_map_positive.csv"));
            write_grid_csv(maps.negative, out_dir / (stem + "_map_negative.csv"));
            write_grid_csv(maps.full, out_dir / (stem + "_map_full.csv"));
            write_pgm(maps.positive, out_dir / (stem + "_map_positive.pgm"));
            write_pgm(maps.negative, out_dir / (stem + "_map_negative.pgm"));
            write_pgm(maps.full, out_dir / (stem + "_map_full.pgm"));
        }
    }
    std::cout << "explained " << rows.size() << " rows into " << out_dir.string() << '\n';
    return kExitOk;
}

int cmd_eval(const std::string& scores_path, const std::string& labels_path,
             const std::string& label_column, const std::vector<std::string>& positive_labels,
             int bins, const std::string& out_dir_path,
             const std::optional<std::string>& train_report_path,
             const std::optional<std::string>& score_report_path) {
    const ScoresFile scores = read_scores_csv(scores_path);

    CsvSchema schema;
    schema.label_column = label_column;
    schema.positive_label_values = positive_labels;
    const LabeledDataset labeled = load_csv(labels_path, schema);
    if (!labeled.labels) {
        throw MetricError("labels source " + labels_path + " has no '" + label_column +
                          "' column");
    }

    ScoredSet set;
    set.scores = scores.scores;
    set.labels.reserve(scores.row_indices.size());
    for (std::size_t idx : scores.row_indices) {
        if (idx >= labeled.labels->size()) {
            throw MetricError("scored row_index " + std::to_string(idx) +
                              " has no label (labels source has " +
                              std::to_string(labeled.labels->size()) + " rows)");
        }
        set.labels.push_back((*labeled.labels)[idx]);
    }

    const fs::path out_dir(out_dir_path);
    fs::create_directories(out_dir);

    json metrics;
    metrics["auroc"] = auroc(set);
    metrics["auprc"] = auprc(set);
    std::size_t n_train = 0;
    double train_seconds = 0.0;
    if (train_report_path) {
        std::ifstream in(*train_report_path);
        if (!in) throw DataError("cannot open train report: " + *train_report_path);
        json tr = json::parse(in, nullptr, true);
        n_train = tr.value("n_train", 0);
        train_seconds = tr.value("train_seconds", 0.0);
    }
    double score_seconds = 0.0;
    if (score_report_path) {
        std::ifstream in(*score_report_path);
        if (!in) throw DataError("cannot open score report: " + *score_report_path);
        json sr = json::parse(in, nullptr, true);
        score_seconds = sr.value("score_seconds", 0.0);
    }
    metrics["n_train"] = n_train;
    metrics["n_test"] = set.scores.size();
    metrics["train_seconds"] = train_seconds;
    metrics["score_seconds"] = score_seconds;
    write_json_file(out_dir / "metrics.json", metrics);

    std::string roc_text = "threshold,fpr,tpr\n";
    for (const RocPoint& p : roc_curve(set)) {
        roc_text += format_double(p.threshold) + ',' + format_double(p.fpr) + ',' +
                    format_double(p.tpr) + '\n';
    }
    write_text_file(out_dir / "roc.csv", roc_text);

    std::string pr_text = "threshold,recall,precision\n";
    for (const PrPoint& p : pr_curve(set)) {
        pr_text += format_double(p.threshold) + ',' + format_double(p.recall) + ',' +
                   format_double(p.precision) + '\n';
    }
    write_text_file(out_dir / "pr.csv", pr_text);

    const Histogram h = histogram(set, bins);
    std::string hist_text = "bin_left,bin_right,count_normal,count_anomaly\n";
    for (std::size_t b = 0; b + 1 < h.edges.size(); ++b) {
        hist_text += format_double(h.edges[b]) + ',' + format_double(h.edges[b + 1]) + ',' +
                     std::to_string(h.normal_counts[b]) + ',' +
                     std::to_string(h.anomaly_counts[b]) + '\n';
    }
    write_text_file(out_dir / "histogram.csv", hist_text);

    std::cout << "auroc " << metrics["auroc"].get<double>() << ", auprc "
              << metrics["auprc"].get<double>() << " over " << set.scores.size() << " rows\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"AE-1SVM: autoencoder + random-Fourier-feature one-class SVM anomaly detector"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "Write a synthetic dataset CSV");
    std::string gen_name;
    std::uint64_t gen_seed = 1;
    std::string gen_out;
    gen->add_option("--generator,-g", gen_name, "gaussian | illustrative4d")->required();
    gen->add_option("--seed", gen_seed, "RNG seed");
    gen->add_option("--out,-o", gen_out, "output CSV path")->required();

    // train
    auto* train = app.add_subcommand("train", "Train a model from a config file and/or flags");
    std::optional<std::string> train_config;
    train->add_option("--config,-c", train_config, "key = value config file");
    std::map<std::string, std::string> raw_flags;
    const std::vector<std::pair<std::string, std::string>> train_keys = {
        {"generator", "gaussian | illustrative4d"},
        {"dataset", "training CSV path"},
        {"label_column", "label column name (default: label)"},
        {"positive_labels", "comma list of label values mapped to +1"},
        {"categorical_columns", "comma list of one-hot columns"},
        {"encoder_dims", "comma list, last entry = bottleneck"},
        {"nu", "anomaly-fraction bound in (0,1]"},
        {"alpha", "reconstruction/margin trade-off"},
        {"sigma", "RBF bandwidth"},
        {"rff_dim", "number of random frequencies D"},
        {"epochs", "training epochs"},
        {"batch_size", "minibatch size"},
        {"learning_rate", "Adam learning rate"},
        {"seed", "run seed"},
        {"mode", "joint | two-stage"},
        {"split_ratio", "train fraction; < 1 writes train.csv/test.csv"},
        {"out_dir", "output directory"},
    };
    for (const auto& [key, help] : train_keys) {
        std::string flag = "--" + key;
        for (char& ch : flag) {
            if (ch == '_') ch = '-';
        }
        train->add_option_function<std::string>(
            flag, [&raw_flags, key = key](const std::string& v) { raw_flags[key] = v; }, help);
    }

    // score
    auto* score = app.add_subcommand("score", "Score samples with a trained model");
    std::string score_model, score_data, score_out, score_label = "label";
    std::optional<std::string> score_report;
    score->add_option("--model,-m", score_model, "model file")->required();
    score->add_option("--data,-d", score_data, "CSV to score")->required();
    score->add_option("--out,-o", score_out, "scores CSV path")->required();
    score->add_option("--label-column", score_label, "label column to drop if present");
    score->add_option("--report", score_report, "optional timing JSON path");

    // explain
    auto* explain = app.add_subcommand("explain", "Per-feature margin gradients for chosen rows");
    std::string ex_model, ex_data, ex_out, ex_label = "label";
    std::vector<std::size_t> ex_rows;
    std::optional<std::string> ex_shape;
    explain->add_option("--model,-m", ex_model, "model file")->required();
    explain->add_option("--data,-d", ex_data, "CSV with rows to explain")->required();
    explain->add_option("--rows,-r", ex_rows, "row indices")->required()->delimiter(',');
    explain->add_option("--label-column", ex_label, "label column to drop if present");
    explain->add_option("--shape", ex_shape, "HxW grid for gradient maps (e.g. 16x16)");
    explain->add_option("--out-dir,-o", ex_out, "output directory")->required();

    // eval
    auto* eval = app.add_subcommand("eval", "AUROC/AUPRC, curves, and score histogram");
    std::string ev_scores, ev_labels, ev_label = "label", ev_out;
    std::vector<std::string> ev_positive;
    int ev_bins = 50;
    std::optional<std::string> ev_train_report, ev_score_report;
    eval->add_option("--scores,-s", ev_scores, "scores CSV from `score`")->required();
    eval->add_option("--labels,-l", ev_labels, "dataset CSV containing the label column")
        ->required();
    eval->add_option("--label-column", ev_label, "label column name");
    eval->add_option("--positive-labels", ev_positive, "label values mapped to +1")
        ->delimiter(',');
    eval->add_option("--bins", ev_bins, "histogram bins");
    eval->add_option("--out-dir,-o", ev_out, "output directory")->required();
    eval->add_option("--train-report", ev_train_report, "train_report.json for timing columns");
    eval->add_option("--score-report", ev_score_report, "score timing JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitArgument;
    }

    try {
        if (gen->parsed()) return cmd_generate(gen_name, gen_seed, gen_out);
        if (train->parsed()) return cmd_train(train_config, raw_flags);
        if (score->parsed())
            return cmd_score(score_model, score_data, score_out, score_label, score_report);
        if (explain->parsed())
            return cmd_explain(ex_model, ex_data, ex_rows, ex_label, ex_shape, ex_out);
        if (eval->parsed())
            return cmd_eval(ev_scores, ev_labels, ev_label, ev_positive, ev_bins, ev_out,
                            ev_train_report, ev_score_report);
    } catch (const ArgumentError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitArgument;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const TrainingError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitTraining;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kExitTraining;
    }
    return kExitOk;
}
