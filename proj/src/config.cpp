#include "ae1svm/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "ae1svm/errors.hpp"
#include "ae1svm/numio.hpp"

namespace ae1svm {

namespace {

const std::set<std::string> kKnownKeys = {
    "generator",      "dataset",       "label_column", "positive_labels",
    "categorical_columns", "encoder_dims", "nu",       "alpha",
    "sigma",          "rff_dim",       "epochs",       "batch_size",
    "learning_rate",  "seed",          "mode",         "split_ratio",
    "out_dir",
};

std::string strip(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = strip(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ',';
        out += items[i];
    }
    return out;
}

void set_key(RunConfig& cfg, const std::string& key, const std::string& value,
             std::vector<std::string>& errors) {
    try {
        if (key == "generator") {
            cfg.generator = value;
        } else if (key == "dataset") {
            cfg.dataset = value;
        } else if (key == "label_column") {
            cfg.label_column = value;
        } else if (key == "positive_labels") {
            cfg.positive_labels = split_list(value);
        } else if (key == "categorical_columns") {
            cfg.categorical_columns = split_list(value);
        } else if (key == "encoder_dims") {
            cfg.encoder_dims.clear();
            for (const std::string& d : split_list(value)) {
                const long v = std::stol(d);
                if (v < 1) throw std::out_of_range("non-positive");
                cfg.encoder_dims.push_back(static_cast<std::size_t>(v));
            }
        } else if (key == "nu") {
            cfg.nu = parse_double(value);
        } else if (key == "alpha") {
            cfg.alpha = parse_double(value);
        } else if (key == "sigma") {
            cfg.sigma = parse_double(value);
        } else if (key == "rff_dim") {
            cfg.rff_dim = static_cast<std::size_t>(std::stoul(value));
        } else if (key == "epochs") {
            cfg.epochs = static_cast<std::size_t>(std::stoul(value));
        } else if (key == "batch_size") {
            cfg.batch_size = static_cast<std::size_t>(std::stoul(value));
        } else if (key == "learning_rate") {
            cfg.learning_rate = parse_double(value);
        } else if (key == "seed") {
            cfg.seed = std::stoull(value);
        } else if (key == "mode") {
            cfg.mode = value;
        } else if (key == "split_ratio") {
            cfg.split_ratio = parse_double(value);
        } else if (key == "out_dir") {
            cfg.out_dir = value;
        } else {
            errors.push_back("unknown key '" + key + "'");
        }
    } catch (const std::exception&) {
        errors.push_back("bad value for '" + key + "': '" + value + "'");
    }
}

}  // namespace

RunConfig parse_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ArgumentError("cannot open config file: " + path.string());

    RunConfig cfg;
    std::vector<std::string> errors;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = strip(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            errors.push_back("line " + std::to_string(line_no) + ": expected key = value");
            continue;
        }
        const std::string key = strip(line.substr(0, eq));
        const std::string value = strip(line.substr(eq + 1));
        if (!kKnownKeys.count(key)) {
            errors.push_back("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
            continue;
        }
        set_key(cfg, key, value, errors);
    }
    if (!errors.empty()) {
        std::string msg = "config errors in " + path.string() + ":";
        for (const std::string& e : errors) msg += "\n  - " + e;
        throw ArgumentError(msg);
    }
    return cfg;
}

void apply_overrides(RunConfig& cfg, const std::map<std::string, std::string>& overrides) {
    std::vector<std::string> errors;
    for (const auto& [key, value] : overrides) {
        if (!kKnownKeys.count(key)) {
            errors.push_back("unknown key '" + key + "'");
            continue;
        }
        set_key(cfg, key, value, errors);
    }
    if (!errors.empty()) {
        std::string msg = "override errors:";
        for (const std::string& e : errors) msg += "\n  - " + e;
        throw ArgumentError(msg);
    }
}

void validate(const RunConfig& cfg) {
    std::vector<std::string> errors;
    if (cfg.generator.empty() == cfg.dataset.empty()) {
        errors.push_back("exactly one of 'generator' and 'dataset' must be set");
    }
    if (!cfg.generator.empty() && cfg.generator != "gaussian" &&
        cfg.generator != "illustrative4d") {
        errors.push_back("generator must be 'gaussian' or 'illustrative4d', got '" +
                         cfg.generator + "'");
    }
    if (cfg.encoder_dims.empty()) errors.push_back("encoder_dims must be non-empty");
    for (std::size_t d : cfg.encoder_dims) {
        if (d < 1) errors.push_back("encoder_dims entries must be >= 1");
    }
    if (!(cfg.nu > 0.0) || cfg.nu > 1.0) errors.push_back("nu must be in (0, 1]");
    if (!(cfg.alpha >= 0.0)) errors.push_back("alpha must be non-negative");
    if (!(cfg.sigma > 0.0)) errors.push_back("sigma must be positive");
    if (cfg.rff_dim < 1) errors.push_back("rff_dim must be >= 1");
    if (cfg.batch_size < 1) errors.push_back("batch_size must be >= 1");
    if (!(cfg.learning_rate > 0.0)) errors.push_back("learning_rate must be positive");
    if (cfg.mode != "joint" && cfg.mode != "two-stage") {
        errors.push_back("mode must be 'joint' or 'two-stage', got '" + cfg.mode + "'");
    }
    if (!(cfg.split_ratio > 0.0) || cfg.split_ratio > 1.0) {
        errors.push_back("split_ratio must be in (0, 1]");
    }
    if (cfg.out_dir.empty()) errors.push_back("out_dir must be set");

    if (!errors.empty()) {
        std::string msg = "invalid configuration:";
        for (const std::string& e : errors) msg += "\n  - " + e;
        throw ArgumentError(msg);
    }
}

std::string to_config_text(const RunConfig& cfg) {
    std::ostringstream out;
    out << "generator = " << cfg.generator << '\n';
    out << "dataset = " << cfg.dataset << '\n';
    out << "label_column = " << cfg.label_column << '\n';
    out << "positive_labels = " << join(cfg.positive_labels) << '\n';
    out << "categorical_columns = " << join(cfg.categorical_columns) << '\n';
    out << "encoder_dims = ";
    for (std::size_t i = 0; i < cfg.encoder_dims.size(); ++i) {
        if (i) out << ',';
        out << cfg.encoder_dims[i];
    }
    out << '\n';
    out << "nu = " << format_double(cfg.nu) << '\n';
    out << "alpha = " << format_double(cfg.alpha) << '\n';
    out << "sigma = " << format_double(cfg.sigma) << '\n';
    out << "rff_dim = " << cfg.rff_dim << '\n';
    out << "epochs = " << cfg.epochs << '\n';
    out << "batch_size = " << cfg.batch_size << '\n';
    out << "learning_rate = " << format_double(cfg.learning_rate) << '\n';
    out << "seed = " << cfg.seed << '\n';
    out << "mode = " << cfg.mode << '\n';
    out << "split_ratio = " << format_double(cfg.split_ratio) << '\n';
    out << "out_dir = " << cfg.out_dir << '\n';
    return out.str();
}

TrainMode parse_mode(const std::string& mode) {
    if (mode == "joint") return TrainMode::Joint;
    if (mode == "two-stage") return TrainMode::TwoStage;
    throw ArgumentError("mode must be 'joint' or 'two-stage', got '" + mode + "'");
}

TrainConfig to_train_config(const RunConfig& cfg) {
    TrainConfig tc;
    tc.epochs = cfg.epochs;
    tc.batch_size = cfg.batch_size;
    tc.learning_rate = cfg.learning_rate;
    tc.seed = cfg.seed;
    tc.mode = parse_mode(cfg.mode);
    return tc;
}

Ae1SvmModel::Config to_model_config(const RunConfig& cfg, std::size_t input_dim) {
    Ae1SvmModel::Config mc;
    mc.input_dim = input_dim;
    mc.encoder_dims = cfg.encoder_dims;
    mc.rff_dim = cfg.rff_dim;
    mc.sigma = cfg.sigma;
    mc.nu = cfg.nu;
    mc.alpha = cfg.alpha;
    return mc;
}

}  // namespace ae1svm
