#include "hfedsn/config.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace hfedsn {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::set<std::string>& known,
                         const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        if (!known.contains(key)) {
            throw ConfigError("unknown key \"" + key + "\" in " + where);
        }
    }
}

const json& require(const json& obj, const std::string& key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) {
        throw ConfigError("missing required key \"" + key + "\" in " + where);
    }
    return *it;
}

template <typename T>
T get_as(const json& value, const std::string& key) {
    try {
        return value.get<T>();
    } catch (const json::exception&) {
        throw ConfigError("key \"" + key + "\" has the wrong type");
    }
}

template <typename T>
T required(const json& obj, const std::string& key, const std::string& where) {
    return get_as<T>(require(obj, key, where), key);
}

template <typename T>
T optional_or(const json& obj, const std::string& key, T fallback) {
    auto it = obj.find(key);
    return it == obj.end() ? fallback : get_as<T>(*it, key);
}

Algorithm parse_algorithm(const std::string& name) {
    if (name == "hfedsn") return Algorithm::HFedSn;
    if (name == "hierfavg") return Algorithm::HierFavg;
    if (name == "topk") return Algorithm::Topk;
    throw ConfigError("unknown algorithm \"" + name +
                      "\" (expected hfedsn, hierfavg, or topk)");
}

ArchVariant parse_arch(const std::string& name) {
    if (name == "conv4") return ArchVariant::Conv4;
    if (name == "mlp") return ArchVariant::Mlp;
    throw ConfigError("unknown arch \"" + name + "\" (expected conv4 or mlp)");
}

DatasetConfig parse_dataset(const json& obj) {
    if (!obj.is_object()) {
        throw ConfigError("\"dataset\" must be an object");
    }
    DatasetConfig ds;
    std::string kind = required<std::string>(obj, "kind", "dataset");
    if (kind == "blobs") {
        reject_unknown_keys(obj,
                            {"kind", "classes", "shape", "train_per_class",
                             "test_per_class", "spread"},
                            "dataset");
        ds.kind = DatasetConfig::Kind::Blobs;
        ds.blob_classes = optional_or<int>(obj, "classes", ds.blob_classes);
        if (auto it = obj.find("shape"); it != obj.end()) {
            auto dims = get_as<std::vector<int>>(*it, "shape");
            if (dims.size() != 3) {
                throw ConfigError("dataset shape must have 3 entries");
            }
            ds.blob_shape = Shape{dims[0], dims[1], dims[2]};
        }
        ds.blob_train_per_class =
            optional_or<int>(obj, "train_per_class", ds.blob_train_per_class);
        ds.blob_test_per_class =
            optional_or<int>(obj, "test_per_class", ds.blob_test_per_class);
        ds.blob_spread = optional_or<double>(obj, "spread", ds.blob_spread);
        return ds;
    }
    if (kind == "idx") {
        reject_unknown_keys(
            obj, {"kind", "train_images", "train_labels", "test_images", "test_labels"},
            "dataset");
        ds.kind = DatasetConfig::Kind::Idx;
        ds.train_images = required<std::string>(obj, "train_images", "dataset");
        ds.train_labels = required<std::string>(obj, "train_labels", "dataset");
        ds.test_images = required<std::string>(obj, "test_images", "dataset");
        ds.test_labels = required<std::string>(obj, "test_labels", "dataset");
        return ds;
    }
    throw ConfigError("unknown dataset kind \"" + kind + "\" (expected blobs or idx)");
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!root.is_object()) {
        throw ConfigError("config root must be an object");
    }
    reject_unknown_keys(root,
                        {"algorithm", "topology", "arch", "rounds", "tau", "eta", "batch",
                         "n_classes_per_client", "seed", "dataset", "output_dir",
                         "accounting", "topk_fraction", "topk_index_bits", "reset_period",
                         "reset_phase", "ste", "deterministic_eval", "eval"},
                        "config");

    ExperimentConfig cfg;
    cfg.run.algorithm = parse_algorithm(required<std::string>(root, "algorithm", "config"));
    cfg.run.topology = required<std::string>(root, "topology", "config");
    cfg.run.arch = parse_arch(required<std::string>(root, "arch", "config"));
    cfg.run.rounds = required<int>(root, "rounds", "config");
    cfg.run.tau = required<int>(root, "tau", "config");
    cfg.run.eta = required<double>(root, "eta", "config");
    cfg.run.batch_size = required<int>(root, "batch", "config");
    cfg.run.labels_per_client = required<int>(root, "n_classes_per_client", "config");
    cfg.run.seed = required<std::uint64_t>(root, "seed", "config");
    cfg.dataset = parse_dataset(require(root, "dataset", "config"));
    cfg.output_dir = optional_or<std::string>(root, "output_dir", cfg.output_dir);

    if (cfg.run.rounds < 1) throw ConfigError("\"rounds\" must be at least 1");
    if (cfg.run.tau < 0) throw ConfigError("\"tau\" cannot be negative");
    if (cfg.run.batch_size < 1) throw ConfigError("\"batch\" must be at least 1");
    if (cfg.run.labels_per_client < 1) {
        throw ConfigError("\"n_classes_per_client\" must be at least 1");
    }

    std::string accounting = optional_or<std::string>(root, "accounting", "paper");
    if (accounting == "paper") {
        cfg.run.cost_mode = AccountingMode::Paper;
    } else if (accounting == "physical") {
        cfg.run.cost_mode = AccountingMode::Physical;
    } else {
        throw ConfigError("unknown accounting \"" + accounting +
                          "\" (expected paper or physical)");
    }

    cfg.run.topk_fraction = optional_or<double>(root, "topk_fraction", cfg.run.topk_fraction);
    if (cfg.run.topk_fraction <= 0.0 || cfg.run.topk_fraction > 1.0) {
        throw ConfigError("\"topk_fraction\" must be in (0, 1]");
    }
    cfg.run.topk_index_bits =
        optional_or<bool>(root, "topk_index_bits", cfg.run.topk_index_bits);
    cfg.run.reset.period = optional_or<int>(root, "reset_period", cfg.run.reset.period);
    cfg.run.reset.phase = optional_or<int>(root, "reset_phase", cfg.run.reset.phase);

    std::string ste = optional_or<std::string>(root, "ste", "identity");
    if (ste == "identity") {
        cfg.run.ste = SteMode::Identity;
    } else if (ste == "theta_scaled") {
        cfg.run.ste = SteMode::ThetaScaled;
    } else {
        throw ConfigError("unknown ste \"" + ste + "\" (expected identity or theta_scaled)");
    }

    cfg.run.deterministic_eval =
        optional_or<bool>(root, "deterministic_eval", cfg.run.deterministic_eval);
    std::string eval = optional_or<std::string>(root, "eval", "per_round");
    if (eval == "per_round") {
        cfg.run.eval_mode = EvalMode::PerRound;
    } else if (eval == "final_only") {
        cfg.run.eval_mode = EvalMode::FinalOnly;
    } else {
        throw ConfigError("unknown eval \"" + eval +
                          "\" (expected per_round or final_only)");
    }
    return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::pair<LabeledDataset, LabeledDataset> load_dataset(const DatasetConfig& config) {
    if (config.kind == DatasetConfig::Kind::Blobs) {
        // Train and test come from disjoint RNG streams of the same blob
        // family so they share centers but not samples.
        LabeledDataset train =
            synthetic_blobs(config.blob_classes, config.blob_shape,
                            config.blob_train_per_class, config.blob_spread, 11);
        LabeledDataset test =
            synthetic_blobs(config.blob_classes, config.blob_shape,
                            config.blob_test_per_class, config.blob_spread, 12);
        return {std::move(train), std::move(test)};
    }
    LabeledDataset train = load_idx(config.train_images, config.train_labels);
    LabeledDataset test = load_idx(config.test_images, config.test_labels);
    if (train.num_classes < test.num_classes) {
        train.num_classes = test.num_classes;
    } else {
        test.num_classes = train.num_classes;
    }
    return {std::move(train), std::move(test)};
}

}  // namespace hfedsn
