#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

#include "hfedsn/dataset.hpp"
#include "hfedsn/orchestrator.hpp"

namespace hfedsn {

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Dataset source for an experiment. Exactly one kind is active.
struct DatasetConfig {
    enum class Kind { Blobs, Idx };
    Kind kind = Kind::Blobs;

    // Blobs
    int blob_classes = 4;
    Shape blob_shape{1, 4, 4};
    int blob_train_per_class = 250;
    int blob_test_per_class = 50;
    double blob_spread = 0.35;

    // IDX file pairs (images, labels)
    std::string train_images;
    std::string train_labels;
    std::string test_images;
    std::string test_labels;
};

struct ExperimentConfig {
    RunConfig run;
    DatasetConfig dataset;
    std::string output_dir = ".";
};

// Parses a JSON experiment description. The schema is strict: every required
// key must be present and unknown keys are rejected, so typos fail loudly
// instead of silently falling back to defaults.
ExperimentConfig parse_config(const std::string& json_text);

ExperimentConfig load_config_file(const std::string& path);

// Materializes the configured dataset as (train, test).
std::pair<LabeledDataset, LabeledDataset> load_dataset(const DatasetConfig& config);

}  // namespace hfedsn
