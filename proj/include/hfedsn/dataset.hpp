#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hfedsn/architecture.hpp"

namespace hfedsn {

struct DatasetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct LabeledDataset {
    Shape shape;                  // per-sample (channels, height, width)
    std::vector<double> samples;  // N * shape.elems(), sample-major
    std::vector<int> labels;      // N, values in [0, num_classes)
    int num_classes = 0;

    std::size_t size() const { return labels.size(); }
    std::span<const double> sample(std::size_t i) const {
        const std::size_t n = shape.elems();
        return {samples.data() + i * n, n};
    }
};

// Per-client sample assignment. Train and test shards use the same label
// assignment; index lists are disjoint across clients within each split.
struct PartitionPlan {
    std::vector<std::vector<std::size_t>> train_indices;
    std::vector<std::vector<std::size_t>> test_indices;
    std::vector<std::vector<int>> client_labels;  // sorted label ids, size n each
};

// Quantity-based label-imbalance partition: every client is assigned exactly
// `labels_per_client` label ids, then each label's samples are split equally
// (max/min counts differ by at most 1) among the clients owning it. The
// label assignment is redrawn up to 100 times until every label has at least
// one owner; throws DatasetError if that cannot be satisfied.
PartitionPlan quantity_label_partition(const LabeledDataset& train, const LabeledDataset& test,
                                       int num_clients, int labels_per_client,
                                       std::uint64_t seed);

// Gaussian clusters at distinct centers, `samples_per_class` each;
// linearly separable when spread is small relative to the unit center
// spacing.
LabeledDataset synthetic_blobs(int num_classes, Shape shape, int samples_per_class,
                               double spread, std::uint64_t seed);

// IDX image/label pair (optionally gzip-compressed); pixels mapped to
// [-1, 1] via x / 127.5 - 1. Throws DatasetError on bad magic, truncation,
// or count mismatch.
LabeledDataset load_idx(const std::string& images_path, const std::string& labels_path);

enum class NormalizeScheme { MinMaxPm1, ZScorePerDim };

// MinMaxPm1: affine map of the global value range onto [-1, 1].
// ZScorePerDim: per-coordinate zero mean / unit variance; coordinates with
// (near) zero variance are centered only.
LabeledDataset normalize(const LabeledDataset& data, NormalizeScheme scheme);

}  // namespace hfedsn
