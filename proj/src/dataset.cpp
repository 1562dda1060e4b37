#include "hfedsn/dataset.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hfedsn/rng.hpp"

namespace hfedsn {

namespace {

constexpr int kMaxAssignmentDraws = 100;

// Draws `count` distinct labels for one client.
std::vector<int> draw_labels(int num_classes, int count, Rng& rng) {
    std::vector<int> ids(num_classes);
    std::iota(ids.begin(), ids.end(), 0);
    rng.shuffle(ids);
    ids.resize(count);
    std::sort(ids.begin(), ids.end());
    return ids;
}

std::vector<std::vector<std::size_t>> indices_by_label(const LabeledDataset& data,
                                                       int num_classes) {
    std::vector<std::vector<std::size_t>> by_label(num_classes);
    for (std::size_t i = 0; i < data.size(); ++i) {
        int label = data.labels[i];
        if (label < 0 || label >= num_classes) {
            throw DatasetError("label " + std::to_string(label) + " out of range");
        }
        by_label[label].push_back(i);
    }
    return by_label;
}

// Deals one label's samples to its owners in near-equal contiguous chunks
// after a shuffle; the first (n mod owners) owners receive the extra sample.
void deal_label(const std::vector<std::size_t>& pool, const std::vector<int>& owners,
                Rng& rng, std::vector<std::vector<std::size_t>>& out) {
    std::vector<std::size_t> shuffled = pool;
    rng.shuffle(shuffled);
    const std::size_t base = shuffled.size() / owners.size();
    const std::size_t extra = shuffled.size() % owners.size();
    std::size_t pos = 0;
    for (std::size_t o = 0; o < owners.size(); ++o) {
        std::size_t take = base + (o < extra ? 1 : 0);
        out[owners[o]].insert(out[owners[o]].end(), shuffled.begin() + pos,
                              shuffled.begin() + pos + take);
        pos += take;
    }
}

struct GzReader {
    gzFile file = nullptr;

    explicit GzReader(const std::string& path) : file(gzopen(path.c_str(), "rb")) {
        if (file == nullptr) {
            throw DatasetError("cannot open " + path);
        }
    }
    ~GzReader() {
        if (file != nullptr) gzclose(file);
    }
    GzReader(const GzReader&) = delete;
    GzReader& operator=(const GzReader&) = delete;

    void read_exact(void* dst, std::size_t n, const std::string& path) {
        int got = gzread(file, dst, static_cast<unsigned>(n));
        if (got < 0 || static_cast<std::size_t>(got) != n) {
            throw DatasetError("truncated read from " + path);
        }
    }

    std::uint32_t read_u32_be(const std::string& path) {
        std::uint8_t b[4];
        read_exact(b, 4, path);
        return (static_cast<std::uint32_t>(b[0]) << 24) |
               (static_cast<std::uint32_t>(b[1]) << 16) |
               (static_cast<std::uint32_t>(b[2]) << 8) | static_cast<std::uint32_t>(b[3]);
    }
};

}  // namespace

PartitionPlan quantity_label_partition(const LabeledDataset& train, const LabeledDataset& test,
                                       int num_clients, int labels_per_client,
                                       std::uint64_t seed) {
    const int num_classes = train.num_classes;
    if (num_clients < 1) {
        throw DatasetError("need at least one client");
    }
    if (labels_per_client < 1 || labels_per_client > num_classes) {
        throw DatasetError("labels per client must be in [1, " +
                           std::to_string(num_classes) + "]");
    }
    if (test.num_classes != num_classes) {
        throw DatasetError("train/test class count mismatch");
    }
    if (static_cast<long long>(num_clients) * labels_per_client < num_classes) {
        throw DatasetError("clients cannot cover every label: " +
                           std::to_string(num_clients) + " x " +
                           std::to_string(labels_per_client) + " < " +
                           std::to_string(num_classes));
    }

    Rng rng(mix_seed(seed, 0x02));

    std::vector<std::vector<int>> client_labels;
    bool covered = false;
    for (int attempt = 0; attempt < kMaxAssignmentDraws && !covered; ++attempt) {
        client_labels.assign(num_clients, {});
        std::vector<char> seen(num_classes, 0);
        for (int k = 0; k < num_clients; ++k) {
            client_labels[k] = draw_labels(num_classes, labels_per_client, rng);
            for (int c : client_labels[k]) seen[c] = 1;
        }
        covered = std::find(seen.begin(), seen.end(), 0) == seen.end();
    }
    if (!covered) {
        throw DatasetError("no label assignment covering every class after " +
                           std::to_string(kMaxAssignmentDraws) + " draws");
    }

    std::vector<std::vector<int>> owners(num_classes);
    for (int k = 0; k < num_clients; ++k) {
        for (int c : client_labels[k]) owners[c].push_back(k);
    }

    PartitionPlan plan;
    plan.client_labels = std::move(client_labels);
    plan.train_indices.assign(num_clients, {});
    plan.test_indices.assign(num_clients, {});

    auto train_pools = indices_by_label(train, num_classes);
    auto test_pools = indices_by_label(test, num_classes);
    for (int c = 0; c < num_classes; ++c) {
        if (owners[c].empty()) continue;
        deal_label(train_pools[c], owners[c], rng, plan.train_indices);
        deal_label(test_pools[c], owners[c], rng, plan.test_indices);
    }
    for (auto& v : plan.train_indices) std::sort(v.begin(), v.end());
    for (auto& v : plan.test_indices) std::sort(v.begin(), v.end());
    return plan;
}

LabeledDataset synthetic_blobs(int num_classes, Shape shape, int samples_per_class,
                               double spread, std::uint64_t seed) {
    if (num_classes < 2 || samples_per_class < 1) {
        throw DatasetError("blobs need at least two classes and one sample per class");
    }
    const std::size_t dim = shape.elems();
    if (dim == 0) {
        throw DatasetError("blob shape has zero elements");
    }

    LabeledDataset data;
    data.shape = shape;
    data.num_classes = num_classes;
    data.samples.reserve(static_cast<std::size_t>(num_classes) * samples_per_class * dim);
    data.labels.reserve(static_cast<std::size_t>(num_classes) * samples_per_class);

    Rng rng(mix_seed(seed, 0x04));
    for (int c = 0; c < num_classes; ++c) {
        for (int i = 0; i < samples_per_class; ++i) {
            for (std::size_t j = 0; j < dim; ++j) {
                double center = (static_cast<int>(j) % num_classes == c) ? 1.0 : 0.0;
                data.samples.push_back(center + spread * rng.normal());
            }
            data.labels.push_back(c);
        }
    }
    return data;
}

LabeledDataset load_idx(const std::string& images_path, const std::string& labels_path) {
    GzReader images(images_path);
    if (images.read_u32_be(images_path) != 0x00000803u) {
        throw DatasetError("bad image magic in " + images_path);
    }
    const std::uint32_t count = images.read_u32_be(images_path);
    const std::uint32_t rows = images.read_u32_be(images_path);
    const std::uint32_t cols = images.read_u32_be(images_path);

    GzReader labels(labels_path);
    if (labels.read_u32_be(labels_path) != 0x00000801u) {
        throw DatasetError("bad label magic in " + labels_path);
    }
    const std::uint32_t label_count = labels.read_u32_be(labels_path);
    if (label_count != count) {
        throw DatasetError("image count " + std::to_string(count) +
                           " does not match label count " + std::to_string(label_count));
    }

    LabeledDataset data;
    data.shape = Shape{1, static_cast<int>(rows), static_cast<int>(cols)};
    const std::size_t pixels = static_cast<std::size_t>(rows) * cols;
    data.samples.resize(static_cast<std::size_t>(count) * pixels);
    data.labels.resize(count);

    std::vector<std::uint8_t> buf(pixels);
    for (std::uint32_t i = 0; i < count; ++i) {
        images.read_exact(buf.data(), pixels, images_path);
        double* out = data.samples.data() + static_cast<std::size_t>(i) * pixels;
        for (std::size_t j = 0; j < pixels; ++j) {
            out[j] = static_cast<double>(buf[j]) / 127.5 - 1.0;
        }
    }
    std::vector<std::uint8_t> raw_labels(count);
    labels.read_exact(raw_labels.data(), count, labels_path);
    int max_label = 0;
    for (std::uint32_t i = 0; i < count; ++i) {
        data.labels[i] = raw_labels[i];
        max_label = std::max(max_label, data.labels[i]);
    }
    data.num_classes = max_label + 1;
    return data;
}

LabeledDataset normalize(const LabeledDataset& data, NormalizeScheme scheme) {
    LabeledDataset out = data;
    if (data.samples.empty()) return out;

    if (scheme == NormalizeScheme::MinMaxPm1) {
        auto [lo_it, hi_it] = std::minmax_element(data.samples.begin(), data.samples.end());
        double lo = *lo_it, hi = *hi_it;
        if (hi == lo) {
            std::fill(out.samples.begin(), out.samples.end(), 0.0);
            return out;
        }
        double scale = 2.0 / (hi - lo);
        for (double& v : out.samples) v = (v - lo) * scale - 1.0;
        return out;
    }

    const std::size_t dim = data.shape.elems();
    const std::size_t n = data.size();
    std::vector<double> mean(dim, 0.0), var(dim, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double* s = data.samples.data() + i * dim;
        for (std::size_t j = 0; j < dim; ++j) mean[j] += s[j];
    }
    for (std::size_t j = 0; j < dim; ++j) mean[j] /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double* s = data.samples.data() + i * dim;
        for (std::size_t j = 0; j < dim; ++j) {
            double d = s[j] - mean[j];
            var[j] += d * d;
        }
    }
    for (std::size_t j = 0; j < dim; ++j) var[j] /= static_cast<double>(n);

    for (std::size_t i = 0; i < n; ++i) {
        double* s = out.samples.data() + i * dim;
        for (std::size_t j = 0; j < dim; ++j) {
            double sd = std::sqrt(var[j]);
            s[j] = sd < 1e-12 ? s[j] - mean[j] : (s[j] - mean[j]) / sd;
        }
    }
    return out;
}

}  // namespace hfedsn
