#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace hfedsn {

struct Shape {
    int channels = 0;
    int height = 0;
    int width = 0;

    std::size_t elems() const {
        return static_cast<std::size_t>(channels) * height * width;
    }
    bool operator==(const Shape&) const = default;
};

enum class LayerKind { Conv2d, MaxPool, Flatten, Dense };

// One layer of the network. Conv layers are 3x3 / stride 1 / pad 1, pooling
// is 2x2 / stride 2; both are fixed by the architecture builder. Parameters
// of a layer occupy [param_offset, param_offset + param_count) of the flat
// parameter vector, weights first, then biases.
struct Layer {
    LayerKind kind = LayerKind::Dense;
    int in_channels = 0, out_channels = 0;  // conv
    int in_dim = 0, out_dim = 0;            // dense / flatten output
    Shape in_shape, out_shape;               // conv / pool spatial bookkeeping
    bool relu_after = false;

    std::size_t param_offset = 0;
    std::size_t weight_count = 0;
    std::size_t bias_count = 0;
    std::size_t param_count = 0;  // weight_count + bias_count

    bool has_params() const {
        return kind == LayerKind::Conv2d || kind == LayerKind::Dense;
    }
};

enum class ArchVariant { Conv4, Mlp };

struct ArchitectureSpec {
    std::vector<Layer> layers;
    Shape input_shape;
    int num_classes = 0;
    std::size_t param_count = 0;  // d

    // ids (indices into `layers`) of layers that carry parameters
    std::vector<int> parameterized_layers() const;
};

// Builds the standard 4-conv/3-dense network (conv 64,64 / pool / conv
// 128,128 / pool / dense 256, 256, classes) or a small dense 64-64-classes
// variant for fast tests. Throws std::invalid_argument when the input shape
// cannot survive the two poolings.
ArchitectureSpec build_architecture(Shape input_shape, int num_classes,
                                    ArchVariant variant = ArchVariant::Conv4);

// Partition of the flat parameter coordinates into shared (aggregated
// globally) and private (never leave the client) halves, derived from a
// split of the parameterized layers. Spans are (offset, length) runs in the
// flat vector; shared coordinates are indexed contiguously 0..s within a
// shared-only vector, in flat-parameter order.
struct LayerPartition {
    std::vector<int> shared_layers;   // layer ids
    std::vector<int> private_layers;  // layer ids
    std::vector<std::pair<std::size_t, std::size_t>> shared_spans;
    std::vector<std::pair<std::size_t, std::size_t>> private_spans;
    std::size_t shared_dim = 0;   // s
    std::size_t private_dim = 0;  // p
};

// Partition with an explicit set of private layer ids; every other
// parameterized layer is shared.
LayerPartition make_partition(const ArchitectureSpec& arch,
                              const std::vector<int>& private_layer_ids);

// Default split: all conv layers shared and the dense head private. For a
// pure dense architecture (no conv layers) the last layer is private and the
// hidden layers are shared, so that a shared mask always exists.
LayerPartition default_partition(const ArchitectureSpec& arch);

}  // namespace hfedsn
