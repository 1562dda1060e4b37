#include "hfedsn/architecture.hpp"

#include <algorithm>

namespace hfedsn {

namespace {

Layer conv_layer(Shape in, int out_channels, bool relu) {
    Layer l;
    l.kind = LayerKind::Conv2d;
    l.in_channels = in.channels;
    l.out_channels = out_channels;
    l.in_shape = in;
    l.out_shape = Shape{out_channels, in.height, in.width};
    l.relu_after = relu;
    l.weight_count = static_cast<std::size_t>(out_channels) * in.channels * 3 * 3;
    l.bias_count = static_cast<std::size_t>(out_channels);
    l.param_count = l.weight_count + l.bias_count;
    return l;
}

Layer pool_layer(Shape in) {
    Layer l;
    l.kind = LayerKind::MaxPool;
    l.in_shape = in;
    l.out_shape = Shape{in.channels, in.height / 2, in.width / 2};
    return l;
}

Layer flatten_layer(Shape in) {
    Layer l;
    l.kind = LayerKind::Flatten;
    l.in_shape = in;
    l.out_shape = in;
    l.out_dim = static_cast<int>(in.elems());
    return l;
}

Layer dense_layer(int in_dim, int out_dim, bool relu) {
    Layer l;
    l.kind = LayerKind::Dense;
    l.in_dim = in_dim;
    l.out_dim = out_dim;
    l.relu_after = relu;
    l.weight_count = static_cast<std::size_t>(in_dim) * out_dim;
    l.bias_count = static_cast<std::size_t>(out_dim);
    l.param_count = l.weight_count + l.bias_count;
    return l;
}

void assign_offsets(ArchitectureSpec& arch) {
    std::size_t offset = 0;
    for (Layer& l : arch.layers) {
        l.param_offset = offset;
        offset += l.param_count;
    }
    arch.param_count = offset;
}

}  // namespace

std::vector<int> ArchitectureSpec::parameterized_layers() const {
    std::vector<int> ids;
    for (int i = 0; i < static_cast<int>(layers.size()); ++i) {
        if (layers[i].has_params()) ids.push_back(i);
    }
    return ids;
}

ArchitectureSpec build_architecture(Shape input_shape, int num_classes,
                                    ArchVariant variant) {
    if (input_shape.channels <= 0 || input_shape.height <= 0 || input_shape.width <= 0) {
        throw std::invalid_argument("input shape must be positive in every dimension");
    }
    if (num_classes < 2) {
        throw std::invalid_argument("need at least two classes");
    }

    ArchitectureSpec arch;
    arch.input_shape = input_shape;
    arch.num_classes = num_classes;

    if (variant == ArchVariant::Mlp) {
        int in_dim = static_cast<int>(input_shape.elems());
        arch.layers.push_back(flatten_layer(input_shape));
        arch.layers.push_back(dense_layer(in_dim, 64, true));
        arch.layers.push_back(dense_layer(64, 64, true));
        arch.layers.push_back(dense_layer(64, num_classes, false));
        assign_offsets(arch);
        return arch;
    }

    if (input_shape.height < 4 || input_shape.width < 4) {
        throw std::invalid_argument(
            "input of " + std::to_string(input_shape.height) + "x" +
            std::to_string(input_shape.width) +
            " is too small for two 2x2 poolings");
    }

    Shape cur = input_shape;
    arch.layers.push_back(conv_layer(cur, 64, true));
    cur = arch.layers.back().out_shape;
    arch.layers.push_back(conv_layer(cur, 64, true));
    cur = arch.layers.back().out_shape;
    arch.layers.push_back(pool_layer(cur));
    cur = arch.layers.back().out_shape;
    arch.layers.push_back(conv_layer(cur, 128, true));
    cur = arch.layers.back().out_shape;
    arch.layers.push_back(conv_layer(cur, 128, true));
    cur = arch.layers.back().out_shape;
    arch.layers.push_back(pool_layer(cur));
    cur = arch.layers.back().out_shape;
    arch.layers.push_back(flatten_layer(cur));
    int flat = arch.layers.back().out_dim;
    arch.layers.push_back(dense_layer(flat, 256, true));
    arch.layers.push_back(dense_layer(256, 256, true));
    arch.layers.push_back(dense_layer(256, num_classes, false));
    assign_offsets(arch);
    return arch;
}

LayerPartition make_partition(const ArchitectureSpec& arch,
                              const std::vector<int>& private_layer_ids) {
    LayerPartition part;
    for (int id : private_layer_ids) {
        if (id < 0 || id >= static_cast<int>(arch.layers.size()) ||
            !arch.layers[id].has_params()) {
            throw std::invalid_argument("private layer id " + std::to_string(id) +
                                        " does not name a parameterized layer");
        }
    }
    for (int id : arch.parameterized_layers()) {
        const Layer& l = arch.layers[id];
        bool is_private = std::find(private_layer_ids.begin(), private_layer_ids.end(),
                                    id) != private_layer_ids.end();
        if (is_private) {
            part.private_layers.push_back(id);
            part.private_spans.emplace_back(l.param_offset, l.param_count);
            part.private_dim += l.param_count;
        } else {
            part.shared_layers.push_back(id);
            part.shared_spans.emplace_back(l.param_offset, l.param_count);
            part.shared_dim += l.param_count;
        }
    }
    return part;
}

LayerPartition default_partition(const ArchitectureSpec& arch) {
    bool has_conv = false;
    for (const Layer& l : arch.layers) {
        if (l.kind == LayerKind::Conv2d) has_conv = true;
    }
    std::vector<int> private_ids;
    if (has_conv) {
        for (int id : arch.parameterized_layers()) {
            if (arch.layers[id].kind == LayerKind::Dense) private_ids.push_back(id);
        }
    } else {
        private_ids.push_back(arch.parameterized_layers().back());
    }
    return make_partition(arch, private_ids);
}

}  // namespace hfedsn
