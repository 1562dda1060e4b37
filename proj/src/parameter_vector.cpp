#include "hfedsn/parameter_vector.hpp"

#include <cmath>

#include "hfedsn/rng.hpp"

namespace hfedsn {

ParameterVector init_frozen_weights(const ArchitectureSpec& arch, std::uint64_t seed) {
    std::vector<double> values(arch.param_count, 0.0);
    std::vector<std::pair<std::size_t, std::size_t>> offsets;
    Rng rng(mix_seed(seed, 0x01));

    for (int id : arch.parameterized_layers()) {
        const Layer& l = arch.layers[id];
        offsets.emplace_back(l.param_offset, l.param_count);
        std::size_t fan_in = l.kind == LayerKind::Conv2d
                                 ? static_cast<std::size_t>(l.in_channels) * 3 * 3
                                 : static_cast<std::size_t>(l.in_dim);
        double scale = std::sqrt(2.0 / static_cast<double>(fan_in));
        for (std::size_t i = 0; i < l.param_count; ++i) {
            values[l.param_offset + i] = rng.normal(0.0, scale);
        }
    }
    return ParameterVector(std::move(values), std::move(offsets));
}

}  // namespace hfedsn
