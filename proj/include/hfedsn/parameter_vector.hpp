#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hfedsn/architecture.hpp"

namespace hfedsn {

// Frozen flat weight vector of dimension d. Values are fixed at
// construction; only const access is exposed so the vector stays bit
// identical for the whole run.
class ParameterVector {
public:
    ParameterVector() = default;
    ParameterVector(std::vector<double> values,
                    std::vector<std::pair<std::size_t, std::size_t>> layer_offsets)
        : values_(std::move(values)), layer_offsets_(std::move(layer_offsets)) {}

    std::span<const double> values() const { return values_; }
    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }

    // (start, length) per parameterized layer, in layer order
    const std::vector<std::pair<std::size_t, std::size_t>>& layer_offsets() const {
        return layer_offsets_;
    }

private:
    std::vector<double> values_;
    std::vector<std::pair<std::size_t, std::size_t>> layer_offsets_;
};

// Zero-mean init with per-layer scale sqrt(2 / fan_in); biases are drawn
// from the same distribution as their layer's weights since every
// coordinate of the vector is maskable. Deterministic given (arch, seed).
ParameterVector init_frozen_weights(const ArchitectureSpec& arch, std::uint64_t seed);

}  // namespace hfedsn
