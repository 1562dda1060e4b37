#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hfedsn/parameter_vector.hpp"
#include "hfedsn/rng.hpp"

namespace hfedsn {

// Unconstrained real reparameterization of the probability mask; the
// quantity updated by SGD.
struct ScoreMask {
    std::vector<double> values;
};

// Per-coordinate Bernoulli keep-probabilities, entries in [0, 1]. Length is
// d for client masks or s for shared-only masks.
struct ProbabilityMask {
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
};

// {0,1} mask with packed storage, 1 bit per element (up to 7 pad bits).
class BinaryMask {
public:
    BinaryMask() = default;
    explicit BinaryMask(std::size_t nbits) : nbits_(nbits), bytes_((nbits + 7) / 8, 0) {}

    static BinaryMask from_bits(const std::vector<int>& bits);

    std::size_t size() const { return nbits_; }
    bool get(std::size_t i) const { return (bytes_[i >> 3] >> (i & 7)) & 1; }
    void set(std::size_t i, bool v) {
        if (v)
            bytes_[i >> 3] |= static_cast<std::uint8_t>(1u << (i & 7));
        else
            bytes_[i >> 3] &= static_cast<std::uint8_t>(~(1u << (i & 7)));
    }
    std::size_t count_ones() const;

    const std::vector<std::uint8_t>& bytes() const { return bytes_; }
    std::size_t packed_bits() const { return bytes_.size() * 8; }

    bool operator==(const BinaryMask&) const = default;

private:
    std::size_t nbits_ = 0;
    std::vector<std::uint8_t> bytes_;
};

// Clamp bound for the inverse transform; probabilities are pulled into
// [eps, 1-eps] before taking the logit.
inline constexpr double kLogitEps = 1e-6;

double sigmoid(double x);
double logit_clamped(double p);

enum class LogisticDirection { Forward, Inverse };

std::vector<double> logistic_transform(std::span<const double> x, LogisticDirection dir);

ProbabilityMask sigmoid_mask(const ScoreMask& scores);
ScoreMask logit_mask(const ProbabilityMask& theta);

// Independent per-coordinate Bernoulli draws from theta.
BinaryMask sample_binary_mask(const ProbabilityMask& theta, Rng& rng);

// Deterministic alternative: bit i = (theta_i > threshold).
BinaryMask threshold_mask(const ProbabilityMask& theta, double threshold = 0.5);

// Elementwise w .* m. Throws std::invalid_argument on length mismatch.
std::vector<double> apply_mask(const ParameterVector& w, const BinaryMask& m);

// Relaxed form w .* theta, used only for gradient verification.
std::vector<double> apply_probability_mask(const ParameterVector& w, const ProbabilityMask& theta);

}  // namespace hfedsn
