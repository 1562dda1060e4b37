#include "hfedsn/masks.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace hfedsn {

BinaryMask BinaryMask::from_bits(const std::vector<int>& bits) {
    BinaryMask m(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i) m.set(i, bits[i] != 0);
    return m;
}

std::size_t BinaryMask::count_ones() const {
    std::size_t total = 0;
    for (std::uint8_t b : bytes_) total += std::popcount(b);
    return total;
}

double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    double e = std::exp(x);
    return e / (1.0 + e);
}

double logit_clamped(double p) {
    double q = std::clamp(p, kLogitEps, 1.0 - kLogitEps);
    return std::log(q / (1.0 - q));
}

std::vector<double> logistic_transform(std::span<const double> x, LogisticDirection dir) {
    std::vector<double> out(x.size());
    if (dir == LogisticDirection::Forward) {
        for (std::size_t i = 0; i < x.size(); ++i) out[i] = sigmoid(x[i]);
    } else {
        for (std::size_t i = 0; i < x.size(); ++i) out[i] = logit_clamped(x[i]);
    }
    return out;
}

ProbabilityMask sigmoid_mask(const ScoreMask& scores) {
    return ProbabilityMask{logistic_transform(scores.values, LogisticDirection::Forward)};
}

ScoreMask logit_mask(const ProbabilityMask& theta) {
    return ScoreMask{logistic_transform(theta.values, LogisticDirection::Inverse)};
}

BinaryMask sample_binary_mask(const ProbabilityMask& theta, Rng& rng) {
    BinaryMask m(theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i) {
        m.set(i, rng.bernoulli(theta.values[i]));
    }
    return m;
}

BinaryMask threshold_mask(const ProbabilityMask& theta, double threshold) {
    BinaryMask m(theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i) {
        m.set(i, theta.values[i] > threshold);
    }
    return m;
}

std::vector<double> apply_mask(const ParameterVector& w, const BinaryMask& m) {
    if (w.size() != m.size()) {
        throw std::invalid_argument("mask length " + std::to_string(m.size()) +
                                    " does not match parameter count " +
                                    std::to_string(w.size()));
    }
    std::vector<double> out(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) out[i] = m.get(i) ? w[i] : 0.0;
    return out;
}

std::vector<double> apply_probability_mask(const ParameterVector& w,
                                           const ProbabilityMask& theta) {
    if (w.size() != theta.size()) {
        throw std::invalid_argument("mask length " + std::to_string(theta.size()) +
                                    " does not match parameter count " +
                                    std::to_string(w.size()));
    }
    std::vector<double> out(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) out[i] = w[i] * theta.values[i];
    return out;
}

}  // namespace hfedsn
