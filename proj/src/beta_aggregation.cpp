#include "hfedsn/beta_aggregation.hpp"

#include <algorithm>
#include <stdexcept>

namespace hfedsn {

void reset_priors(BetaState& state) {
    std::fill(state.alpha.begin(), state.alpha.end(), state.lambda0);
    std::fill(state.beta.begin(), state.beta.end(), state.lambda0);
}

ProbabilityMask beta_mode(const BetaState& state) {
    ProbabilityMask mode;
    mode.values.resize(state.dim());
    for (std::size_t i = 0; i < state.dim(); ++i) {
        double denom = state.alpha[i] + state.beta[i] - 2.0;
        if (denom == 0.0) {
            throw std::domain_error("posterior mode undefined at coordinate " +
                                    std::to_string(i) + " (" + state.owner +
                                    "): no observations since priors");
        }
        mode.values[i] = std::clamp((state.alpha[i] - 1.0) / denom, 0.0, 1.0);
    }
    return mode;
}

void beta_update(BetaState& state, const std::vector<BinaryMask>& masks, int round) {
    if (masks.empty()) {
        throw std::invalid_argument("aggregation needs at least one child mask");
    }
    for (const BinaryMask& m : masks) {
        if (m.size() != state.dim()) {
            throw std::invalid_argument("child mask length " + std::to_string(m.size()) +
                                        " does not match state dim " +
                                        std::to_string(state.dim()));
        }
    }
    if (state.reset.due(round)) {
        reset_priors(state);
    }
    const double children = static_cast<double>(masks.size());
    for (std::size_t i = 0; i < state.dim(); ++i) {
        double ones = 0.0;
        for (const BinaryMask& m : masks) ones += m.get(i) ? 1.0 : 0.0;
        state.alpha[i] += ones;
        state.beta[i] += children - ones;
    }
}

BinaryMask edge_aggregate(BetaState& state, const std::vector<BinaryMask>& masks, int round,
                          Rng& rng) {
    beta_update(state, masks, round);
    return sample_binary_mask(beta_mode(state), rng);
}

ProbabilityMask cloud_aggregate(BetaState& state, const std::vector<BinaryMask>& masks,
                                int round) {
    beta_update(state, masks, round);
    return beta_mode(state);
}

}  // namespace hfedsn
