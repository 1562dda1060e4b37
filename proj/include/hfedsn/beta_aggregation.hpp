#pragma once

#include <string>
#include <vector>

#include "hfedsn/masks.hpp"
#include "hfedsn/rng.hpp"

namespace hfedsn {

// When to restore the Beta priors. With the default period 10 / phase 1 the
// reset fires immediately before the updates of rounds 11, 21, 31, ...;
// never in round 1, so the posterior mode denominator stays positive.
struct ResetPolicy {
    int period = 10;
    int phase = 1;

    bool due(int round) const {
        return period > 0 && round > phase && (round - phase) % period == 0;
    }
};

// Per-coordinate Beta(alpha, beta) posterior held by an edge or the cloud.
// With lambda0 = 1, alpha_i - 1 counts the ones and beta_i - 1 the zeros
// observed at coordinate i since the last reset.
struct BetaState {
    std::vector<double> alpha;
    std::vector<double> beta;
    double lambda0 = 1.0;
    ResetPolicy reset;
    std::string owner;

    BetaState() = default;
    BetaState(std::size_t dim, double lambda0_value = 1.0, ResetPolicy policy = {},
              std::string owner_name = {})
        : alpha(dim, lambda0_value),
          beta(dim, lambda0_value),
          lambda0(lambda0_value),
          reset(policy),
          owner(std::move(owner_name)) {}

    std::size_t dim() const { return alpha.size(); }
};

// alpha = beta = lambda0 elementwise; idempotent.
void reset_priors(BetaState& state);

// Elementwise posterior mode (alpha-1)/(alpha+beta-2), clamped to [0,1].
// Throws std::domain_error if any coordinate still has alpha+beta == 2
// (mode extraction before any update).
ProbabilityMask beta_mode(const BetaState& state);

// Shared update rule of both tiers: apply the reset policy for `round`,
// then alpha += sum of masks and beta += (children - sum).
void beta_update(BetaState& state, const std::vector<BinaryMask>& masks, int round);

// Edge tier: update, take the mode, return a Bernoulli sample of it.
BinaryMask edge_aggregate(BetaState& state, const std::vector<BinaryMask>& masks, int round,
                          Rng& rng);

// Cloud tier: update and return the mode itself (the broadcast payload).
ProbabilityMask cloud_aggregate(BetaState& state, const std::vector<BinaryMask>& masks,
                                int round);

}  // namespace hfedsn
