#include <doctest.h>

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "hfedsn/beta_aggregation.hpp"
#include "hfedsn/rng.hpp"

using namespace hfedsn;

namespace {

BinaryMask bits(const std::vector<int>& v) { return BinaryMask::from_bits(v); }

}  // namespace

TEST_SUITE("beta_aggregation") {

TEST_CASE("reset schedule") {
    ResetPolicy policy;  // period 10, phase 1
    CHECK_FALSE(policy.due(1));
    CHECK_FALSE(policy.due(2));
    CHECK_FALSE(policy.due(10));
    CHECK(policy.due(11));
    CHECK_FALSE(policy.due(12));
    CHECK(policy.due(21));
    CHECK(policy.due(101));

    ResetPolicy never{0, 1};
    for (int t = 1; t <= 50; ++t) CHECK_FALSE(never.due(t));
}

TEST_CASE("posterior mode arithmetic") {
    BetaState state(2);
    state.alpha = {3.0, 2.0};
    state.beta = {1.0, 2.0};
    ProbabilityMask mode = beta_mode(state);
    CHECK(mode.values[0] == 1.0);
    CHECK(mode.values[1] == 0.5);
}

TEST_CASE("mode before any update is undefined") {
    BetaState state(3);
    CHECK_THROWS_AS(beta_mode(state), std::domain_error);
}

TEST_CASE("hand-traced two-round cloud sequence") {
    BetaState state(3, 1.0, ResetPolicy{0, 1}, "cloud");
    ProbabilityMask r1 = cloud_aggregate(state, {bits({1, 0, 1}), bits({1, 1, 0})}, 1);
    CHECK(state.alpha == std::vector<double>{3.0, 2.0, 2.0});
    CHECK(state.beta == std::vector<double>{1.0, 2.0, 2.0});
    CHECK(r1.values == std::vector<double>{1.0, 0.5, 0.5});

    ProbabilityMask r2 = cloud_aggregate(state, {bits({0, 0, 1}), bits({0, 1, 1})}, 2);
    CHECK(state.alpha == std::vector<double>{3.0, 3.0, 4.0});
    CHECK(state.beta == std::vector<double>{3.0, 3.0, 2.0});
    CHECK(r2.values == std::vector<double>{0.5, 0.5, 0.75});
}

TEST_CASE("update conserves observation mass") {
    BetaState state(4);
    Rng rng(1);
    int children = 3;
    for (int round = 1; round <= 7; ++round) {
        std::vector<BinaryMask> masks;
        for (int c = 0; c < children; ++c) {
            ProbabilityMask theta{std::vector<double>(4, 0.5)};
            masks.push_back(sample_binary_mask(theta, rng));
        }
        beta_update(state, masks, round);
        for (std::size_t i = 0; i < state.dim(); ++i) {
            CHECK(state.alpha[i] + state.beta[i] == 2.0 + children * round);
        }
    }
}

TEST_CASE("update is invariant to child order") {
    std::vector<BinaryMask> masks = {bits({1, 0, 1, 1}), bits({0, 0, 1, 0}),
                                     bits({1, 1, 1, 0})};
    BetaState forward_state(4), reverse_state(4);
    beta_update(forward_state, masks, 1);
    std::reverse(masks.begin(), masks.end());
    beta_update(reverse_state, masks, 1);
    CHECK(forward_state.alpha == reverse_state.alpha);
    CHECK(forward_state.beta == reverse_state.beta);
}

TEST_CASE("unanimous children saturate the mode") {
    BetaState state(2);
    beta_update(state, {bits({1, 0}), bits({1, 0}), bits({1, 0})}, 1);
    ProbabilityMask mode = beta_mode(state);
    CHECK(mode.values[0] == 1.0);
    CHECK(mode.values[1] == 0.0);
}

TEST_CASE("mode equals the observed frequency of ones since the last reset") {
    Rng rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t dim = 1 + rng.uniform_index(16);
        const int children = 1 + static_cast<int>(rng.uniform_index(4));
        const int rounds = 1 + static_cast<int>(rng.uniform_index(12));
        const int period = rng.bernoulli(0.5) ? 3 : 0;
        BetaState state(dim, 1.0, ResetPolicy{period, 1});

        std::vector<int> ones_since(dim, 0);
        int seen = 0;
        for (int t = 1; t <= rounds; ++t) {
            if (state.reset.due(t)) {
                ones_since.assign(dim, 0);
                seen = 0;
            }
            std::vector<BinaryMask> masks;
            for (int c = 0; c < children; ++c) {
                BinaryMask m(dim);
                for (std::size_t i = 0; i < dim; ++i) {
                    bool bit = rng.bernoulli(0.4);
                    m.set(i, bit);
                    if (bit) ones_since[i] += 1;
                }
                masks.push_back(std::move(m));
            }
            seen += children;
            beta_update(state, masks, t);

            ProbabilityMask mode = beta_mode(state);
            for (std::size_t i = 0; i < dim; ++i) {
                double expected =
                    static_cast<double>(ones_since[i]) / static_cast<double>(seen);
                CHECK(mode.values[i] == expected);
            }
        }
    }
}

TEST_CASE("edge aggregation samples the mode exactly at the extremes") {
    BetaState state(3);
    Rng rng(5);
    // two unanimous coordinates and one split coordinate
    BinaryMask out = edge_aggregate(state, {bits({1, 0, 1}), bits({1, 0, 0})}, 1, rng);
    CHECK(out.get(0));
    CHECK_FALSE(out.get(1));
}

TEST_CASE("reset restores the priors before the update applies") {
    BetaState state(2, 1.0, ResetPolicy{2, 1});
    beta_update(state, {bits({1, 1})}, 1);
    beta_update(state, {bits({1, 0})}, 2);
    // round 3 is due: history vanishes, only the new masks count
    beta_update(state, {bits({0, 1})}, 3);
    CHECK(state.alpha == std::vector<double>{1.0, 2.0});
    CHECK(state.beta == std::vector<double>{2.0, 1.0});
}

TEST_CASE("input validation") {
    BetaState state(3);
    CHECK_THROWS_AS(beta_update(state, {}, 1), std::invalid_argument);
    CHECK_THROWS_AS(beta_update(state, {bits({1, 0})}, 1), std::invalid_argument);
}

}  // TEST_SUITE
