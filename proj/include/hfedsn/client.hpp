#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "hfedsn/architecture.hpp"
#include "hfedsn/dataset.hpp"
#include "hfedsn/masks.hpp"
#include "hfedsn/network.hpp"
#include "hfedsn/parameter_vector.hpp"

namespace hfedsn {

struct ClientHyper {
    int tau = 1;          // local epochs per round
    double eta = 0.01;    // learning rate
    int batch_size = 32;
};

struct ClientState {
    int client_id = 0;
    int edge_id = 0;
    std::shared_ptr<const LabeledDataset> dataset;
    std::vector<std::size_t> train_indices;
    std::vector<std::size_t> test_indices;
    ScoreMask scores;              // length d, persists across rounds
    ProbabilityMask private_theta; // length p, updated only by client_round
    std::uint64_t rng_seed = 0;
    ClientHyper hyper;
};

// Fresh client with scores ~ Uniform(-0.01, 0.01) (theta near 0.5) and
// private_theta initialized from those scores.
ClientState make_client(int client_id, int edge_id, const ArchitectureSpec& arch,
                        const LayerPartition& partition,
                        std::shared_ptr<const LabeledDataset> dataset,
                        std::vector<std::size_t> train_indices,
                        std::vector<std::size_t> test_indices, std::uint64_t rng_seed,
                        ClientHyper hyper);

// Full-length theta taking shared coordinates from theta_g and private
// coordinates from theta_p (disjoint-coordinate composition).
ProbabilityMask compose_probability_mask(const ProbabilityMask& theta_g,
                                         const ProbabilityMask& theta_p,
                                         const LayerPartition& partition);

std::pair<ProbabilityMask, ProbabilityMask> split_probability_mask(
    const ProbabilityMask& full, const LayerPartition& partition);

std::pair<BinaryMask, BinaryMask> split_mask(const BinaryMask& full,
                                             const LayerPartition& partition);

struct ClientRoundResult {
    BinaryMask shared_mask;           // length s, the upload
    std::vector<double> epoch_losses; // mean train loss per local epoch
};

// One client round: for t > 1 rebuild scores from the broadcast composed
// with the stored private theta, then run tau epochs of minibatch SGD on the
// scores with a fresh Bernoulli mask per forward pass, finally sample the
// round mask and persist the private part of theta. Deterministic given
// (state, theta_g, round). theta_g may be null only when round == 1.
ClientRoundResult client_round(ClientState& state, const ArchitectureSpec& arch,
                               const ParameterVector& w_init, const LayerPartition& partition,
                               const ProbabilityMask* theta_g, int round,
                               SteMode ste = SteMode::Identity);

struct FinalModel {
    std::vector<double> weights;  // masked view of w_init
    BinaryMask mask;              // length d
};

// Final model: compose theta_g with the client's private theta and either
// sample the mask from a dedicated evaluation stream or threshold at 0.5.
FinalModel finalize_model(const ProbabilityMask& theta_g, const ClientState& state,
                          const ArchitectureSpec& arch, const ParameterVector& w_init,
                          const LayerPartition& partition, bool deterministic = false);

// Fraction of argmax-correct predictions; argmax ties resolve to the lowest
// class index.
double evaluate(const ArchitectureSpec& arch, std::span<const double> params,
                const LabeledDataset& data, std::span<const std::size_t> indices);

}  // namespace hfedsn
