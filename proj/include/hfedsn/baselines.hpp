#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "hfedsn/architecture.hpp"
#include "hfedsn/client.hpp"
#include "hfedsn/comm_meter.hpp"
#include "hfedsn/dataset.hpp"
#include "hfedsn/topology.hpp"

namespace hfedsn {

// Client of the dense baselines: trains the full weight vector.
struct DenseClientState {
    int client_id = 0;
    int edge_id = 0;
    std::vector<double> weights;  // length d
    std::shared_ptr<const LabeledDataset> dataset;
    std::vector<std::size_t> train_indices;
    std::vector<std::size_t> test_indices;
    std::uint64_t rng_seed = 0;
    ClientHyper hyper;
};

// tau epochs of minibatch SGD on the client's weights; returns mean train
// loss per epoch. Deterministic given (state, round).
std::vector<double> dense_local_train(DenseClientState& state, const ArchitectureSpec& arch,
                                      int round);

// Sample-count-weighted mean of vectors; weights must be positive.
std::vector<double> weighted_average(const std::vector<std::vector<double>>& vectors,
                                     const std::vector<double>& weights);

// One HierFAVG round: every client trains from `global_weights`, edges
// average their clients by sample count, the cloud averages the edges by
// total sample count, and the result is returned (and broadcast-metered when
// a meter is given).
std::vector<double> hierfavg_round(std::vector<DenseClientState>& clients,
                                   const Topology& topology, const ArchitectureSpec& arch,
                                   const std::vector<double>& global_weights, int round,
                                   CommMeter* meter = nullptr);

struct SparseUpdate {
    std::vector<std::uint32_t> indices;  // ascending
    std::vector<double> values;

    std::size_t size() const { return indices.size(); }
};

// Keep the ceil(fraction * d) entries of largest magnitude, ties to the
// lower index; everything else is dropped (no error feedback).
SparseUpdate topk_sparsify(std::span<const double> delta, double fraction);

std::vector<double> densify(const SparseUpdate& update, std::size_t dim);

}  // namespace hfedsn
