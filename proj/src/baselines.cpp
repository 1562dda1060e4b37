#include "hfedsn/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "hfedsn/network.hpp"
#include "hfedsn/rng.hpp"

namespace hfedsn {

namespace {

constexpr std::uint64_t kRoundStreamBase = 0x1000;

Batch gather_batch(const LabeledDataset& data, std::span<const std::size_t> indices) {
    Batch batch;
    const std::size_t dim = data.shape.elems();
    batch.inputs.reserve(indices.size() * dim);
    batch.labels.reserve(indices.size());
    for (std::size_t idx : indices) {
        auto s = data.sample(idx);
        batch.inputs.insert(batch.inputs.end(), s.begin(), s.end());
        batch.labels.push_back(data.labels[idx]);
    }
    return batch;
}

}  // namespace

std::vector<double> dense_local_train(DenseClientState& state, const ArchitectureSpec& arch,
                                      int round) {
    if (state.weights.size() != arch.param_count) {
        throw std::invalid_argument("weight vector length does not match architecture");
    }
    Rng rng(mix_seed(state.rng_seed, kRoundStreamBase + static_cast<std::uint64_t>(round)));
    const LabeledDataset& data = *state.dataset;

    std::vector<double> epoch_losses;
    std::vector<std::size_t> order = state.train_indices;
    const std::size_t bs = static_cast<std::size_t>(state.hyper.batch_size);
    for (int epoch = 0; epoch < state.hyper.tau; ++epoch) {
        rng.shuffle(order);
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += bs) {
            std::size_t take = std::min(bs, order.size() - start);
            Batch batch = gather_batch(data, {order.data() + start, take});
            BackwardResult back = loss_and_param_grad(arch, state.weights, batch);
            for (std::size_t i = 0; i < state.weights.size(); ++i) {
                state.weights[i] -= state.hyper.eta * back.param_grad[i];
            }
            loss_sum += back.loss * static_cast<double>(take);
        }
        epoch_losses.push_back(order.empty() ? 0.0
                                             : loss_sum / static_cast<double>(order.size()));
    }
    return epoch_losses;
}

std::vector<double> weighted_average(const std::vector<std::vector<double>>& vectors,
                                     const std::vector<double>& weights) {
    if (vectors.empty() || vectors.size() != weights.size()) {
        throw std::invalid_argument("need one positive weight per vector");
    }
    const std::size_t dim = vectors.front().size();
    double total = 0.0;
    for (double w : weights) {
        if (w <= 0.0) throw std::invalid_argument("weights must be positive");
        total += w;
    }
    std::vector<double> mean(dim, 0.0);
    for (std::size_t v = 0; v < vectors.size(); ++v) {
        if (vectors[v].size() != dim) {
            throw std::invalid_argument("vector length mismatch in average");
        }
        const double w = weights[v] / total;
        for (std::size_t i = 0; i < dim; ++i) mean[i] += w * vectors[v][i];
    }
    return mean;
}

std::vector<double> hierfavg_round(std::vector<DenseClientState>& clients,
                                   const Topology& topology, const ArchitectureSpec& arch,
                                   const std::vector<double>& global_weights, int round,
                                   CommMeter* meter) {
    std::vector<std::vector<double>> edge_models;
    std::vector<double> edge_counts;
    for (int e = 0; e < topology.num_edges; ++e) {
        std::vector<std::vector<double>> models;
        std::vector<double> counts;
        for (int id : topology.clients_per_edge[e]) {
            DenseClientState& client = clients[id];
            client.weights = global_weights;
            dense_local_train(client, arch, round);
            models.push_back(client.weights);
            counts.push_back(static_cast<double>(client.train_indices.size()));
            if (meter != nullptr) {
                meter->record(round, "client" + std::to_string(id),
                              "edge" + std::to_string(e), PayloadKind::DenseWeights,
                              arch.param_count);
            }
        }
        edge_models.push_back(weighted_average(models, counts));
        edge_counts.push_back(std::accumulate(counts.begin(), counts.end(), 0.0));
        if (meter != nullptr) {
            meter->record(round, "edge" + std::to_string(e), "cloud",
                          PayloadKind::DenseWeights, arch.param_count);
        }
    }
    std::vector<double> next = weighted_average(edge_models, edge_counts);
    if (meter != nullptr) {
        std::vector<std::string> names;
        for (const DenseClientState& c : clients) {
            names.push_back("client" + std::to_string(c.client_id));
        }
        meter->record_broadcast(round, "cloud", names, PayloadKind::DenseWeights,
                                arch.param_count);
    }
    return next;
}

SparseUpdate topk_sparsify(std::span<const double> delta, double fraction) {
    if (fraction <= 0.0 || fraction > 1.0) {
        throw std::invalid_argument("topk fraction must be in (0, 1]");
    }
    const std::size_t d = delta.size();
    const std::size_t k = std::min(
        d, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(d))));

    std::vector<std::uint32_t> order(d);
    std::iota(order.begin(), order.end(), 0u);
    // Magnitude descending, index ascending on ties; partial sort keeps it
    // cheap for small fractions.
    auto better = [&](std::uint32_t a, std::uint32_t b) {
        double ma = std::abs(delta[a]), mb = std::abs(delta[b]);
        if (ma != mb) return ma > mb;
        return a < b;
    };
    std::partial_sort(order.begin(), order.begin() + k, order.end(), better);
    order.resize(k);
    std::sort(order.begin(), order.end());

    SparseUpdate update;
    update.indices = std::move(order);
    update.values.reserve(k);
    for (std::uint32_t i : update.indices) update.values.push_back(delta[i]);
    return update;
}

std::vector<double> densify(const SparseUpdate& update, std::size_t dim) {
    std::vector<double> out(dim, 0.0);
    for (std::size_t i = 0; i < update.size(); ++i) {
        if (update.indices[i] >= dim) {
            throw std::invalid_argument("sparse index out of range");
        }
        out[update.indices[i]] = update.values[i];
    }
    return out;
}

}  // namespace hfedsn
