#include "hfedsn/client.hpp"

#include <algorithm>
#include <stdexcept>

#include "hfedsn/rng.hpp"

namespace hfedsn {

namespace {

// Derived stream tags so that score init, per-round training, and final
// evaluation never reuse engine state.
constexpr std::uint64_t kScoreInitStream = 0xA0;
constexpr std::uint64_t kRoundStreamBase = 0x1000;
constexpr std::uint64_t kFinalizeStream = 0x2000;

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

ClientState make_client(int client_id, int edge_id, const ArchitectureSpec& arch,
                        const LayerPartition& partition,
                        std::shared_ptr<const LabeledDataset> dataset,
                        std::vector<std::size_t> train_indices,
                        std::vector<std::size_t> test_indices, std::uint64_t rng_seed,
                        ClientHyper hyper) {
    ClientState state;
    state.client_id = client_id;
    state.edge_id = edge_id;
    state.dataset = std::move(dataset);
    state.train_indices = std::move(train_indices);
    state.test_indices = std::move(test_indices);
    state.rng_seed = rng_seed;
    state.hyper = hyper;

    Rng rng(mix_seed(rng_seed, kScoreInitStream));
    state.scores.values.resize(arch.param_count);
    for (double& v : state.scores.values) v = rng.uniform(-0.01, 0.01);

    ProbabilityMask theta = sigmoid_mask(state.scores);
    state.private_theta = split_probability_mask(theta, partition).second;
    return state;
}

ProbabilityMask compose_probability_mask(const ProbabilityMask& theta_g,
                                         const ProbabilityMask& theta_p,
                                         const LayerPartition& partition) {
    if (theta_g.size() != partition.shared_dim || theta_p.size() != partition.private_dim) {
        throw std::invalid_argument("mask lengths do not match partition dims");
    }
    ProbabilityMask full;
    full.values.resize(partition.shared_dim + partition.private_dim);
    std::size_t pos = 0;
    for (auto [offset, len] : partition.shared_spans) {
        std::copy_n(theta_g.values.begin() + pos, len, full.values.begin() + offset);
        pos += len;
    }
    pos = 0;
    for (auto [offset, len] : partition.private_spans) {
        std::copy_n(theta_p.values.begin() + pos, len, full.values.begin() + offset);
        pos += len;
    }
    return full;
}

std::pair<ProbabilityMask, ProbabilityMask> split_probability_mask(
    const ProbabilityMask& full, const LayerPartition& partition) {
    if (full.size() != partition.shared_dim + partition.private_dim) {
        throw std::invalid_argument("mask length does not match partition");
    }
    ProbabilityMask shared, priv;
    shared.values.reserve(partition.shared_dim);
    priv.values.reserve(partition.private_dim);
    for (auto [offset, len] : partition.shared_spans) {
        shared.values.insert(shared.values.end(), full.values.begin() + offset,
                             full.values.begin() + offset + len);
    }
    for (auto [offset, len] : partition.private_spans) {
        priv.values.insert(priv.values.end(), full.values.begin() + offset,
                           full.values.begin() + offset + len);
    }
    return {std::move(shared), std::move(priv)};
}

std::pair<BinaryMask, BinaryMask> split_mask(const BinaryMask& full,
                                             const LayerPartition& partition) {
    if (full.size() != partition.shared_dim + partition.private_dim) {
        throw std::invalid_argument("mask length does not match partition");
    }
    BinaryMask shared(partition.shared_dim), priv(partition.private_dim);
    std::size_t pos = 0;
    for (auto [offset, len] : partition.shared_spans) {
        for (std::size_t i = 0; i < len; ++i) shared.set(pos + i, full.get(offset + i));
        pos += len;
    }
    pos = 0;
    for (auto [offset, len] : partition.private_spans) {
        for (std::size_t i = 0; i < len; ++i) priv.set(pos + i, full.get(offset + i));
        pos += len;
    }
    return {std::move(shared), std::move(priv)};
}

ClientRoundResult client_round(ClientState& state, const ArchitectureSpec& arch,
                               const ParameterVector& w_init, const LayerPartition& partition,
                               const ProbabilityMask* theta_g, int round, SteMode ste) {
    if (theta_g == nullptr && round != 1) {
        throw std::invalid_argument("broadcast required after the first round");
    }
    if (theta_g != nullptr) {
        ProbabilityMask full =
            compose_probability_mask(*theta_g, state.private_theta, partition);
        state.scores = logit_mask(full);
    }

    Rng rng(mix_seed(state.rng_seed, kRoundStreamBase + static_cast<std::uint64_t>(round)));
    const LabeledDataset& data = *state.dataset;

    ClientRoundResult result;
    std::vector<std::size_t> order = state.train_indices;
    const std::size_t bs = static_cast<std::size_t>(state.hyper.batch_size);
    for (int epoch = 0; epoch < state.hyper.tau; ++epoch) {
        rng.shuffle(order);
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += bs) {
            std::size_t take = std::min(bs, order.size() - start);
            Batch batch = gather_batch(data, {order.data() + start, take});
            ProbabilityMask theta = sigmoid_mask(state.scores);
            BinaryMask mask = sample_binary_mask(theta, rng);
            ScoreGradResult grad =
                backward_score_grad(arch, w_init, theta, &mask, batch, ste);
            sgd_step(state.scores, grad.score_grad, state.hyper.eta);
            loss_sum += grad.loss * static_cast<double>(take);
        }
        result.epoch_losses.push_back(
            order.empty() ? 0.0 : loss_sum / static_cast<double>(order.size()));
    }

    ProbabilityMask theta = sigmoid_mask(state.scores);
    BinaryMask round_mask = sample_binary_mask(theta, rng);
    auto [shared_theta, private_theta] = split_probability_mask(theta, partition);
    state.private_theta = std::move(private_theta);
    result.shared_mask = split_mask(round_mask, partition).first;
    return result;
}

FinalModel finalize_model(const ProbabilityMask& theta_g, const ClientState& state,
                          const ArchitectureSpec& arch, const ParameterVector& w_init,
                          const LayerPartition& partition, bool deterministic) {
    (void)arch;
    ProbabilityMask full = compose_probability_mask(theta_g, state.private_theta, partition);
    FinalModel model;
    if (deterministic) {
        model.mask = threshold_mask(full);
    } else {
        Rng rng(mix_seed(state.rng_seed, kFinalizeStream));
        model.mask = sample_binary_mask(full, rng);
    }
    model.weights = apply_mask(w_init, model.mask);
    return model;
}

double evaluate(const ArchitectureSpec& arch, std::span<const double> params,
                const LabeledDataset& data, std::span<const std::size_t> indices) {
    if (indices.empty()) return 0.0;
    constexpr std::size_t kEvalBatch = 256;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < indices.size(); start += kEvalBatch) {
        std::size_t take = std::min(kEvalBatch, indices.size() - start);
        Batch batch = gather_batch(data, {indices.data() + start, take});
        ForwardResult fwd = forward(arch, params, batch);
        for (std::size_t i = 0; i < take; ++i) {
            const double* logits = fwd.logits.data() + i * arch.num_classes;
            int best = 0;
            for (int j = 1; j < arch.num_classes; ++j) {
                if (logits[j] > logits[best]) best = j;
            }
            if (best == batch.labels[i]) ++correct;
        }
    }
    return static_cast<double>(correct) / static_cast<double>(indices.size());
}

}  // namespace hfedsn
