#include "hfedsn/orchestrator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <memory>
#include <numeric>
#include <span>
#include <stdexcept>
#include <thread>

#include "hfedsn/baselines.hpp"
#include "hfedsn/parameter_vector.hpp"
#include "hfedsn/rng.hpp"

namespace hfedsn {

namespace {

constexpr std::uint64_t kWeightStream = 0x01;
constexpr std::uint64_t kClientSeedBase = 0x100;
constexpr std::uint64_t kEdgeSeedBase = 0x200;

std::string client_name(int id) { return "client" + std::to_string(id); }
std::string edge_name(int id) { return "edge" + std::to_string(id); }

// Runs fn(0..n-1) across up to `workers` threads. Tasks must be independent.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
    const std::size_t nthreads =
        std::min<std::size_t>(n, std::max(1, workers));
    if (nthreads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (std::size_t t = 0; t < nthreads; ++t) {
        pool.emplace_back([&, t] {
            for (std::size_t i = t; i < n; i += nthreads) fn(i);
        });
    }
    for (std::thread& th : pool) th.join();
}

struct Common {
    ArchitectureSpec arch;
    LayerPartition partition;
    Topology topology;
    PartitionPlan plan;
    ParameterVector w_init;
    std::shared_ptr<const LabeledDataset> train;
    std::shared_ptr<const LabeledDataset> test;
    CostModel cost;
    int workers = 1;
};

Common prepare(const RunConfig& config, const LabeledDataset& train,
               const LabeledDataset& test) {
    if (config.rounds < 1) {
        throw std::invalid_argument("need at least one round");
    }
    if (config.tau < 0) {
        throw std::invalid_argument("local epochs cannot be negative");
    }
    Common c;
    c.arch = build_architecture(train.shape, train.num_classes, config.arch);
    c.partition = default_partition(c.arch);
    c.topology = build_topology(config.topology, config.seed);
    c.plan = quantity_label_partition(train, test, c.topology.num_clients(),
                                      config.labels_per_client, config.seed);
    c.w_init = init_frozen_weights(c.arch, mix_seed(config.seed, kWeightStream));
    c.train = std::make_shared<const LabeledDataset>(train);
    c.test = std::make_shared<const LabeledDataset>(test);
    c.cost.mode = config.cost_mode;
    c.cost.topk_index_bits = config.topk_index_bits;
    c.cost.index_bit_width = static_cast<int>(
        std::ceil(std::log2(static_cast<double>(c.arch.param_count))));
    c.workers = worker_count();
    return c;
}

ClientHyper make_hyper(const RunConfig& config) {
    ClientHyper hyper;
    hyper.tau = config.tau;
    hyper.eta = config.eta;
    hyper.batch_size = config.batch_size;
    return hyper;
}

std::vector<std::string> all_client_names(const Topology& topo) {
    std::vector<std::string> names;
    names.reserve(topo.num_clients());
    for (int k = 0; k < topo.num_clients(); ++k) names.push_back(client_name(k));
    return names;
}

TrainingReport run_hfedsn(const RunConfig& config, Common& c) {
    TrainingReport report;
    report.meter = CommMeter(c.cost);
    const std::size_t s = c.partition.shared_dim;

    std::vector<ClientState> clients;
    for (int k = 0; k < c.topology.num_clients(); ++k) {
        clients.push_back(make_client(k, c.topology.edge_of_client[k], c.arch, c.partition,
                                      c.train, c.plan.train_indices[k],
                                      c.plan.test_indices[k],
                                      mix_seed(config.seed, kClientSeedBase + k),
                                      make_hyper(config)));
    }
    std::vector<BetaState> edge_states;
    std::vector<Rng> edge_rngs;
    for (int e = 0; e < c.topology.num_edges; ++e) {
        edge_states.emplace_back(s, 1.0, config.reset, edge_name(e));
        edge_rngs.emplace_back(mix_seed(config.seed, kEdgeSeedBase + e));
    }
    BetaState cloud_state(s, 1.0, config.reset, "cloud");
    ProbabilityMask theta_g;

    const std::vector<std::string> names = all_client_names(c.topology);
    for (int t = 1; t <= config.rounds; ++t) {
        std::vector<ClientRoundResult> results(clients.size());
        const ProbabilityMask* broadcast = t == 1 ? nullptr : &theta_g;
        parallel_for(clients.size(), c.workers, [&](std::size_t k) {
            results[k] = client_round(clients[k], c.arch, c.w_init, c.partition, broadcast,
                                      t, config.ste);
        });

        std::vector<BinaryMask> edge_masks;
        for (int e = 0; e < c.topology.num_edges; ++e) {
            std::vector<BinaryMask> uploads;
            for (int id : c.topology.clients_per_edge[e]) {
                report.meter.record(t, client_name(id), edge_name(e),
                                    PayloadKind::SharedMask, s);
                uploads.push_back(std::move(results[id].shared_mask));
            }
            edge_masks.push_back(edge_aggregate(edge_states[e], uploads, t, edge_rngs[e]));
            report.meter.record(t, edge_name(e), "cloud", PayloadKind::EdgeMask, s);
        }
        theta_g = cloud_aggregate(cloud_state, edge_masks, t);
        report.meter.record_broadcast(t, "cloud", names, PayloadKind::GlobalTheta, s);

        RoundReport round_report;
        round_report.round = t;
        for (const ClientRoundResult& r : results) {
            round_report.client_loss.push_back(
                r.epoch_losses.empty() ? 0.0 : r.epoch_losses.back());
        }
        if (config.eval_mode == EvalMode::PerRound) {
            round_report.client_accuracy.resize(clients.size());
            parallel_for(clients.size(), c.workers, [&](std::size_t k) {
                FinalModel model = finalize_model(theta_g, clients[k], c.arch, c.w_init,
                                                  c.partition, config.deterministic_eval);
                round_report.client_accuracy[k] = evaluate(
                    c.arch, model.weights, *c.test, clients[k].test_indices);
            });
        }
        round_report.round_kb = report.meter.round_total(t).total_kb;
        report.rounds.push_back(std::move(round_report));
    }

    report.final_accuracy.resize(clients.size());
    parallel_for(clients.size(), c.workers, [&](std::size_t k) {
        FinalModel model = finalize_model(theta_g, clients[k], c.arch, c.w_init, c.partition,
                                          config.deterministic_eval);
        report.final_accuracy[k] =
            evaluate(c.arch, model.weights, *c.test, clients[k].test_indices);
    });
    return report;
}

std::vector<DenseClientState> make_dense_clients(const RunConfig& config, const Common& c) {
    std::vector<DenseClientState> clients;
    for (int k = 0; k < c.topology.num_clients(); ++k) {
        DenseClientState state;
        state.client_id = k;
        state.edge_id = c.topology.edge_of_client[k];
        state.weights.assign(c.w_init.values().begin(), c.w_init.values().end());
        state.dataset = c.train;
        state.train_indices = c.plan.train_indices[k];
        state.test_indices = c.plan.test_indices[k];
        state.rng_seed = mix_seed(config.seed, kClientSeedBase + k);
        state.hyper = make_hyper(config);
        clients.push_back(std::move(state));
    }
    return clients;
}

void eval_global(const Common& c, std::span<const double> global,
                 const std::vector<DenseClientState>& clients, RoundReport& round_report) {
    round_report.client_accuracy.resize(clients.size());
    parallel_for(clients.size(), c.workers, [&](std::size_t k) {
        round_report.client_accuracy[k] =
            evaluate(c.arch, global, *c.test, clients[k].test_indices);
    });
}

TrainingReport run_hierfavg(const RunConfig& config, Common& c) {
    TrainingReport report;
    report.meter = CommMeter(c.cost);
    const std::size_t d = c.arch.param_count;

    std::vector<DenseClientState> clients = make_dense_clients(config, c);
    std::vector<double> global(c.w_init.values().begin(), c.w_init.values().end());
    const std::vector<std::string> names = all_client_names(c.topology);

    for (int t = 1; t <= config.rounds; ++t) {
        RoundReport round_report;
        round_report.round = t;
        round_report.client_loss.assign(clients.size(), 0.0);

        parallel_for(clients.size(), c.workers, [&](std::size_t k) {
            clients[k].weights = global;
            std::vector<double> losses = dense_local_train(clients[k], c.arch, t);
            round_report.client_loss[k] = losses.empty() ? 0.0 : losses.back();
        });

        std::vector<std::vector<double>> edge_models;
        std::vector<double> edge_counts;
        for (int e = 0; e < c.topology.num_edges; ++e) {
            std::vector<std::vector<double>> models;
            std::vector<double> counts;
            for (int id : c.topology.clients_per_edge[e]) {
                report.meter.record(t, client_name(id), edge_name(e),
                                    PayloadKind::DenseWeights, d);
                models.push_back(clients[id].weights);
                counts.push_back(static_cast<double>(clients[id].train_indices.size()));
            }
            edge_models.push_back(weighted_average(models, counts));
            edge_counts.push_back(std::accumulate(counts.begin(), counts.end(), 0.0));
            report.meter.record(t, edge_name(e), "cloud", PayloadKind::DenseWeights, d);
        }
        global = weighted_average(edge_models, edge_counts);
        report.meter.record_broadcast(t, "cloud", names, PayloadKind::DenseWeights, d);

        if (config.eval_mode == EvalMode::PerRound) {
            eval_global(c, global, clients, round_report);
        }
        round_report.round_kb = report.meter.round_total(t).total_kb;
        report.rounds.push_back(std::move(round_report));
    }

    report.final_accuracy.resize(clients.size());
    parallel_for(clients.size(), c.workers, [&](std::size_t k) {
        report.final_accuracy[k] =
            evaluate(c.arch, global, *c.test, clients[k].test_indices);
    });
    return report;
}

TrainingReport run_topk(const RunConfig& config, Common& c) {
    TrainingReport report;
    report.meter = CommMeter(c.cost);
    const std::size_t d = c.arch.param_count;

    std::vector<DenseClientState> clients = make_dense_clients(config, c);
    std::vector<double> global(c.w_init.values().begin(), c.w_init.values().end());
    const std::vector<std::string> names = all_client_names(c.topology);

    for (int t = 1; t <= config.rounds; ++t) {
        RoundReport round_report;
        round_report.round = t;
        round_report.client_loss.assign(clients.size(), 0.0);
        std::vector<SparseUpdate> updates(clients.size());

        parallel_for(clients.size(), c.workers, [&](std::size_t k) {
            clients[k].weights = global;
            std::vector<double> losses = dense_local_train(clients[k], c.arch, t);
            round_report.client_loss[k] = losses.empty() ? 0.0 : losses.back();
            std::vector<double> delta(d);
            for (std::size_t i = 0; i < d; ++i) delta[i] = clients[k].weights[i] - global[i];
            updates[k] = topk_sparsify(delta, config.topk_fraction);
        });

        std::vector<std::vector<double>> edge_deltas;
        std::vector<double> edge_counts;
        for (int e = 0; e < c.topology.num_edges; ++e) {
            std::vector<std::vector<double>> deltas;
            std::vector<double> counts;
            for (int id : c.topology.clients_per_edge[e]) {
                report.meter.record(t, client_name(id), edge_name(e),
                                    PayloadKind::TopkUpdate, updates[id].size());
                deltas.push_back(densify(updates[id], d));
                counts.push_back(static_cast<double>(clients[id].train_indices.size()));
            }
            SparseUpdate edge_update =
                topk_sparsify(weighted_average(deltas, counts), config.topk_fraction);
            report.meter.record(t, edge_name(e), "cloud", PayloadKind::TopkUpdate,
                                edge_update.size());
            edge_deltas.push_back(densify(edge_update, d));
            edge_counts.push_back(std::accumulate(counts.begin(), counts.end(), 0.0));
        }
        std::vector<double> mean_delta = weighted_average(edge_deltas, edge_counts);
        for (std::size_t i = 0; i < d; ++i) global[i] += mean_delta[i];
        report.meter.record_broadcast(t, "cloud", names, PayloadKind::DenseWeights, d);

        if (config.eval_mode == EvalMode::PerRound) {
            eval_global(c, global, clients, round_report);
        }
        round_report.round_kb = report.meter.round_total(t).total_kb;
        report.rounds.push_back(std::move(round_report));
    }

    report.final_accuracy.resize(clients.size());
    parallel_for(clients.size(), c.workers, [&](std::size_t k) {
        report.final_accuracy[k] =
            evaluate(c.arch, global, *c.test, clients[k].test_indices);
    });
    return report;
}

}  // namespace

const char* to_string(Algorithm algorithm) {
    switch (algorithm) {
        case Algorithm::HFedSn: return "hfedsn";
        case Algorithm::HierFavg: return "hierfavg";
        case Algorithm::Topk: return "topk";
    }
    return "unknown";
}

int worker_count() {
    if (const char* env = std::getenv("HFEDSN_WORKERS")) {
        int n = std::atoi(env);
        if (n >= 1) return n;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

TrainingReport run_training(const RunConfig& config, const LabeledDataset& train,
                            const LabeledDataset& test) {
    Common c = prepare(config, train, test);
    TrainingReport report;
    switch (config.algorithm) {
        case Algorithm::HFedSn:
            report = run_hfedsn(config, c);
            break;
        case Algorithm::HierFavg:
            report = run_hierfavg(config, c);
            break;
        case Algorithm::Topk:
            report = run_topk(config, c);
            break;
    }
    report.total_params = c.arch.param_count;
    report.shared_params = c.partition.shared_dim;
    report.num_clients = c.topology.num_clients();
    report.num_edges = c.topology.num_edges;
    return report;
}

}  // namespace hfedsn
