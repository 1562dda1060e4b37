#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hfedsn/architecture.hpp"
#include "hfedsn/beta_aggregation.hpp"
#include "hfedsn/client.hpp"
#include "hfedsn/comm_meter.hpp"
#include "hfedsn/dataset.hpp"
#include "hfedsn/network.hpp"
#include "hfedsn/topology.hpp"

namespace hfedsn {

enum class Algorithm { HFedSn, HierFavg, Topk };

const char* to_string(Algorithm algorithm);

enum class EvalMode { PerRound, FinalOnly };

struct RunConfig {
    Algorithm algorithm = Algorithm::HFedSn;
    std::string topology = "E2C5";
    ArchVariant arch = ArchVariant::Mlp;
    int rounds = 1;           // T
    int tau = 1;              // local epochs per round
    double eta = 0.01;
    int batch_size = 32;
    int labels_per_client = 2;  // n
    std::uint64_t seed = 0;
    AccountingMode cost_mode = AccountingMode::Paper;
    bool topk_index_bits = false;
    double topk_fraction = 0.03125;
    ResetPolicy reset;
    SteMode ste = SteMode::Identity;
    bool deterministic_eval = false;
    EvalMode eval_mode = EvalMode::PerRound;
};

struct RoundReport {
    int round = 0;
    std::vector<double> client_loss;                // final-epoch mean per client
    std::vector<double> client_accuracy;            // empty when eval is final-only
    double round_kb = 0.0;
};

struct TrainingReport {
    std::vector<RoundReport> rounds;
    std::vector<double> final_accuracy;  // per client, after finalization
    CommMeter meter;
    std::size_t total_params = 0;   // d
    std::size_t shared_params = 0;  // s
    int num_clients = 0;
    int num_edges = 0;
};

// Runs T synchronous rounds of the configured algorithm over the given
// train/test datasets, then finalizes and evaluates every client.
// Deterministic given (config, data).
TrainingReport run_training(const RunConfig& config, const LabeledDataset& train,
                            const LabeledDataset& test);

// Worker count for the parallel client phase; reads HFEDSN_WORKERS when set,
// otherwise uses the hardware concurrency.
int worker_count();

}  // namespace hfedsn
