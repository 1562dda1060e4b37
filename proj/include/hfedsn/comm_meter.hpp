#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace hfedsn {

enum class PayloadKind { SharedMask, EdgeMask, GlobalTheta, DenseWeights, TopkUpdate };

const char* to_string(PayloadKind kind);

enum class AccountingMode { Paper, Physical };

// Transmission pricing. Paper mode prices the broadcast at the mask rate
// and counts it once per round; physical mode prices the broadcast theta at
// 32 bits per element, one copy per client. index_bit_width (ceil(log2 d))
// is only consulted when topk_index_bits is set.
struct CostModel {
    int bits_per_mask_element = 1;
    int bits_per_weight = 32;
    AccountingMode mode = AccountingMode::Paper;
    bool topk_index_bits = false;
    int index_bit_width = 0;
};

std::uint64_t payload_bits(PayloadKind kind, std::uint64_t element_count,
                           const CostModel& model);

// One transmission event.
struct LinkRecord {
    int round = 0;
    std::string src;
    std::string dst;
    PayloadKind kind = PayloadKind::SharedMask;
    std::uint64_t elements = 0;
    std::uint64_t bits = 0;
};

double bits_to_kb(std::uint64_t bits);  // KB = 1024 bytes

class CommMeter {
public:
    CommMeter() = default;
    explicit CommMeter(CostModel model) : model_(model) {}

    const CostModel& model() const { return model_; }

    void record(int round, std::string src, std::string dst, PayloadKind kind,
                std::uint64_t elements);

    // Paper mode: one record with dst "clients". Physical mode: one record
    // per destination client.
    void record_broadcast(int round, std::string src, const std::vector<std::string>& clients,
                          PayloadKind kind, std::uint64_t elements);

    const std::vector<LinkRecord>& records() const { return records_; }

    struct Totals {
        double client_uplink_kb = 0.0;
        double edge_uplink_kb = 0.0;
        double downlink_kb = 0.0;
        double total_kb = 0.0;
        std::uint64_t total_bits = 0;
    };

    Totals round_total(int round) const;
    Totals grand_total() const;

private:
    CostModel model_;
    std::vector<LinkRecord> records_;
};

// Pure arithmetic for the per-round cost table: no training involved.
struct PerRoundCost {
    double hfedsn_kb = 0.0;
    double hierfavg_kb = 0.0;
    double topk_kb = 0.0;             // value bits only
    double topk_with_index_kb = 0.0;  // value + index bits
    double dense_mask_ratio = 0.0;    // hierfavg / hfedsn
    std::uint64_t topk_k = 0;
};

PerRoundCost per_round_costs(std::size_t total_params, std::size_t shared_params,
                             int num_clients, int num_edges, double topk_fraction,
                             AccountingMode mode = AccountingMode::Paper);

}  // namespace hfedsn
