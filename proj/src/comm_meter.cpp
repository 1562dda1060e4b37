#include "hfedsn/comm_meter.hpp"

#include <cmath>
#include <stdexcept>

namespace hfedsn {

const char* to_string(PayloadKind kind) {
    switch (kind) {
        case PayloadKind::SharedMask: return "shared_mask";
        case PayloadKind::EdgeMask: return "edge_mask";
        case PayloadKind::GlobalTheta: return "global_theta";
        case PayloadKind::DenseWeights: return "dense_weights";
        case PayloadKind::TopkUpdate: return "topk_update";
    }
    return "unknown";
}

std::uint64_t payload_bits(PayloadKind kind, std::uint64_t element_count,
                           const CostModel& model) {
    switch (kind) {
        case PayloadKind::SharedMask:
        case PayloadKind::EdgeMask:
            return element_count * static_cast<std::uint64_t>(model.bits_per_mask_element);
        case PayloadKind::GlobalTheta:
            return model.mode == AccountingMode::Paper
                       ? element_count *
                             static_cast<std::uint64_t>(model.bits_per_mask_element)
                       : element_count * static_cast<std::uint64_t>(model.bits_per_weight);
        case PayloadKind::DenseWeights:
            return element_count * static_cast<std::uint64_t>(model.bits_per_weight);
        case PayloadKind::TopkUpdate: {
            std::uint64_t per_element = static_cast<std::uint64_t>(model.bits_per_weight);
            if (model.topk_index_bits) {
                per_element += static_cast<std::uint64_t>(model.index_bit_width);
            }
            return element_count * per_element;
        }
    }
    throw std::invalid_argument("unknown payload kind");
}

double bits_to_kb(std::uint64_t bits) {
    return static_cast<double>(bits) / 8.0 / 1024.0;
}

void CommMeter::record(int round, std::string src, std::string dst, PayloadKind kind,
                       std::uint64_t elements) {
    LinkRecord rec;
    rec.round = round;
    rec.src = std::move(src);
    rec.dst = std::move(dst);
    rec.kind = kind;
    rec.elements = elements;
    rec.bits = payload_bits(kind, elements, model_);
    records_.push_back(std::move(rec));
}

void CommMeter::record_broadcast(int round, std::string src,
                                 const std::vector<std::string>& clients, PayloadKind kind,
                                 std::uint64_t elements) {
    if (model_.mode == AccountingMode::Paper) {
        record(round, std::move(src), "clients", kind, elements);
        return;
    }
    for (const std::string& client : clients) {
        record(round, src, client, kind, elements);
    }
}

namespace {

void add_record(CommMeter::Totals& totals, const LinkRecord& rec) {
    double kb = bits_to_kb(rec.bits);
    if (rec.src == "cloud") {
        totals.downlink_kb += kb;
    } else if (rec.src.rfind("edge", 0) == 0) {
        totals.edge_uplink_kb += kb;
    } else {
        totals.client_uplink_kb += kb;
    }
    totals.total_kb += kb;
    totals.total_bits += rec.bits;
}

}  // namespace

CommMeter::Totals CommMeter::round_total(int round) const {
    Totals totals;
    for (const LinkRecord& rec : records_) {
        if (rec.round == round) add_record(totals, rec);
    }
    return totals;
}

CommMeter::Totals CommMeter::grand_total() const {
    Totals totals;
    for (const LinkRecord& rec : records_) add_record(totals, rec);
    return totals;
}

PerRoundCost per_round_costs(std::size_t total_params, std::size_t shared_params,
                             int num_clients, int num_edges, double topk_fraction,
                             AccountingMode mode) {
    if (total_params == 0 || shared_params == 0 || shared_params > total_params) {
        throw std::invalid_argument("need 0 < shared_params <= total_params");
    }
    if (num_clients < 1 || num_edges < 1) {
        throw std::invalid_argument("need at least one client and one edge");
    }
    if (topk_fraction <= 0.0 || topk_fraction > 1.0) {
        throw std::invalid_argument("topk fraction must be in (0, 1]");
    }

    const std::uint64_t d = total_params;
    const std::uint64_t s = shared_params;
    const std::uint64_t k_clients = static_cast<std::uint64_t>(num_clients);
    const std::uint64_t e_edges = static_cast<std::uint64_t>(num_edges);
    const std::uint64_t topk_k =
        static_cast<std::uint64_t>(std::ceil(topk_fraction * static_cast<double>(d)));
    const std::uint64_t index_width =
        static_cast<std::uint64_t>(std::ceil(std::log2(static_cast<double>(d))));

    // Broadcast copies and per-element pricing differ between the modes;
    // uplinks are identical.
    const std::uint64_t theta_copies = mode == AccountingMode::Paper ? 1 : k_clients;
    const std::uint64_t theta_bits_per_elem = mode == AccountingMode::Paper ? 1 : 32;
    const std::uint64_t dense_copies = mode == AccountingMode::Paper ? 1 : k_clients;

    const std::uint64_t hfedsn_bits =
        k_clients * s + e_edges * s + theta_copies * s * theta_bits_per_elem;
    const std::uint64_t hierfavg_bits =
        (k_clients + e_edges) * d * 32 + dense_copies * d * 32;
    const std::uint64_t topk_up = (k_clients + e_edges) * topk_k;
    const std::uint64_t topk_bits = topk_up * 32 + dense_copies * d * 32;
    const std::uint64_t topk_index_bits = topk_up * (32 + index_width) + dense_copies * d * 32;

    PerRoundCost cost;
    cost.hfedsn_kb = bits_to_kb(hfedsn_bits);
    cost.hierfavg_kb = bits_to_kb(hierfavg_bits);
    cost.topk_kb = bits_to_kb(topk_bits);
    cost.topk_with_index_kb = bits_to_kb(topk_index_bits);
    cost.dense_mask_ratio = cost.hierfavg_kb / cost.hfedsn_kb;
    cost.topk_k = topk_k;
    return cost;
}

}  // namespace hfedsn
