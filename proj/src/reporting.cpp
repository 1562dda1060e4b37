#include "hfedsn/reporting.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace hfedsn {

namespace {

std::ofstream open_or_throw(const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path);
    }
    return out;
}

const char* arch_name(ArchVariant arch) {
    return arch == ArchVariant::Conv4 ? "conv4" : "mlp";
}

const char* accounting_name(AccountingMode mode) {
    return mode == AccountingMode::Paper ? "paper" : "physical";
}

}  // namespace

std::string format_fixed(double value, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
    return buf;
}

void write_metrics_csv(const std::string& path, const TrainingReport& report) {
    std::ofstream out = open_or_throw(path);
    out << "round,client,loss,accuracy\n";
    for (const RoundReport& r : report.rounds) {
        for (std::size_t k = 0; k < r.client_loss.size(); ++k) {
            out << r.round << ',' << k << ',' << format_fixed(r.client_loss[k]) << ',';
            if (k < r.client_accuracy.size()) {
                out << format_fixed(r.client_accuracy[k]);
            }
            out << '\n';
        }
    }
}

void write_comm_csv(const std::string& path, const CommMeter& meter) {
    std::ofstream out = open_or_throw(path);
    out << "round,src,dst,kind,elements,bits\n";
    for (const LinkRecord& rec : meter.records()) {
        out << rec.round << ',' << rec.src << ',' << rec.dst << ',' << to_string(rec.kind)
            << ',' << rec.elements << ',' << rec.bits << '\n';
    }
}

void write_summary_json(const std::string& path, const ExperimentConfig& config,
                        const TrainingReport& report) {
    std::ofstream out = open_or_throw(path);
    const RunConfig& run = config.run;

    double mean = 0.0, lo = 0.0, hi = 0.0;
    if (!report.final_accuracy.empty()) {
        lo = hi = report.final_accuracy.front();
        for (double a : report.final_accuracy) {
            mean += a;
            lo = std::min(lo, a);
            hi = std::max(hi, a);
        }
        mean /= static_cast<double>(report.final_accuracy.size());
    }
    CommMeter::Totals totals = report.meter.grand_total();

    out << "{\n";
    out << "  \"algorithm\": \"" << to_string(run.algorithm) << "\",\n";
    out << "  \"topology\": \"" << run.topology << "\",\n";
    out << "  \"arch\": \"" << arch_name(run.arch) << "\",\n";
    out << "  \"rounds\": " << run.rounds << ",\n";
    out << "  \"tau\": " << run.tau << ",\n";
    out << "  \"eta\": " << format_fixed(run.eta) << ",\n";
    out << "  \"batch\": " << run.batch_size << ",\n";
    out << "  \"n_classes_per_client\": " << run.labels_per_client << ",\n";
    out << "  \"seed\": " << run.seed << ",\n";
    out << "  \"accounting\": \"" << accounting_name(run.cost_mode) << "\",\n";
    out << "  \"total_params\": " << report.total_params << ",\n";
    out << "  \"shared_params\": " << report.shared_params << ",\n";
    out << "  \"num_clients\": " << report.num_clients << ",\n";
    out << "  \"num_edges\": " << report.num_edges << ",\n";
    out << "  \"final_accuracy_mean\": " << format_fixed(mean) << ",\n";
    out << "  \"final_accuracy_min\": " << format_fixed(lo) << ",\n";
    out << "  \"final_accuracy_max\": " << format_fixed(hi) << ",\n";
    out << "  \"final_accuracy_per_client\": [";
    for (std::size_t k = 0; k < report.final_accuracy.size(); ++k) {
        if (k > 0) out << ", ";
        out << format_fixed(report.final_accuracy[k]);
    }
    out << "],\n";
    out << "  \"total_comm_kb\": " << format_fixed(totals.total_kb) << ",\n";
    out << "  \"comm_breakdown_kb\": {\n";
    out << "    \"client_uplink\": " << format_fixed(totals.client_uplink_kb) << ",\n";
    out << "    \"edge_uplink\": " << format_fixed(totals.edge_uplink_kb) << ",\n";
    out << "    \"downlink\": " << format_fixed(totals.downlink_kb) << "\n";
    out << "  },\n";

    // what one round would cost under each algorithm, for comparison plots
    PerRoundCost cost =
        per_round_costs(report.total_params, report.shared_params, report.num_clients,
                        report.num_edges, run.topk_fraction, run.cost_mode);
    out << "  \"per_round_cost_kb\": {\n";
    out << "    \"hfedsn\": " << format_fixed(cost.hfedsn_kb) << ",\n";
    out << "    \"hierfavg\": " << format_fixed(cost.hierfavg_kb) << ",\n";
    out << "    \"topk\": " << format_fixed(cost.topk_kb) << ",\n";
    out << "    \"dense_over_mask_ratio\": " << format_fixed(cost.dense_mask_ratio, 2)
        << "\n";
    out << "  }\n";
    out << "}\n";
}

}  // namespace hfedsn
