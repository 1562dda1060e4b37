#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "hfedsn/architecture.hpp"
#include "hfedsn/comm_meter.hpp"
#include "hfedsn/config.hpp"
#include "hfedsn/orchestrator.hpp"
#include "hfedsn/reporting.hpp"
#include "hfedsn/topology.hpp"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitBadConfig = 2;
constexpr int kExitDataset = 3;

struct ArchPreset {
    hfedsn::Shape shape;
    int classes;
    hfedsn::ArchVariant variant;
};

ArchPreset arch_preset(const std::string& name) {
    if (name == "conv4-mnist") {
        return {hfedsn::Shape{1, 28, 28}, 10, hfedsn::ArchVariant::Conv4};
    }
    if (name == "conv4-widar") {
        return {hfedsn::Shape{22, 20, 20}, 9, hfedsn::ArchVariant::Conv4};
    }
    if (name == "mlp-blobs") {
        return {hfedsn::Shape{1, 4, 4}, 4, hfedsn::ArchVariant::Mlp};
    }
    throw hfedsn::ConfigError("unknown arch preset \"" + name +
                              "\" (expected conv4-mnist, conv4-widar, or mlp-blobs)");
}

int cmd_run(const std::string& config_path) {
    hfedsn::ExperimentConfig cfg = hfedsn::load_config_file(config_path);
    auto [train, test] = hfedsn::load_dataset(cfg.dataset);

    hfedsn::TrainingReport report = hfedsn::run_training(cfg.run, train, test);

    std::filesystem::create_directories(cfg.output_dir);
    const std::string base = cfg.output_dir + "/";
    hfedsn::write_metrics_csv(base + "metrics.csv", report);
    hfedsn::write_comm_csv(base + "comm.csv", report.meter);
    hfedsn::write_summary_json(base + "summary.json", cfg, report);

    double mean = 0.0;
    for (double a : report.final_accuracy) mean += a;
    if (!report.final_accuracy.empty()) {
        mean /= static_cast<double>(report.final_accuracy.size());
    }
    std::cout << "algorithm: " << hfedsn::to_string(cfg.run.algorithm) << "\n"
              << "rounds: " << cfg.run.rounds << "\n"
              << "final_accuracy_mean: " << hfedsn::format_fixed(mean) << "\n"
              << "total_comm_kb: "
              << hfedsn::format_fixed(report.meter.grand_total().total_kb) << "\n"
              << "outputs: " << base << "{metrics.csv, comm.csv, summary.json}\n";
    return 0;
}

int cmd_commcheck(const std::string& arch_name, const std::string& topology,
                  const std::string& accounting, double topk_fraction) {
    ArchPreset preset = arch_preset(arch_name);
    hfedsn::ArchitectureSpec arch =
        hfedsn::build_architecture(preset.shape, preset.classes, preset.variant);
    hfedsn::LayerPartition partition = hfedsn::default_partition(arch);
    hfedsn::Topology topo = hfedsn::build_topology(topology, 0);

    hfedsn::AccountingMode mode;
    if (accounting == "paper") {
        mode = hfedsn::AccountingMode::Paper;
    } else if (accounting == "physical") {
        mode = hfedsn::AccountingMode::Physical;
    } else {
        throw hfedsn::ConfigError("unknown accounting \"" + accounting +
                                  "\" (expected paper or physical)");
    }

    hfedsn::PerRoundCost cost =
        hfedsn::per_round_costs(arch.param_count, partition.shared_dim, topo.num_clients(),
                                topo.num_edges, topk_fraction, mode);
    double link_ratio = 32.0 * static_cast<double>(arch.param_count) /
                        static_cast<double>(partition.shared_dim);

    std::cout << "arch: " << arch_name << "\n"
              << "input: " << preset.shape.channels << "x" << preset.shape.height << "x"
              << preset.shape.width << " classes: " << preset.classes << "\n"
              << "topology: " << topology << " clients=" << topo.num_clients()
              << " edges=" << topo.num_edges << "\n"
              << "total_params: " << arch.param_count << "\n"
              << "shared_params: " << partition.shared_dim << "\n"
              << "link_compression_ratio: " << hfedsn::format_fixed(link_ratio, 2) << "\n"
              << "accounting: " << accounting << "\n"
              << "per_round_kb_hfedsn: " << hfedsn::format_fixed(cost.hfedsn_kb, 2) << "\n"
              << "per_round_kb_hierfavg: " << hfedsn::format_fixed(cost.hierfavg_kb, 2)
              << "\n"
              << "per_round_kb_topk: " << hfedsn::format_fixed(cost.topk_kb, 2) << "\n"
              << "per_round_kb_topk_with_index: "
              << hfedsn::format_fixed(cost.topk_with_index_kb, 2) << "\n"
              << "ratio_hierfavg_over_hfedsn: "
              << hfedsn::format_fixed(cost.dense_mask_ratio, 2) << "\n"
              << "topk_k: " << cost.topk_k << "\n";
    return 0;
}

int cmd_partition(const std::string& config_path) {
    hfedsn::ExperimentConfig cfg = hfedsn::load_config_file(config_path);
    auto [train, test] = hfedsn::load_dataset(cfg.dataset);
    hfedsn::Topology topo = hfedsn::build_topology(cfg.run.topology, cfg.run.seed);
    hfedsn::PartitionPlan plan = hfedsn::quantity_label_partition(
        train, test, topo.num_clients(), cfg.run.labels_per_client, cfg.run.seed);

    std::cout << "clients: " << topo.num_clients() << " edges: " << topo.num_edges
              << " classes: " << train.num_classes << "\n";
    std::cout << "client,edge,train_n,test_n,labels\n";
    for (int k = 0; k < topo.num_clients(); ++k) {
        std::cout << k << ',' << topo.edge_of_client[k] << ','
                  << plan.train_indices[k].size() << ',' << plan.test_indices[k].size()
                  << ',';
        for (std::size_t i = 0; i < plan.client_labels[k].size(); ++i) {
            if (i > 0) std::cout << ' ';
            std::cout << plan.client_labels[k][i];
        }
        std::cout << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hierarchical federated training of personalized sparse networks"};
    app.require_subcommand(1);

    std::string run_config;
    CLI::App* run = app.add_subcommand("run", "Run a training experiment from a config");
    run->add_option("config", run_config, "JSON config path")->required();

    std::string cc_arch = "conv4-mnist";
    std::string cc_topology = "E2C5";
    std::string cc_accounting = "paper";
    double cc_topk_fraction = 0.03125;
    CLI::App* commcheck =
        app.add_subcommand("commcheck", "Print per-round communication cost arithmetic");
    commcheck->add_option("--arch", cc_arch,
                          "Architecture preset (conv4-mnist, conv4-widar, mlp-blobs)");
    commcheck->add_option("--topology", cc_topology, "Topology preset, e.g. E2C5");
    commcheck->add_option("--accounting", cc_accounting, "paper or physical");
    commcheck->add_option("--topk-fraction", cc_topk_fraction, "TopK keep fraction");

    std::string part_config;
    CLI::App* partition =
        app.add_subcommand("partition", "Print the client data partition without training");
    partition->add_option("config", part_config, "JSON config path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitBadConfig;
    }

    try {
        if (run->parsed()) return cmd_run(run_config);
        if (commcheck->parsed()) {
            return cmd_commcheck(cc_arch, cc_topology, cc_accounting, cc_topk_fraction);
        }
        if (partition->parsed()) return cmd_partition(part_config);
    } catch (const hfedsn::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitBadConfig;
    } catch (const hfedsn::DatasetError& e) {
        std::cerr << "dataset error: " << e.what() << "\n";
        return kExitDataset;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitBadConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitRuntime;
}
