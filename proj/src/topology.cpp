#include "hfedsn/topology.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "hfedsn/rng.hpp"

namespace hfedsn {

std::vector<int> edge_sizes_from_ratios(int num_clients, const std::vector<double>& ratios) {
    if (ratios.empty()) {
        throw std::invalid_argument("need at least one edge ratio");
    }
    double sum = std::accumulate(ratios.begin(), ratios.end(), 0.0);
    if (std::abs(sum - 1.0) > 1e-9) {
        throw std::invalid_argument("edge ratios sum to " + std::to_string(sum) +
                                    ", expected 1");
    }
    if (num_clients < static_cast<int>(ratios.size())) {
        throw std::invalid_argument("fewer clients than edges");
    }

    const int e = static_cast<int>(ratios.size());
    std::vector<int> sizes(e);
    std::vector<double> remainders(e);
    int assigned = 0;
    for (int i = 0; i < e; ++i) {
        double exact = ratios[i] * num_clients;
        sizes[i] = static_cast<int>(std::floor(exact));
        remainders[i] = exact - sizes[i];
        assigned += sizes[i];
    }
    std::vector<int> order(e);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return remainders[a] > remainders[b]; });
    for (int i = 0; i < num_clients - assigned; ++i) {
        sizes[order[i]] += 1;
    }
    return sizes;
}

Topology build_topology_ratios(int num_clients, const std::vector<double>& ratios,
                               std::uint64_t seed) {
    std::vector<int> sizes = edge_sizes_from_ratios(num_clients, ratios);
    std::vector<int> ids(num_clients);
    std::iota(ids.begin(), ids.end(), 0);
    Rng rng(mix_seed(seed, 0x03));
    rng.shuffle(ids);

    Topology topo;
    topo.num_edges = static_cast<int>(sizes.size());
    topo.clients_per_edge.resize(sizes.size());
    topo.edge_of_client.assign(num_clients, 0);
    int pos = 0;
    for (std::size_t e = 0; e < sizes.size(); ++e) {
        topo.clients_per_edge[e].assign(ids.begin() + pos, ids.begin() + pos + sizes[e]);
        std::sort(topo.clients_per_edge[e].begin(), topo.clients_per_edge[e].end());
        for (int id : topo.clients_per_edge[e]) {
            topo.edge_of_client[id] = static_cast<int>(e);
        }
        pos += sizes[e];
    }
    return topo;
}

Topology build_topology(const std::string& preset, std::uint64_t seed) {
    if (preset == "IMB_E5C50") {
        return build_topology_ratios(50, {0.4, 0.2, 0.2, 0.1, 0.1}, seed);
    }
    if (preset.size() >= 4 && preset[0] == 'E') {
        std::size_t c_pos = preset.find('C', 1);
        if (c_pos != std::string::npos && c_pos > 1 && c_pos + 1 < preset.size()) {
            int edges = 0, clients = 0;
            try {
                edges = std::stoi(preset.substr(1, c_pos - 1));
                clients = std::stoi(preset.substr(c_pos + 1));
            } catch (const std::exception&) {
                throw std::invalid_argument("unknown topology preset: " + preset);
            }
            if (edges < 1 || clients < edges) {
                throw std::invalid_argument("topology " + preset +
                                            " needs at least one client per edge");
            }
            std::vector<double> ratios(edges, 1.0 / edges);
            return build_topology_ratios(clients, ratios, seed);
        }
    }
    throw std::invalid_argument("unknown topology preset: " + preset);
}

}  // namespace hfedsn
