#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace hfedsn {

// Cloud -> edges -> clients tree. Client ids partition across edges.
struct Topology {
    int num_edges = 0;
    std::vector<std::vector<int>> clients_per_edge;  // edge -> sorted client ids
    std::vector<int> edge_of_client;                 // client -> edge

    int num_clients() const { return static_cast<int>(edge_of_client.size()); }
};

// Largest-remainder apportionment of N clients over the given ratios
// (which must sum to 1 within 1e-9); remainder ties go to lower edge index.
std::vector<int> edge_sizes_from_ratios(int num_clients, const std::vector<double>& ratios);

Topology build_topology_ratios(int num_clients, const std::vector<double>& ratios,
                               std::uint64_t seed);

// Presets: "IMB_E5C50" (ratios 0.4/0.2/0.2/0.1/0.1) or any "E<k>C<n>"
// (equal split, remainder to earlier edges). Throws std::invalid_argument
// for unknown names or N < E.
Topology build_topology(const std::string& preset, std::uint64_t seed);

}  // namespace hfedsn
