#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <string>
#include <vector>
#include <starfish/strategies/pcn_state.hpp>

namespace starfish {
    struct topology_edge {
        std::string a;
        std::string b;
        amount_t capacity = 0;
    };

    // Simple undirected graph; node names are unique, capacities positive.
    struct topology {
        std::vector<std::string> nodes {};
        std::vector<topology_edge> channels {};
    };

    // Header `nodeA,nodeB,capacity`, one channel per line. Errors carry `<source>:<line>`.
    topology parse_topology_csv(std::istream &in, const std::string &source = "<csv>");
    topology load_topology_csv(const std::filesystem::path &path);

    struct synthesis_spec {
        std::string model = "scale-free";
        std::size_t nodes = 200;
        std::size_t attach = 2;
        std::uint64_t seed = 7;
        amount_t capacity_min = 40;
        amount_t capacity_max = 40;
    };

    // Preferential attachment: a clique of attach+1 nodes, then every new node links to `attach`
    // distinct existing nodes chosen with probability proportional to degree.
    topology synthesize_topology(const synthesis_spec &spec);

    void validate_topology(const topology &t);

    // Every channel's capacity times `multiplier`, split evenly (the odd unit goes to side b).
    pcn_state build_network(const topology &t, amount_t multiplier);
}
