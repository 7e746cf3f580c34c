#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>
#include <json.hpp>
#include <starfish/sim/topology.hpp>
#include <starfish/sim/workload.hpp>
#include <starfish/strategies/strategy.hpp>

namespace starfish {
    enum class audit_level { touched, full };
    enum class strategy_nodes { all, top_decile };

    struct experiment_config {
        std::optional<std::filesystem::path> topology_csv {};
        synthesis_spec synthesis {};
        std::size_t payments = 50000;
        value_distribution values = value_preset("small");
        std::vector<strategy_kind> strategies { all_strategies().begin(), all_strategies().end() };
        std::vector<amount_t> capacity_multipliers { 1, 5, 25 };
        std::vector<double> skewness { 8.0 };
        skew_side skew = skew_side::both;
        std::vector<std::uint64_t> seeds { 1, 2, 3, 4, 5, 6, 7, 8, 9, 10 };
        std::uint64_t delta = 10;
        std::size_t max_cycle = 6;
        refill_policy refill = refill_policy::equalize;
        bool revive_willing = false;
        strategy_nodes enabled = strategy_nodes::all;
        audit_level audit = audit_level::touched;
    };

    // Missing keys keep their defaults; errors name the offending JSON path.
    experiment_config parse_experiment_config(const nlohmann::json &j, const std::filesystem::path &base_dir = {});
    experiment_config load_experiment_config(const std::filesystem::path &path);
    nlohmann::ordered_json to_json(const experiment_config &c);

    topology load_topology(const experiment_config &c);
}
