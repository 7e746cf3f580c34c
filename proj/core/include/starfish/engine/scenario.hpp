#pragma once

#include <filesystem>
#include <json.hpp>
#include <starfish/engine/world.hpp>

namespace starfish {
    // A scripted environment: funding, corrupt parties and a schedule of (round, party, command).
    struct scenario {
        std::string name {};
        round_t delta = 10;
        std::uint64_t seed = 0;
        balance_map funding {};
        std::map<party_id, behavior> adversary {};
        std::vector<scheduled_command> schedule {};
        // run exactly this many rounds; otherwise run until nothing is in flight
        std::optional<round_t> rounds {};
    };

    scenario parse_scenario(const nlohmann::json &j);
    // Parses scenario text; syntax errors report the line and column.
    scenario parse_scenario_text(std::string_view text);
    scenario load_scenario(const std::filesystem::path &path);

    std::unique_ptr<world> build_world(const scenario &s, bool log_messages = true);
    std::unique_ptr<world> run_scenario(const scenario &s, bool log_messages = true);

    // Ledger, channels, merges, party outputs and auditor results; key order is fixed.
    nlohmann::ordered_json final_state(const world &w);
}
