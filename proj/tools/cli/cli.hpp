#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace starfish::cli {
    enum exit_code : int { ok = 0, invariant_violation = 1, config_error = 2 };

    struct cli_config {
        std::string subcommand {};
        std::filesystem::path config {};
        std::optional<std::filesystem::path> out {};
        std::optional<std::uint64_t> seed {};
        std::size_t jobs = 1;
        bool force = false;
        bool verbose = false;
        std::size_t max_n = 16;
    };

    int cmd_trace(const cli_config &c, std::ostream &out, std::ostream &err);
    int cmd_opcount(const cli_config &c, std::ostream &out, std::ostream &err);
    int cmd_sweep(const cli_config &c, std::ostream &out, std::ostream &err);

    // Table of setup operation counts for N = 2..max_n, computed from the setup planner.
    std::string opcount_csv(std::size_t max_n);

    int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err);
}
