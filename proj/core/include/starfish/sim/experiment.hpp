#pragma once

#include <functional>
#include <ostream>
#include <string>
#include <vector>
#include <starfish/sim/config.hpp>
#include <starfish/sim/routing.hpp>

namespace starfish {
    struct cell {
        strategy_kind strategy = strategy_kind::ln;
        amount_t capacity_mult = 1;
        double skewness = 1.0;
        std::uint64_t seed = 1;
    };

    struct run_metrics {
        std::uint64_t attempted = 0;
        std::uint64_t succeeded = 0;
        std::uint64_t failed = 0;
        std::uint64_t rebalanced_payments = 0;
        double success_ratio = 0.0;
        op_counter ops {};
        std::uint64_t locked_rounds = 0;
        std::uint64_t audits = 0;
        std::vector<std::string> violations {};
    };

    struct cell_result {
        cell key {};
        run_metrics metrics {};
        // set when the cell could not run; the other cells still do
        std::string error {};
    };

    // Strategy-major order: strategy, multiplier, skewness, seed.
    std::vector<cell> enumerate_cells(const experiment_config &c);

    // Fresh network, setup on every node, then the workload replayed one payment per round.
    run_metrics run_cell(const topology &t, const experiment_config &c, const cell &k);

    using progress_fn = std::function<void(const cell_result &, std::size_t done, std::size_t total)>;

    // Cells run on `jobs` threads; results come back in enumeration order regardless.
    std::vector<cell_result> run_experiment(const experiment_config &c, const topology &t, std::size_t jobs = 1,
        const progress_fn &progress = {});

    struct cell_summary {
        strategy_kind strategy = strategy_kind::ln;
        amount_t capacity_mult = 1;
        double skewness = 1.0;
        std::size_t runs = 0;
        double mean_success_ratio = 0.0;
        double mean_onchain_ops = 0.0;
    };

    std::vector<cell_summary> summarize(const std::vector<cell_result> &results);
    const cell_summary *find_summary(const std::vector<cell_summary> &s, strategy_kind k, amount_t mult, double skew);

    std::string format_number(double v, int decimals = 6);
    void write_results_csv(std::ostream &out, const std::vector<cell_result> &results);
    // Long format for plotting: one row per (strategy, multiplier, skewness) mean.
    void write_summary_csv(std::ostream &out, const std::vector<cell_summary> &summary);
}
