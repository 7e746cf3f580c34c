#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>
#include <starfish/strategies/op_counter.hpp>
#include <starfish/strategies/pcn_state.hpp>

namespace starfish {
    enum class strategy_kind { ln, close_open, loop, revive, shaduf_hl, shaduf_ao, shaduf_ab, starfish };

    std::string_view to_string(strategy_kind k);
    strategy_kind parse_strategy(std::string_view name);
    const std::array<strategy_kind, 8> &all_strategies();

    // One of a node's channels, seen from that node.
    struct local_channel {
        channel_index channel = 0;
        node_index neighbor = 0;
        amount_t balance = 0;
    };

    // Two channels of the same node whose node-side balances may be shifted between each other.
    struct binding {
        channel_index first = 0;
        channel_index second = 0;
    };

    struct setup_action {
        enum class type { merge, bind } kind = type::merge;
        std::vector<channel_index> channels {};
        std::uint64_t ops = 0;
    };

    struct setup_plan {
        std::vector<setup_action> actions {};
        std::vector<binding> bindings {};
        std::uint64_t ops = 0;
    };

    // Ordering used for binding choices: node balance descending, then neighbor ascending.
    setup_plan plan_setup(strategy_kind kind, std::span<const local_channel> adjacent);

    // Largest single payment the node can push into one of its channels after setup.
    amount_t capacity_bound(strategy_kind kind, std::span<const local_channel> adjacent, std::span<const binding> bindings);

    // How much an off-chain shift moves: just the shortfall, or enough to lift the target to the
    // mean balance of the channels taking part (never less than the shortfall).
    enum class refill_policy { shortfall, equalize };

    struct strategy_params {
        std::size_t max_cycle = 6;
        std::uint64_t lock_rounds = 10;
        refill_policy refill = refill_policy::shortfall;
        // Revive cycle members refuse shifts that leave their outgoing side below their incoming side
        bool revive_willing = true;
    };

    struct rebalance_plan {
        std::vector<balance_shift> shifts {};
        node_index reserve_node = 0;
        amount_t reserve_draw = 0;
        std::optional<channel_index> lock {};
        std::uint64_t onchain_ops = 0;
        std::string op_kind {};
    };

    // Setup applied to every node of a network, plus the binding lookup the planners need.
    class strategy_setup {
    public:
        // `enabled` lists the nodes that run the strategy; empty means every node.
        strategy_setup(strategy_kind kind, const pcn_state &state, strategy_params params = {},
            const std::vector<node_index> &enabled = {});

        strategy_kind kind() const noexcept { return _kind; }
        const strategy_params &params() const noexcept { return _params; }
        const setup_plan &plan(node_index n) const { return _plans.at(n); }
        bool enabled(node_index n) const { return _enabled.at(n); }
        std::uint64_t setup_ops() const noexcept { return _setup_ops; }
        // Channels bound to `channel` at node `n`.
        std::span<const channel_index> partners(const pcn_state &state, node_index n, channel_index channel) const;
        void record_setup(op_counter &ops) const;
    private:
        strategy_kind _kind;
        strategy_params _params;
        std::vector<setup_plan> _plans {};
        std::vector<bool> _enabled {};
        std::vector<std::vector<channel_index>> _partners {};
        std::uint64_t _setup_ops = 0;
    };

    std::vector<local_channel> local_view(const pcn_state &state, node_index n);

    // Plans how `node` gets `need` more coins on its side of `target`. Pure; nullopt when infeasible.
    std::optional<rebalance_plan> plan_rebalance(const strategy_setup &setup, const pcn_state &state,
        node_index node, channel_index target, amount_t need);

    // Upper bound on what `node` could hold in `channel` after one rebalance; exact for every kind
    // except Revive, whose cycle hops are only checked by plan_rebalance.
    amount_t reachable_balance(const strategy_setup &setup, const pcn_state &state, node_index node, channel_index channel);

    void apply_plan(pcn_state &state, const rebalance_plan &plan, std::uint64_t lock_rounds);
}
