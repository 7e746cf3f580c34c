#pragma once

#include <optional>
#include <vector>
#include <starfish/strategies/op_counter.hpp>
#include <starfish/strategies/strategy.hpp>

namespace starfish {
    struct hop {
        node_index from = 0;
        node_index to = 0;
        channel_index channel = 0;
    };

    using route = std::vector<hop>;

    enum class hop_rule {
        // any unlocked channel
        topology,
        // forwarding balance >= amount
        balance,
        // forwarding balance >= amount after at most one rebalance by the forwarding node
        reachable,
    };

    // Breadth-first search with reusable scratch space. Neighbors are visited in index order, so
    // the returned path is the lexicographically smallest among the shortest ones. Locked channels
    // are never used.
    class router {
    public:
        std::optional<route> find(const pcn_state &state, node_index sender, node_index receiver,
            amount_t amount, hop_rule rule, const strategy_setup *setup = nullptr);
    private:
        std::vector<std::uint32_t> _stamp {};
        std::vector<node_index> _parent {};
        std::vector<channel_index> _via {};
        std::vector<node_index> _queue {};
        std::uint32_t _epoch = 0;
    };

    std::optional<route> route_payment(const pcn_state &state, node_index sender, node_index receiver, amount_t amount);

    struct payment_outcome {
        bool success = false;
        // first hop still short after rebalancing, on failure
        std::optional<std::size_t> failed_hop {};
        std::size_t rebalances = 0;
        std::uint64_t onchain_ops = 0;
        // conservation or non-negativity problem found in the committed transaction; empty when clean
        std::string violation {};
    };

    // Atomic: either every hop moves `amount` forward, or the state is left exactly as it was.
    // Short hops ask their forwarding node's strategy for a rebalance first (when `setup` is set).
    payment_outcome execute_payment(pcn_state &state, const strategy_setup *setup, const route &path,
        amount_t amount, op_counter *ops = nullptr);
}
