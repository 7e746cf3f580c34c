#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>
#include <starfish/core/types.hpp>

namespace starfish {
    using node_index = std::uint32_t;
    using channel_index = std::uint32_t;

    struct pcn_channel {
        node_index a = 0;
        node_index b = 0;
        amount_t bal_a = 0;
        amount_t bal_b = 0;
        amount_t init_a = 0;
        amount_t init_b = 0;
        // payments are routed through the channel again only once the clock reaches this value
        std::uint64_t locked_until = 0;

        amount_t total() const noexcept { return bal_a + bal_b; }
        node_index other(node_index n) const noexcept { return n == a ? b : a; }
    };

    struct adjacency {
        node_index neighbor = 0;
        channel_index channel = 0;
    };

    // One node's side of one channel moving by `delta`.
    struct balance_shift {
        channel_index channel = 0;
        node_index node = 0;
        amount_t delta = 0;
    };

    // The simulator's view of a payment channel network. Node indices follow the lexicographic
    // order of node names, and every adjacency list is sorted by neighbor, so index order is the
    // tie-break order everywhere. Each node's side of a channel is a single balance; for a merged
    // hub that balance is its hub-side edge balance.
    class pcn_state {
    public:
        struct channel_spec {
            std::string a;
            std::string b;
            amount_t bal_a = 0;
            amount_t bal_b = 0;
        };

        pcn_state() = default;
        pcn_state(std::vector<std::string> names, const std::vector<channel_spec> &channels, amount_t reserve_per_unit_funding = 1);

        std::size_t node_count() const noexcept { return _names.size(); }
        std::size_t channel_count() const noexcept { return _channels.size(); }
        const std::string &name(node_index n) const { return _names.at(n); }
        node_index index_of(std::string_view name) const;
        std::span<const adjacency> neighbors(node_index n) const
        {
            return { _adj.data() + _adj_start[n], _adj.data() + _adj_start[n + 1] };
        }
        const pcn_channel &channel(channel_index c) const { return _channels[c]; }
        const std::vector<pcn_channel> &channels() const noexcept { return _channels; }
        amount_t balance(channel_index c, node_index n) const
        {
            const auto &ch = _channels[c];
            return n == ch.a ? ch.bal_a : ch.bal_b;
        }
        amount_t reserve(node_index n) const { return _reserve[n]; }
        std::optional<channel_index> find_channel(node_index x, node_index y) const;

        std::uint64_t clock() const noexcept { return _clock; }
        void advance_clock() noexcept { ++_clock; }
        bool locked(channel_index c) const noexcept { return _channels[c].locked_until > _clock; }

        // Mutations; every one is journaled so a transaction can be rolled back exactly.
        void shift(const balance_shift &s);
        void draw_reserve(node_index n, amount_t amount);
        void lock(channel_index c, std::uint64_t until);
        void begin();
        void commit();
        void rollback();
        bool in_transaction() const noexcept { return _journaling; }
        // Within a transaction: empty when the touched balances and reserves changed by a net zero
        // and none of them is negative, otherwise a description of the first problem.
        std::string audit_transaction() const;

        amount_t total_coins() const;
        // First negative balance or reserve found, described; empty when none.
        std::string find_negative() const;
        bool operator==(const pcn_state &o) const;
    private:
        struct undo {
            enum class what : std::uint8_t { balance, reserve, lock } kind;
            std::uint32_t index;
            node_index node;
            std::int64_t old_value;
        };

        std::vector<std::string> _names {};
        std::vector<pcn_channel> _channels {};
        std::vector<adjacency> _adj {};
        std::vector<std::size_t> _adj_start {};
        std::vector<amount_t> _reserve {};
        std::uint64_t _clock = 0;
        std::vector<undo> _journal {};
        bool _journaling = false;
    };
}
