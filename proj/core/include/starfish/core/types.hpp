#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace starfish {
    // Coin amounts are integer base units (satoshi-like); conservation checks are exact.
    using amount_t = std::int64_t;
    using round_t = std::uint64_t;
    using version_t = std::uint64_t;

    struct error: std::runtime_error {
        using std::runtime_error::runtime_error;
    };

    template<typename Tag>
    struct tagged_id {
        std::string value {};

        tagged_id() = default;
        explicit tagged_id(std::string v): value { std::move(v) } {}
        explicit tagged_id(const char *v): value { v } {}

        const std::string &str() const noexcept { return value; }
        bool empty() const noexcept { return value.empty(); }

        auto operator<=>(const tagged_id &) const = default;
        bool operator==(const tagged_id &) const = default;
    };

    struct party_tag {};
    struct channel_tag {};
    struct merge_tag {};

    // Ordered lexicographically on the identifier; used for every deterministic tie-break.
    using party_id = tagged_id<party_tag>;
    using channel_id = tagged_id<channel_tag>;
    using merge_id = tagged_id<merge_tag>;

    enum class channel_status { proposed, open, closing, closed };
    enum class merge_status { proposed, active, closed };

    std::string_view to_string(channel_status s);
    std::string_view to_string(merge_status s);

    using balance_map = std::map<party_id, amount_t>;

    // A zero-sum shift of `amount` from one party (or edge) to another. Used for channel
    // payments and edge payments; the negated side is implied, so the sum is zero by construction.
    struct transfer {
        party_id from;
        party_id to;
        amount_t amount = 0;

        amount_t delta(const party_id &p) const
        {
            if (p == from && p == to)
                return 0;
            if (p == from)
                return -amount;
            if (p == to)
                return amount;
            return 0;
        }
    };

    using channel_payment = transfer;
    using edge_payment = transfer;

    // Capacity reallocation between the edges of two end users of the same merge.
    struct merge_update {
        party_id from_edge;
        party_id to_edge;
        amount_t amount = 0;

        amount_t delta(const party_id &edge_user) const
        {
            if (edge_user == from_edge)
                return -amount;
            if (edge_user == to_edge)
                return amount;
            return 0;
        }
    };

    struct channel {
        channel_id id;
        party_id a;
        party_id b;
        balance_map balance;
        version_t version = 0;
        // number of on-chain balance adjustments (merge debits, close-merge credits) applied so far
        std::uint64_t epoch = 0;
        std::set<merge_id> merges;
        channel_status status = channel_status::proposed;
        round_t locked_until = 0;

        bool has_user(const party_id &p) const noexcept { return p == a || p == b; }
        const party_id &other(const party_id &p) const;
        amount_t balance_of(const party_id &p) const;
        amount_t total() const;
    };

    struct edge {
        channel_id channel;
        party_id hub;
        party_id user;
        amount_t capacity = 0;
        amount_t hub_balance = 0;
        amount_t user_balance = 0;
        version_t version = 0;

        bool has_user(const party_id &p) const noexcept { return p == hub || p == user; }
        amount_t balance_of(const party_id &p) const;
        bool consistent() const noexcept
        {
            return hub_balance >= 0 && user_balance >= 0 && hub_balance + user_balance == capacity;
        }
    };

    struct merge {
        merge_id id;
        party_id hub;
        std::set<party_id> users;
        std::vector<edge> edges;
        version_t version = 0;
        merge_status status = merge_status::proposed;

        const edge *find_edge(const party_id &user) const;
        edge *find_edge(const party_id &user);
        amount_t pooled_capacity() const;
        std::map<party_id, amount_t> capacities() const;
    };

    // Applies a channel payment to a two-party balance map. Returns nothing when the payment
    // names a non-user, has a negative amount, or would drive a balance below zero.
    std::optional<balance_map> apply_payment(const balance_map &balances, const transfer &t);
}
