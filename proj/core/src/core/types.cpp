#include <numeric>
#include <starfish/core/types.hpp>

namespace starfish {
    std::string_view to_string(const channel_status s)
    {
        switch (s) {
            case channel_status::proposed: return "proposed";
            case channel_status::open: return "open";
            case channel_status::closing: return "closing";
            case channel_status::closed: return "closed";
        }
        return "unknown";
    }

    std::string_view to_string(const merge_status s)
    {
        switch (s) {
            case merge_status::proposed: return "proposed";
            case merge_status::active: return "active";
            case merge_status::closed: return "closed";
        }
        return "unknown";
    }

    const party_id &channel::other(const party_id &p) const
    {
        if (p == a)
            return b;
        if (p == b)
            return a;
        throw error("party " + p.str() + " is not a user of channel " + id.str());
    }

    amount_t channel::balance_of(const party_id &p) const
    {
        const auto it = balance.find(p);
        return it == balance.end() ? 0 : it->second;
    }

    amount_t channel::total() const
    {
        return std::accumulate(balance.begin(), balance.end(), amount_t { 0 },
            [](amount_t acc, const auto &kv) { return acc + kv.second; });
    }

    amount_t edge::balance_of(const party_id &p) const
    {
        if (p == hub)
            return hub_balance;
        if (p == user)
            return user_balance;
        return 0;
    }

    const edge *merge::find_edge(const party_id &user) const
    {
        for (const auto &e: edges)
            if (e.user == user)
                return &e;
        return nullptr;
    }

    edge *merge::find_edge(const party_id &user)
    {
        for (auto &e: edges)
            if (e.user == user)
                return &e;
        return nullptr;
    }

    amount_t merge::pooled_capacity() const
    {
        amount_t sum = 0;
        for (const auto &e: edges)
            sum += e.capacity;
        return sum;
    }

    std::map<party_id, amount_t> merge::capacities() const
    {
        std::map<party_id, amount_t> caps;
        for (const auto &e: edges)
            caps.emplace(e.user, e.capacity);
        return caps;
    }

    std::optional<balance_map> apply_payment(const balance_map &balances, const transfer &t)
    {
        if (t.amount < 0 || !balances.contains(t.from) || !balances.contains(t.to))
            return std::nullopt;
        balance_map next = balances;
        for (auto &[p, v]: next) {
            v += t.delta(p);
            if (v < 0)
                return std::nullopt;
        }
        return next;
    }
}
