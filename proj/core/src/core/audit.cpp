#include <starfish/core/audit.hpp>

namespace starfish {
    census take_census(const ledger &l, const channel_map &channels, const merge_map &merges)
    {
        census c;
        c.ledger = l.total();
        for (const auto &[_, ch]: channels)
            c.channels += ch.total();
        for (const auto &[_, m]: merges)
            c.edges += m.pooled_capacity();
        return c;
    }

    amount_t total_coins(const ledger &l, const channel_map &channels, const merge_map &merges)
    {
        return take_census(l, channels, merges).total();
    }

    std::vector<std::string> negative_entries(const ledger &l, const channel_map &channels, const merge_map &merges)
    {
        std::vector<std::string> out;
        for (const auto &[p, v]: l.balances())
            if (v < 0)
                out.push_back("ledger balance of " + p.str() + " is " + std::to_string(v));
        for (const auto &[id, ch]: channels)
            for (const auto &[p, v]: ch.balance)
                if (v < 0)
                    out.push_back("channel " + id.str() + " balance of " + p.str() + " is " + std::to_string(v));
        for (const auto &[id, m]: merges) {
            for (const auto &e: m.edges) {
                if (e.capacity < 0)
                    out.push_back("merge " + id.str() + " edge " + e.user.str() + " capacity is " + std::to_string(e.capacity));
                if (e.hub_balance < 0 || e.user_balance < 0)
                    out.push_back("merge " + id.str() + " edge " + e.user.str() + " has a negative balance");
            }
        }
        return out;
    }
}
