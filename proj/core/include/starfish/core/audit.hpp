#pragma once

#include <starfish/core/ledger.hpp>
#include <starfish/core/types.hpp>

namespace starfish {
    using channel_map = std::map<channel_id, channel>;
    using merge_map = std::map<merge_id, merge>;

    // Where every coin currently sits: the ledger, channel escrows, or merge edges.
    struct census {
        amount_t ledger = 0;
        amount_t channels = 0;
        amount_t edges = 0;

        amount_t total() const noexcept { return ledger + channels + edges; }
    };

    census take_census(const ledger &l, const channel_map &channels, const merge_map &merges);
    amount_t total_coins(const ledger &l, const channel_map &channels, const merge_map &merges);

    // Human-readable descriptions of every negative balance, capacity or edge balance.
    std::vector<std::string> negative_entries(const ledger &l, const channel_map &channels, const merge_map &merges);
}
