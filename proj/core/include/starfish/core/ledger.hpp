#pragma once

#include <starfish/core/types.hpp>

namespace starfish {
    enum class ledger_result { ok, invalid_amount, insufficient_funds };

    std::string_view to_string(ledger_result r);

    // The global coin ledger. Only contracts move coins in or out of it; a remove that
    // would overdraw is ignored and reported instead of applied.
    class ledger {
    public:
        ledger() = default;
        explicit ledger(balance_map initial);

        ledger_result add(const party_id &party, amount_t amount);
        ledger_result remove(const party_id &party, amount_t amount);

        amount_t balance(const party_id &party) const;
        amount_t total() const;
        const balance_map &balances() const noexcept { return _balances; }

        bool operator==(const ledger &) const = default;
    private:
        balance_map _balances {};
    };
}
