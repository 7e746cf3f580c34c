#include <starfish/core/ledger.hpp>

namespace starfish {
    std::string_view to_string(const ledger_result r)
    {
        switch (r) {
            case ledger_result::ok: return "ok";
            case ledger_result::invalid_amount: return "invalid-amount";
            case ledger_result::insufficient_funds: return "insufficient-funds";
        }
        return "unknown";
    }

    ledger::ledger(balance_map initial): _balances { std::move(initial) }
    {
        for (const auto &[p, v]: _balances)
            if (v < 0)
                throw error("negative initial ledger balance for " + p.str());
    }

    ledger_result ledger::add(const party_id &party, const amount_t amount)
    {
        if (amount < 0)
            return ledger_result::invalid_amount;
        _balances[party] += amount;
        return ledger_result::ok;
    }

    ledger_result ledger::remove(const party_id &party, const amount_t amount)
    {
        if (amount < 0)
            return ledger_result::invalid_amount;
        const auto it = _balances.find(party);
        const amount_t have = it == _balances.end() ? 0 : it->second;
        if (have < amount)
            return ledger_result::insufficient_funds;
        if (it != _balances.end())
            it->second -= amount;
        return ledger_result::ok;
    }

    amount_t ledger::balance(const party_id &party) const
    {
        const auto it = _balances.find(party);
        return it == _balances.end() ? 0 : it->second;
    }

    amount_t ledger::total() const
    {
        amount_t sum = 0;
        for (const auto &[_, v]: _balances)
            sum += v;
        return sum;
    }
}
