#include <algorithm>
#include <starfish/sim/routing.hpp>

namespace starfish {
    std::optional<route> router::find(const pcn_state &state, const node_index sender, const node_index receiver,
        const amount_t amount, const hop_rule rule, const strategy_setup *setup)
    {
        if (rule == hop_rule::reachable && !setup)
            throw error("reachable routing needs a strategy setup");
        const auto n = state.node_count();
        if (sender >= n || receiver >= n)
            throw error("route endpoints outside the network");
        if (sender == receiver)
            return route {};
        if (_stamp.size() != n) {
            _stamp.assign(n, 0);
            _parent.assign(n, 0);
            _via.assign(n, 0);
            _epoch = 0;
        }
        if (++_epoch == 0) {
            std::fill(_stamp.begin(), _stamp.end(), 0);
            _epoch = 1;
        }
        _queue.clear();
        _queue.push_back(sender);
        _stamp[sender] = _epoch;
        for (std::size_t head = 0; head < _queue.size(); ++head) {
            const auto x = _queue[head];
            for (const auto &adj: state.neighbors(x)) {
                if (_stamp[adj.neighbor] == _epoch || state.locked(adj.channel))
                    continue;
                if (rule != hop_rule::topology && state.balance(adj.channel, x) < amount
                    && (rule == hop_rule::balance || reachable_balance(*setup, state, x, adj.channel) < amount))
                    continue;
                _stamp[adj.neighbor] = _epoch;
                _parent[adj.neighbor] = x;
                _via[adj.neighbor] = adj.channel;
                if (adj.neighbor == receiver) {
                    route path;
                    for (auto y = receiver; y != sender; y = _parent[y])
                        path.push_back({ _parent[y], y, _via[y] });
                    std::reverse(path.begin(), path.end());
                    return path;
                }
                _queue.push_back(adj.neighbor);
            }
        }
        return std::nullopt;
    }

    std::optional<route> route_payment(const pcn_state &state, const node_index sender, const node_index receiver, const amount_t amount)
    {
        router r;
        return r.find(state, sender, receiver, amount, hop_rule::balance);
    }

    payment_outcome execute_payment(pcn_state &state, const strategy_setup *setup, const route &path,
        const amount_t amount, op_counter *ops)
    {
        if (amount <= 0)
            throw error("payment amount must be positive");
        payment_outcome out;
        std::vector<rebalance_plan> applied;
        state.begin();
        for (std::size_t i = 0; i < path.size(); ++i) {
            const auto &h = path[i];
            const auto have = state.balance(h.channel, h.from);
            if (have >= amount)
                continue;
            if (!setup)
                break;
            auto plan = plan_rebalance(*setup, state, h.from, h.channel, amount - have);
            if (!plan)
                break;
            apply_plan(state, *plan, setup->params().lock_rounds);
            applied.push_back(std::move(*plan));
        }
        // a later rebalance may have drained an earlier hop, so every hop is checked again
        for (std::size_t i = 0; i < path.size(); ++i) {
            if (state.balance(path[i].channel, path[i].from) < amount) {
                out.failed_hop = i;
                break;
            }
        }
        if (out.failed_hop) {
            state.rollback();
            return out;
        }
        for (const auto &h: path) {
            state.shift({ h.channel, h.from, -amount });
            state.shift({ h.channel, h.to, amount });
        }
        out.violation = state.audit_transaction();
        state.commit();
        out.success = true;
        out.rebalances = applied.size();
        for (const auto &p: applied) {
            out.onchain_ops += p.onchain_ops;
            if (ops && p.onchain_ops > 0)
                ops->record(p.reserve_node, p.op_kind, p.onchain_ops);
        }
        return out;
    }
}
