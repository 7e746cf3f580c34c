#include <algorithm>
#include <limits>
#include <numeric>
#include <starfish/strategies/strategy.hpp>

namespace starfish {
    namespace {
        constexpr std::array<std::pair<strategy_kind, std::string_view>, 8> names { {
            { strategy_kind::ln, "LN" },
            { strategy_kind::close_open, "CloseOpen" },
            { strategy_kind::loop, "Loop" },
            { strategy_kind::revive, "Revive" },
            { strategy_kind::shaduf_hl, "ShadufHL" },
            { strategy_kind::shaduf_ao, "ShadufAO" },
            { strategy_kind::shaduf_ab, "ShadufAB" },
            { strategy_kind::starfish, "Starfish" },
        } };

        bool richer(const local_channel &x, const local_channel &y)
        {
            if (x.balance != y.balance)
                return x.balance > y.balance;
            return std::tie(x.neighbor, x.channel) < std::tie(y.neighbor, y.channel);
        }

        std::size_t side_index(const pcn_state &state, const node_index n, const channel_index c)
        {
            return 2 * static_cast<std::size_t>(c) + (state.channel(c).b == n ? 1 : 0);
        }

        void add_binding(setup_plan &plan, const channel_index x, const channel_index y)
        {
            plan.bindings.push_back({ x, y });
            plan.actions.push_back({ setup_action::type::bind, { x, y }, 2 });
            plan.ops += 2;
        }

        std::optional<rebalance_plan> plan_shift(const pcn_state &state, const node_index node, const channel_index target,
            amount_t need, std::span<const channel_index> donors, const bool single_donor, const refill_policy refill)
        {
            std::vector<local_channel> candidates;
            candidates.reserve(donors.size());
            for (const auto c: donors) {
                const auto bal = state.balance(c, node);
                if (c != target && bal > 0)
                    candidates.push_back({ c, state.channel(c).other(node), bal });
            }
            std::sort(candidates.begin(), candidates.end(), richer);
            const auto shortfall = need;
            if (refill == refill_policy::equalize && !candidates.empty()) {
                const auto have = state.balance(target, node);
                const auto count = single_donor ? std::size_t { 1 } : candidates.size();
                amount_t donated = 0;
                for (std::size_t i = 0; i < count; ++i)
                    donated += candidates[i].balance;
                const auto mean = (have + donated) / static_cast<amount_t>(count + 1);
                need = std::max(shortfall, std::min(mean - have, donated));
            }
            rebalance_plan plan;
            amount_t missing = need;
            for (const auto &d: candidates) {
                if (missing == 0)
                    break;
                if (single_donor && d.balance < shortfall)
                    return std::nullopt;
                const auto take = std::min(missing, d.balance);
                plan.shifts.push_back({ d.channel, node, -take });
                missing -= take;
                if (single_donor)
                    break;
            }
            if (missing > 0)
                return std::nullopt;
            plan.shifts.push_back({ target, node, need });
            return plan;
        }

        std::optional<rebalance_plan> plan_top_up(const strategy_setup &setup, const pcn_state &state, const node_index node,
            const channel_index target, const amount_t need)
        {
            const auto &ch = state.channel(target);
            const auto initial = node == ch.a ? ch.init_a : ch.init_b;
            const auto current = state.balance(target, node);
            const auto amount = initial - current;
            if (amount < need || state.reserve(node) < amount)
                return std::nullopt;
            rebalance_plan plan;
            plan.shifts.push_back({ target, node, amount });
            plan.reserve_node = node;
            plan.reserve_draw = amount;
            plan.lock = target;
            if (setup.kind() == strategy_kind::close_open) {
                plan.onchain_ops = 2;
                plan.op_kind = "close-open";
            } else {
                plan.onchain_ops = 1;
                plan.op_kind = "loop-in";
            }
            return plan;
        }

        // Shortest cycle node -> u -> ... -> w -> node through `target` = (node, w) and a source
        // channel (node, u) whose node side covers the need. Cycle paths avoid `node` and locked channels.
        std::optional<rebalance_plan> plan_cycle(const strategy_setup &setup, const pcn_state &state, const node_index node,
            const channel_index target, const amount_t need)
        {
            const auto w = state.channel(target).other(node);
            const auto max_cycle = setup.params().max_cycle;
            if (max_cycle < 3)
                return std::nullopt;
            const auto max_depth = static_cast<std::uint32_t>(max_cycle - 2);
            constexpr auto unseen = std::numeric_limits<std::uint32_t>::max();

            thread_local std::vector<std::uint32_t> dist;
            thread_local std::vector<node_index> queue;
            dist.assign(state.node_count(), unseen);
            queue.clear();

            std::vector<bool> is_source(state.node_count(), false);
            bool any_source = false;
            for (const auto &adj: state.neighbors(node)) {
                if (adj.channel == target || adj.neighbor == w || state.locked(adj.channel))
                    continue;
                if (state.balance(adj.channel, node) >= need) {
                    is_source[adj.neighbor] = true;
                    any_source = true;
                }
            }
            if (!any_source || state.locked(target))
                return std::nullopt;

            dist[w] = 0;
            queue.push_back(w);
            std::uint32_t found_depth = unseen;
            for (std::size_t head = 0; head < queue.size(); ++head) {
                const auto x = queue[head];
                if (dist[x] >= found_depth || dist[x] >= max_depth)
                    break;
                for (const auto &adj: state.neighbors(x)) {
                    if (adj.neighbor == node || dist[adj.neighbor] != unseen || state.locked(adj.channel))
                        continue;
                    dist[adj.neighbor] = dist[x] + 1;
                    queue.push_back(adj.neighbor);
                    if (is_source[adj.neighbor])
                        found_depth = std::min(found_depth, dist[adj.neighbor]);
                }
            }
            if (found_depth == unseen)
                return std::nullopt;

            // Lexicographically smallest cycle: smallest source neighbor, then smallest next hop at each step.
            node_index u = 0;
            for (const auto &adj: state.neighbors(node)) {
                if (is_source[adj.neighbor] && dist[adj.neighbor] == found_depth) {
                    u = adj.neighbor;
                    break;
                }
            }
            rebalance_plan plan;
            const auto source = *state.find_channel(node, u);
            plan.shifts.push_back({ source, node, -need });
            plan.shifts.push_back({ source, u, need });
            // A cycle member forwards only while its outgoing side stays at least its incoming side,
            // so the shift never unbalances a participant's own pair of channels.
            const auto willing = [&](const node_index x, const channel_index in, const channel_index out) {
                const auto have = state.balance(out, x);
                if (have < need)
                    return false;
                return !setup.params().revive_willing || have - need >= state.balance(in, x) + need;
            };
            auto x = u;
            auto in = source;
            while (x != w) {
                bool stepped = false;
                for (const auto &adj: state.neighbors(x)) {
                    if (adj.neighbor == node || state.locked(adj.channel) || dist[adj.neighbor] + 1 != dist[x])
                        continue;
                    if (!willing(x, in, adj.channel))
                        return std::nullopt;
                    plan.shifts.push_back({ adj.channel, x, -need });
                    plan.shifts.push_back({ adj.channel, adj.neighbor, need });
                    x = adj.neighbor;
                    in = adj.channel;
                    stepped = true;
                    break;
                }
                if (!stepped)
                    return std::nullopt;
            }
            if (!willing(w, in, target))
                return std::nullopt;
            plan.shifts.push_back({ target, w, -need });
            plan.shifts.push_back({ target, node, need });
            return plan;
        }
    }

    std::string_view to_string(const strategy_kind k)
    {
        for (const auto &[kind, name]: names)
            if (kind == k)
                return name;
        return "unknown";
    }

    strategy_kind parse_strategy(const std::string_view name)
    {
        for (const auto &[kind, n]: names)
            if (n == name)
                return kind;
        throw error("unknown strategy '" + std::string { name } + "'");
    }

    const std::array<strategy_kind, 8> &all_strategies()
    {
        static const std::array<strategy_kind, 8> all { strategy_kind::ln, strategy_kind::close_open, strategy_kind::loop,
            strategy_kind::revive, strategy_kind::shaduf_hl, strategy_kind::shaduf_ao, strategy_kind::shaduf_ab,
            strategy_kind::starfish };
        return all;
    }

    setup_plan plan_setup(const strategy_kind kind, const std::span<const local_channel> adjacent)
    {
        setup_plan plan;
        if (adjacent.empty())
            return plan;
        std::vector<local_channel> order(adjacent.begin(), adjacent.end());
        std::sort(order.begin(), order.end(), richer);
        const auto n = order.size();
        switch (kind) {
            case strategy_kind::starfish: {
                setup_action merge { setup_action::type::merge, {}, n };
                for (const auto &c: order)
                    merge.channels.push_back(c.channel);
                plan.actions.push_back(std::move(merge));
                plan.ops = n;
                break;
            }
            case strategy_kind::shaduf_hl:
                // odd N: the median channel stays unbound
                for (std::size_t i = 0; i < n / 2; ++i)
                    add_binding(plan, order[i].channel, order[n - 1 - i].channel);
                break;
            case strategy_kind::shaduf_ao:
                for (std::size_t i = 1; i < n; ++i)
                    add_binding(plan, order[0].channel, order[i].channel);
                break;
            case strategy_kind::shaduf_ab:
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j = i + 1; j < n; ++j)
                        add_binding(plan, order[i].channel, order[j].channel);
                break;
            default:
                break;
        }
        return plan;
    }

    amount_t capacity_bound(const strategy_kind kind, const std::span<const local_channel> adjacent, const std::span<const binding> bindings)
    {
        if (adjacent.empty())
            return 0;
        const auto balance_of = [&](const channel_index c) {
            for (const auto &l: adjacent)
                if (l.channel == c)
                    return l.balance;
            throw error("binding refers to a channel the node does not own");
        };
        amount_t best = 0;
        for (const auto &l: adjacent)
            best = std::max(best, l.balance);
        switch (kind) {
            case strategy_kind::starfish:
                return std::accumulate(adjacent.begin(), adjacent.end(), amount_t { 0 },
                    [](const amount_t acc, const local_channel &l) { return acc + l.balance; });
            case strategy_kind::shaduf_hl:
            case strategy_kind::shaduf_ao:
            case strategy_kind::shaduf_ab:
                for (const auto &b: bindings)
                    best = std::max(best, balance_of(b.first) + balance_of(b.second));
                return best;
            default:
                return best;
        }
    }

    std::vector<local_channel> local_view(const pcn_state &state, const node_index n)
    {
        std::vector<local_channel> view;
        for (const auto &adj: state.neighbors(n))
            view.push_back({ adj.channel, adj.neighbor, state.balance(adj.channel, n) });
        return view;
    }

    strategy_setup::strategy_setup(const strategy_kind kind, const pcn_state &state, const strategy_params params,
        const std::vector<node_index> &enabled):
        _kind { kind }, _params { params }, _enabled(state.node_count(), enabled.empty()), _partners(2 * state.channel_count())
    {
        for (const auto n: enabled)
            _enabled.at(n) = true;
        _plans.reserve(state.node_count());
        for (node_index n = 0; n < state.node_count(); ++n) {
            auto plan = _enabled[n] ? plan_setup(kind, local_view(state, n)) : setup_plan {};
            for (const auto &b: plan.bindings) {
                _partners[side_index(state, n, b.first)].push_back(b.second);
                _partners[side_index(state, n, b.second)].push_back(b.first);
            }
            _setup_ops += plan.ops;
            _plans.push_back(std::move(plan));
        }
        if (kind == strategy_kind::starfish) {
            // every channel of a node is a donor for every other channel of that node
            for (node_index n = 0; n < state.node_count(); ++n)
                for (const auto &adj: state.neighbors(n)) {
                    if (!_enabled[n])
                        break;
                    auto &list = _partners[side_index(state, n, adj.channel)];
                    for (const auto &other: state.neighbors(n))
                        if (other.channel != adj.channel)
                            list.push_back(other.channel);
                }
        }
    }

    std::span<const channel_index> strategy_setup::partners(const pcn_state &state, const node_index n, const channel_index channel) const
    {
        return _partners[side_index(state, n, channel)];
    }

    void strategy_setup::record_setup(op_counter &ops) const
    {
        for (std::size_t n = 0; n < _plans.size(); ++n)
            for (const auto &a: _plans[n].actions)
                ops.record(n, a.kind == setup_action::type::merge ? "merge" : "bind", a.ops);
    }

    std::optional<rebalance_plan> plan_rebalance(const strategy_setup &setup, const pcn_state &state,
        const node_index node, const channel_index target, const amount_t need)
    {
        const auto &ch = state.channel(target);
        if (ch.a != node && ch.b != node)
            throw error("rebalance requested by a node outside the target channel");
        if (need <= 0)
            throw error("rebalance requires a positive need");
        if (!setup.enabled(node))
            return std::nullopt;
        switch (setup.kind()) {
            case strategy_kind::ln: return std::nullopt;
            case strategy_kind::close_open:
            case strategy_kind::loop: return plan_top_up(setup, state, node, target, need);
            case strategy_kind::revive: return plan_cycle(setup, state, node, target, need);
            case strategy_kind::shaduf_hl:
            case strategy_kind::shaduf_ao:
            case strategy_kind::shaduf_ab: return plan_shift(state, node, target, need, setup.partners(state, node, target), true, setup.params().refill);
            case strategy_kind::starfish: return plan_shift(state, node, target, need, setup.partners(state, node, target), false, setup.params().refill);
        }
        return std::nullopt;
    }

    amount_t reachable_balance(const strategy_setup &setup, const pcn_state &state, const node_index node, const channel_index channel)
    {
        const auto have = state.balance(channel, node);
        if (state.locked(channel) || !setup.enabled(node))
            return have;
        switch (setup.kind()) {
            case strategy_kind::ln: return have;
            case strategy_kind::close_open:
            case strategy_kind::loop: {
                const auto &ch = state.channel(channel);
                const auto initial = node == ch.a ? ch.init_a : ch.init_b;
                return initial > have && state.reserve(node) >= initial - have ? initial : have;
            }
            case strategy_kind::revive: {
                amount_t best = 0;
                for (const auto &adj: state.neighbors(node))
                    if (adj.channel != channel && !state.locked(adj.channel))
                        best = std::max(best, state.balance(adj.channel, node));
                return have + best;
            }
            case strategy_kind::shaduf_hl:
            case strategy_kind::shaduf_ao:
            case strategy_kind::shaduf_ab: {
                amount_t best = 0;
                for (const auto c: setup.partners(state, node, channel))
                    best = std::max(best, state.balance(c, node));
                return have + best;
            }
            case strategy_kind::starfish: {
                amount_t total = have;
                for (const auto c: setup.partners(state, node, channel))
                    total += state.balance(c, node);
                return total;
            }
        }
        return have;
    }

    void apply_plan(pcn_state &state, const rebalance_plan &plan, const std::uint64_t lock_rounds)
    {
        for (const auto &s: plan.shifts)
            state.shift(s);
        if (plan.reserve_draw != 0)
            state.draw_reserve(plan.reserve_node, plan.reserve_draw);
        if (plan.lock)
            state.lock(*plan.lock, state.clock() + lock_rounds + 1);
    }
}
