#include <algorithm>
#include <starfish/strategies/pcn_state.hpp>

namespace starfish {
    pcn_state::pcn_state(std::vector<std::string> names, const std::vector<channel_spec> &channels, const amount_t reserve_per_unit_funding):
        _names { std::move(names) }
    {
        std::sort(_names.begin(), _names.end());
        if (std::adjacent_find(_names.begin(), _names.end()) != _names.end())
            throw error("duplicate node name in network");
        _reserve.assign(_names.size(), 0);
        std::vector<std::vector<adjacency>> adj(_names.size());
        for (const auto &spec: channels) {
            const auto a = index_of(spec.a);
            const auto b = index_of(spec.b);
            if (a == b)
                throw error("self-loop channel at " + spec.a);
            if (spec.bal_a < 0 || spec.bal_b < 0)
                throw error("negative channel balance between " + spec.a + " and " + spec.b);
            const auto c = static_cast<channel_index>(_channels.size());
            _channels.push_back({ a, b, spec.bal_a, spec.bal_b, spec.bal_a, spec.bal_b, 0 });
            adj[a].push_back({ b, c });
            adj[b].push_back({ a, c });
            _reserve[a] += spec.bal_a * reserve_per_unit_funding;
            _reserve[b] += spec.bal_b * reserve_per_unit_funding;
        }
        _adj_start.push_back(0);
        for (auto &list: adj) {
            std::sort(list.begin(), list.end(), [](const adjacency &x, const adjacency &y) {
                return std::tie(x.neighbor, x.channel) < std::tie(y.neighbor, y.channel);
            });
            _adj.insert(_adj.end(), list.begin(), list.end());
            _adj_start.push_back(_adj.size());
        }
    }

    node_index pcn_state::index_of(const std::string_view name) const
    {
        const auto it = std::lower_bound(_names.begin(), _names.end(), name);
        if (it == _names.end() || *it != name)
            throw error("unknown node " + std::string { name });
        return static_cast<node_index>(it - _names.begin());
    }

    std::optional<channel_index> pcn_state::find_channel(const node_index x, const node_index y) const
    {
        for (const auto &adj: neighbors(x))
            if (adj.neighbor == y)
                return adj.channel;
        return std::nullopt;
    }

    void pcn_state::shift(const balance_shift &s)
    {
        auto &ch = _channels[s.channel];
        auto &bal = s.node == ch.a ? ch.bal_a : ch.bal_b;
        if (_journaling)
            _journal.push_back({ undo::what::balance, s.channel, s.node, bal });
        bal += s.delta;
    }

    void pcn_state::draw_reserve(const node_index n, const amount_t amount)
    {
        if (_journaling)
            _journal.push_back({ undo::what::reserve, n, n, _reserve[n] });
        _reserve[n] -= amount;
    }

    void pcn_state::lock(const channel_index c, const std::uint64_t until)
    {
        auto &ch = _channels[c];
        if (_journaling)
            _journal.push_back({ undo::what::lock, c, 0, static_cast<std::int64_t>(ch.locked_until) });
        ch.locked_until = std::max(ch.locked_until, until);
    }

    void pcn_state::begin()
    {
        _journal.clear();
        _journaling = true;
    }

    void pcn_state::commit()
    {
        _journal.clear();
        _journaling = false;
    }

    void pcn_state::rollback()
    {
        for (auto it = _journal.rbegin(); it != _journal.rend(); ++it) {
            switch (it->kind) {
                case undo::what::balance: {
                    auto &ch = _channels[it->index];
                    (it->node == ch.a ? ch.bal_a : ch.bal_b) = it->old_value;
                    break;
                }
                case undo::what::reserve: _reserve[it->index] = it->old_value; break;
                case undo::what::lock: _channels[it->index].locked_until = static_cast<std::uint64_t>(it->old_value); break;
            }
        }
        _journal.clear();
        _journaling = false;
    }

    std::string pcn_state::audit_transaction() const
    {
        std::vector<const undo *> first;
        for (const auto &u: _journal) {
            if (u.kind == undo::what::lock)
                continue;
            const auto same = [&](const undo *o) { return o->kind == u.kind && o->index == u.index && o->node == u.node; };
            if (std::none_of(first.begin(), first.end(), same))
                first.push_back(&u);
        }
        amount_t net = 0;
        for (const auto *u: first) {
            amount_t now = 0;
            if (u->kind == undo::what::reserve) {
                now = _reserve[u->index];
            } else {
                const auto &ch = _channels[u->index];
                now = u->node == ch.a ? ch.bal_a : ch.bal_b;
            }
            if (now < 0)
                return (u->kind == undo::what::reserve ? "reserve of " : "channel side of ") + _names[u->node] + " went negative";
            net += now - u->old_value;
        }
        if (net != 0)
            return "transaction changed the coin supply by " + std::to_string(net);
        return {};
    }

    amount_t pcn_state::total_coins() const
    {
        amount_t total = 0;
        for (const auto &ch: _channels)
            total += ch.bal_a + ch.bal_b;
        for (const auto r: _reserve)
            total += r;
        return total;
    }

    std::string pcn_state::find_negative() const
    {
        for (std::size_t c = 0; c < _channels.size(); ++c) {
            const auto &ch = _channels[c];
            if (ch.bal_a < 0 || ch.bal_b < 0)
                return "channel " + _names[ch.a] + "-" + _names[ch.b] + " has a negative side";
        }
        for (std::size_t n = 0; n < _reserve.size(); ++n)
            if (_reserve[n] < 0)
                return "reserve of " + _names[n] + " is negative";
        return {};
    }

    bool pcn_state::operator==(const pcn_state &o) const
    {
        if (_names != o._names || _reserve != o._reserve || _clock != o._clock || _channels.size() != o._channels.size())
            return false;
        for (std::size_t i = 0; i < _channels.size(); ++i) {
            const auto &x = _channels[i];
            const auto &y = o._channels[i];
            if (x.a != y.a || x.b != y.b || x.bal_a != y.bal_a || x.bal_b != y.bal_b || x.locked_until != y.locked_until)
                return false;
        }
        return true;
    }
}
