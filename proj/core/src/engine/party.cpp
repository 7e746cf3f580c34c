#include <algorithm>
#include <starfish/engine/party.hpp>

namespace starfish {
    namespace {
        template<class... Ts>
        struct overloaded: Ts... {
            using Ts::operator()...;
        };
        template<class... Ts>
        overloaded(Ts...) -> overloaded<Ts...>;

        std::map<party_id, amount_t> caps_after(const merge &m, const merge_update &u)
        {
            auto caps = m.capacities();
            for (auto &[user, cap]: caps)
                cap += u.delta(user);
            return caps;
        }

        // The edge balances `e` would hold after the hub-side shift of an update merge.
        balance_map edge_after_update(const edge &e, const merge_update &u)
        {
            return { { e.hub, e.hub_balance + u.delta(e.user) }, { e.user, e.user_balance } };
        }

        void set_edge(edge &e, const signed_state &s)
        {
            e.hub_balance = s.entry(e.hub);
            e.user_balance = s.entry(e.user);
            e.capacity = e.hub_balance + e.user_balance;
            e.version = s.version;
        }
    }

    std::string_view to_string(const behavior b)
    {
        switch (b) {
            case behavior::honest: return "honest";
            case behavior::silent: return "silent";
            case behavior::decline: return "decline";
            case behavior::stale_close: return "stale_close";
            case behavior::forge_signature: return "forge_signature";
            case behavior::reject_update_merge: return "reject_update_merge";
            case behavior::double_spend: return "double_spend";
        }
        return "unknown";
    }

    std::optional<behavior> parse_behavior(const std::string_view s)
    {
        for (const auto b: { behavior::honest, behavior::silent, behavior::decline, behavior::stale_close, behavior::forge_signature,
                 behavior::reject_update_merge, behavior::double_spend })
            if (to_string(b) == s)
                return b;
        return std::nullopt;
    }

    std::string_view command_name(const command &c)
    {
        static constexpr std::string_view names[] = { "open_channel", "update_channel", "open_merge", "update_edge", "update_merge",
            "close_merge", "close_channel", "replay_merge", "replay_update" };
        return names[c.index()];
    }

    std::string_view message_name(const party_message &m)
    {
        static constexpr std::string_view names[] = { "updateC", "updateC-reply", "updateE", "updateE-reply", "merge-request",
            "merge-accept", "updateM", "updateM-reply", "broadcast-proposal", "broadcast-vote" };
        return names[m.index()];
    }

    balance_map channel_view::payout_from(const signed_state &s) const
    {
        balance_map out { { ch.a, s.entry(ch.a) }, { ch.b, s.entry(ch.b) } };
        for (auto i = s.epoch; i < adjustments.size(); ++i)
            for (const auto &[p, v]: adjustments[i])
                out[p] += v;
        return out;
    }

    party::party(party_id id, const behavior b, const key_registry &keys, const round_t delta, const ledger &public_ledger, event_log &log):
        _id { std::move(id) }, _behavior { b }, _keys { keys }, _delta { delta }, _public_ledger { public_ledger }, _log { log }
    {
    }

    const channel_view *party::channel_state(const channel_id &id) const
    {
        const auto it = _channels.find(id);
        return it == _channels.end() ? nullptr : &it->second;
    }

    const merge_view *party::merge_state(const merge_id &id) const
    {
        const auto it = _merges.find(id);
        return it == _merges.end() ? nullptr : &it->second;
    }

    party_outbox party::take_outbox()
    {
        return std::exchange(_outbox, {});
    }

    bool party::idle() const
    {
        if (!_opening_merges.empty() || !_joining_merges.empty())
            return false;
        for (const auto &[_, cv]: _channels)
            if (cv.pending || cv.close_started || cv.open_started || cv.ch.status == channel_status::closing)
                return false;
        for (const auto &[_, mv]: _merges) {
            if (mv.busy() || !mv.closing.empty())
                return false;
            for (const auto &[_, ev]: mv.edges)
                if (ev.pending)
                    return false;
        }
        return true;
    }

    void party::send(const party_id &to, party_message m)
    {
        if (speaks())
            _outbox.messages.emplace_back(to, std::move(m));
    }

    void party::submit(contract_request r)
    {
        if (speaks())
            _outbox.requests.push_back(std::move(r));
    }

    void party::output(const round_t now, std::string name, std::string object, const round_t started)
    {
        _log.append(now, "party:" + _id.str(), "output", { { "name", name }, { "object", object }, { "started", started } });
        _outbox.outputs.push_back({ now, _id, std::move(name), std::move(object), started });
    }

    void party::note(const round_t now, std::string event, nlohmann::json payload)
    {
        _log.append(now, "party:" + _id.str(), std::move(event), std::move(payload));
    }

    void party::execute(const round_t now, const command &c)
    {
        note(now, "command", { { "op", command_name(c) } });
        if (_behavior == behavior::silent) {
            note(now, "command-ignored", { { "reason", "party is silent" } });
            return;
        }
        std::visit(overloaded {
            [&](const cmd_open_channel &x) { open_channel(now, x); },
            [&](const cmd_update_channel &x) { update_channel(now, x); },
            [&](const cmd_open_merge &x) { open_merge(now, x); },
            [&](const cmd_update_edge &x) { update_edge(now, x); },
            [&](const cmd_update_merge &x) { update_merge(now, x); },
            [&](const cmd_close_merge &x) { close_merge(now, x.merge, x.edge_user, now); },
            [&](const cmd_close_channel &x) { close_channel(now, x); },
            [&](const cmd_replay_merge &x) { replay_merge(now, x); },
            [&](const cmd_replay_update &x) { replay_update(now, x); },
        }, c);
    }

    void party::receive(const round_t now, const party_id &from, const party_message &m)
    {
        std::visit(overloaded {
            [&](const update_channel_proposal &x) { on_update_channel(now, from, x); },
            [&](const update_channel_reply &x) { on_update_channel_reply(now, from, x); },
            [&](const update_edge_proposal &x) { on_update_edge(now, from, x); },
            [&](const update_edge_reply &x) { on_update_edge_reply(now, from, x); },
            [&](const merge_request &x) { on_merge_request(now, from, x); },
            [&](const merge_accept &x) { on_merge_accept(now, from, x); },
            [&](const update_merge_proposal &x) { on_update_merge(now, from, x); },
            [&](const update_merge_reply &x) { on_update_merge_reply(now, from, x); },
            [&](const broadcast_proposal &x) { on_broadcast_proposal(now, from, x); },
            [&](const broadcast_vote &x) { on_broadcast_vote(now, from, x); },
        }, m);
    }

    void party::notify(const round_t now, const contract_notice &n)
    {
        std::visit(overloaded {
            [&](const channel_opening &x) {
                if (!signs()) {
                    note(now, "open-withheld", { { "channel", x.spec.id.str() } });
                    return;
                }
                if (_public_ledger.balance(_id) < x.spec.funding_of(_id)) {
                    note(now, "open-declined", { { "channel", x.spec.id.str() }, { "reason", "insufficient ledger funds" } });
                    return;
                }
                channel_view cv;
                cv.spec = x.spec;
                cv.ch.id = x.spec.id;
                cv.ch.a = x.spec.a;
                cv.ch.b = x.spec.b;
                cv.ch.status = channel_status::proposed;
                _channels.insert_or_assign(x.spec.id, std::move(cv));
                submit(open_channel_request { x.spec });
            },
            [&](const channel_opened &x) {
                auto &cv = _channels[x.spec.id];
                cv.spec = x.spec;
                cv.ch.id = x.spec.id;
                cv.ch.a = x.spec.a;
                cv.ch.b = x.spec.b;
                cv.ch.balance = { { x.spec.a, x.spec.fund_a }, { x.spec.b, x.spec.fund_b } };
                cv.ch.status = channel_status::open;
                cv.history = { make_channel_state(x.spec.id, 0, 0, cv.ch.balance) };
                if (cv.open_started) {
                    output(now, "opened", x.spec.id.str(), *cv.open_started);
                    cv.open_started.reset();
                }
            },
            [&](const channel_not_opened &x) {
                const auto it = _channels.find(x.channel);
                if (it == _channels.end())
                    return;
                it->second.ch.status = channel_status::closed;
                if (it->second.open_started) {
                    output(now, "not-opened", x.channel.str(), *it->second.open_started);
                    it->second.open_started.reset();
                }
            },
            [&](const channel_adjusted &x) { on_channel_adjusted(now, x); },
            [&](const merge_opened &x) { on_merge_opened(now, x); },
            [&](const merge_not_opened &x) { on_merge_not_opened(now, x); },
            [&](const merge_closing &x) { on_merge_closing(now, x); },
            [&](const merge_close_check &x) { on_close_check(now, x); },
            [&](const merge_closed &x) { on_merge_closed(now, x); },
            [&](const channel_closing &x) { on_channel_closing(now, x); },
            [&](const channel_closed &x) {
                const auto it = _channels.find(x.channel);
                if (it == _channels.end())
                    return;
                auto &cv = it->second;
                cv.ch.status = channel_status::closed;
                cv.payout = x.payout;
                for (auto &[_, v]: cv.ch.balance)
                    v = 0;
                if (cv.close_started) {
                    output(now, "closedC", x.channel.str(), *cv.close_started);
                    cv.close_started.reset();
                }
            },
        }, n);
    }

    // ---- Procedure (A): open channel

    void party::open_channel(const round_t now, const cmd_open_channel &c)
    {
        const auto obj = c.channel.str();
        if (c.fund < 0 || c.counter_fund < 0 || c.counterparty == _id || _channels.contains(c.channel)) {
            note(now, "command-ignored", { { "reason", "illogical open" }, { "channel", obj } });
            return;
        }
        if (_public_ledger.balance(_id) < c.fund) {
            output(now, "not-opened", obj, now);
            return;
        }
        channel_view cv;
        cv.spec = { c.channel, _id, c.counterparty, c.fund, c.counter_fund };
        cv.ch.id = c.channel;
        cv.ch.a = _id;
        cv.ch.b = c.counterparty;
        cv.ch.status = channel_status::proposed;
        cv.open_started = now;
        submit(open_channel_request { cv.spec });
        _channels.emplace(c.channel, std::move(cv));
    }

    // ---- Procedure (B): update channel

    void party::update_channel(const round_t now, const cmd_update_channel &c)
    {
        const auto obj = c.channel.str();
        const auto it = _channels.find(c.channel);
        if (it == _channels.end() || it->second.ch.status != channel_status::open || c.amount < 0) {
            note(now, "command-ignored", { { "reason", "channel not open" }, { "channel", obj } });
            return;
        }
        auto &cv = it->second;
        if (cv.busy || cv.pending || cv.close_started) {
            output(now, "not-updatedC", obj, now);
            return;
        }
        const transfer pay { _id, cv.ch.other(_id), c.amount };
        auto next = apply_payment(cv.ch.balance, pay);
        if (!next && _behavior == behavior::double_spend) {
            next = cv.ch.balance;
            (*next)[pay.from] -= pay.amount;
            (*next)[pay.to] += pay.amount;
        }
        if (!next) {
            output(now, "not-updatedC", obj, now);
            return;
        }
        auto msg = make_channel_state(c.channel, cv.ch.version + 1, cv.ch.epoch, *next);
        msg.sign(keys());
        update_channel_proposal prop { c.channel, pay, msg };
        cv.pending = prop;
        cv.pending_started = now;
        _last_proposals.insert_or_assign(c.channel, prop);
        send(pay.to, std::move(prop));
    }

    void party::on_update_channel(const round_t now, const party_id &from, const update_channel_proposal &m)
    {
        const auto obj = m.channel.str();
        const auto it = _channels.find(m.channel);
        if (it == _channels.end() || it->second.ch.status != channel_status::open || !it->second.ch.has_user(from) || from == _id) {
            note(now, "updateC-ignored", { { "channel", obj }, { "reason", "unknown channel" } });
            return;
        }
        auto &cv = it->second;
        if (!signs()) {
            note(now, "updateC-withheld", { { "channel", obj } });
            return;
        }
        if (cv.pending) {
            // simultaneous proposals: the lower party id wins
            if (_id < from) {
                note(now, "updateC-ignored", { { "channel", obj }, { "reason", "concurrent proposal loses to own" } });
                return;
            }
            output(now, "not-updatedC", obj, cv.pending_started);
            cv.pending.reset();
        }
        if (cv.busy || cv.close_started) {
            note(now, "updateC-ignored", { { "channel", obj }, { "reason", "channel busy" } });
            return;
        }
        const auto &s = m.msg_c;
        const auto expected = apply_payment(cv.ch.balance, m.payment);
        const bool ok = s.kind == state_kind::channel && s.subject == obj && s.version == cv.ch.version + 1 && s.epoch == cv.ch.epoch
            && m.payment.from == from && m.payment.to == _id && expected && *expected == s.entries && s.signed_by(_keys, from);
        if (!ok) {
            note(now, "updateC-ignored", { { "channel", obj }, { "reason", "version mismatch or invalid state" }, { "version", s.version } });
            return;
        }
        auto signed_msg = s;
        signed_msg.sign(keys());
        cv.history.push_back(signed_msg);
        cv.ch.balance = s.entries;
        cv.ch.version = s.version;
        note(now, "updateC-accepted", { { "channel", obj }, { "version", s.version } });
        send(from, update_channel_reply { m.channel, s.version, signed_msg.signatures.at(_id) });
    }

    void party::on_update_channel_reply(const round_t now, const party_id &from, const update_channel_reply &m)
    {
        const auto it = _channels.find(m.channel);
        if (it == _channels.end() || !it->second.pending)
            return;
        auto &cv = it->second;
        auto msg = cv.pending->msg_c;
        if (m.version != msg.version || from != cv.ch.other(_id) || !_keys.verify(from, msg.signing_bytes(), m.sig)) {
            note(now, "updateC-reply-ignored", { { "channel", m.channel.str() } });
            return;
        }
        msg.add_signature(m.sig);
        cv.history.push_back(msg);
        cv.ch.balance = msg.entries;
        cv.ch.version = msg.version;
        cv.pending.reset();
        output(now, "updatedC", m.channel.str(), cv.pending_started);
    }

    // ---- Procedure (C): open merge

    void party::open_merge(const round_t now, const cmd_open_merge &c)
    {
        const auto obj = c.merge.str();
        if (_merges.contains(c.merge) || _opening_merges.contains(c.merge) || c.edges.empty()) {
            note(now, "command-ignored", { { "reason", "illogical merge" }, { "merge", obj } });
            return;
        }
        merge_proposal prop { c.merge, _id, now, {} };
        std::set<party_id> users;
        for (const auto &[cid, cap]: c.edges) {
            const auto it = _channels.find(cid);
            if (it == _channels.end() || it->second.ch.status != channel_status::open || cap < 0) {
                note(now, "command-ignored", { { "reason", "channel not open" }, { "merge", obj }, { "channel", cid.str() } });
                return;
            }
            const auto &cv = it->second;
            const auto &user = cv.ch.other(_id);
            if (!users.insert(user).second) {
                note(now, "command-ignored", { { "reason", "two channels to the same user" }, { "merge", obj } });
                return;
            }
            if (cv.busy || cv.pending || cv.close_started || (cv.ch.balance_of(_id) < cap && _behavior != behavior::double_spend)) {
                output(now, "not-merged", obj, now);
                return;
            }
            prop.edges.push_back({ user, cid, cv.ch.version, cv.ch.epoch, cap });
        }
        for (const auto &[cid, _]: c.edges)
            _channels.at(cid).busy = true;
        const auto hub_sig = keys().sign(prop.signing_bytes());
        pending_open_merge pom { { prop, { hub_sig }, {} }, now, false };
        for (const auto &e: prop.edges)
            send(e.user, merge_request { prop, hub_sig });
        _opening_merges.emplace(c.merge, std::move(pom));
    }

    void party::on_merge_request(const round_t now, const party_id &from, const merge_request &m)
    {
        const auto &prop = m.proposal;
        const auto obj = prop.id.str();
        if (prop.timestamp + 1 != now) {
            note(now, "merge-request-rejected", { { "merge", obj }, { "reason", "stale timestamp" }, { "timestamp", prop.timestamp } });
            return;
        }
        const auto *spec = prop.find(_id);
        if (prop.hub != from || !spec || !_keys.verify(from, prop.signing_bytes(), m.hub_sig) || _merges.contains(prop.id)
            || _joining_merges.contains(prop.id)) {
            note(now, "merge-request-rejected", { { "merge", obj }, { "reason", "malformed or unsigned" } });
            return;
        }
        if (!signs()) {
            note(now, "merge-withheld", { { "merge", obj } });
            return;
        }
        const auto it = _channels.find(spec->channel);
        if (it == _channels.end() || it->second.ch.status != channel_status::open || !it->second.ch.has_user(from)) {
            note(now, "merge-request-rejected", { { "merge", obj }, { "reason", "unknown channel" } });
            return;
        }
        auto &cv = it->second;
        if (cv.busy || cv.pending || cv.close_started || cv.ch.version != spec->channel_version || cv.ch.epoch != spec->channel_epoch
            || cv.ch.balance_of(from) < spec->capacity) {
            note(now, "merge-request-rejected", { { "merge", obj }, { "reason", "channel state mismatch" } });
            return;
        }
        cv.busy = true;
        _joining_merges.emplace(prop.id, pending_join { prop, now });
        send(from, merge_accept { prop.id, keys().sign(prop.signing_bytes()) });
    }

    void party::on_merge_accept(const round_t now, const party_id &from, const merge_accept &m)
    {
        const auto it = _opening_merges.find(m.merge);
        if (it == _opening_merges.end() || it->second.submitted)
            return;
        auto &pom = it->second;
        const auto &prop = pom.request.proposal;
        if (!prop.find(from) || !_keys.verify(from, prop.signing_bytes(), m.sig)) {
            note(now, "merge-accept-ignored", { { "merge", m.merge.str() }, { "from", from.str() } });
            return;
        }
        pom.request.signatures.push_back(m.sig);
        std::set<party_id> signers;
        for (const auto &s: pom.request.signatures)
            signers.insert(s.signer);
        for (const auto &e: prop.edges)
            if (!signers.contains(e.user))
                return;
        for (const auto &e: prop.edges)
            pom.request.channel_states.push_back(_channels.at(e.channel).latest());
        pom.submitted = true;
        _merge_requests_sent.insert_or_assign(m.merge, pom.request);
        submit(pom.request);
    }

    void party::on_merge_opened(const round_t now, const merge_opened &n)
    {
        const auto &prop = n.proposal;
        merge_view mv;
        mv.proposal = prop;
        mv.m.id = prop.id;
        mv.m.hub = prop.hub;
        mv.m.status = merge_status::active;
        for (const auto &e: prop.edges) {
            mv.m.users.insert(e.user);
            mv.m.edges.push_back({ e.channel, prop.hub, e.user, e.capacity, e.capacity, 0, 0 });
            if (_id == prop.hub || _id == e.user)
                mv.edges[e.user].history = { make_edge_state(prop.id, prop.hub, e.user, 0, e.capacity, 0) };
            if (const auto it = _channels.find(e.channel); it != _channels.end() && (_id == prop.hub || _id == e.user))
                it->second.busy = false;
        }
        mv.history = { make_merge_state(prop.id, 0, prop.capacities()) };
        _merges.insert_or_assign(prop.id, std::move(mv));
        _joining_merges.erase(prop.id);
        if (const auto it = _opening_merges.find(prop.id); it != _opening_merges.end()) {
            output(now, "merged", prop.id.str(), it->second.started);
            _opening_merges.erase(it);
        }
    }

    void party::on_merge_not_opened(const round_t now, const merge_not_opened &n)
    {
        auto release = [&](const merge_proposal &prop) {
            for (const auto &e: prop.edges)
                if (const auto it = _channels.find(e.channel); it != _channels.end() && (_id == prop.hub || _id == e.user))
                    it->second.busy = false;
        };
        if (const auto it = _joining_merges.find(n.merge); it != _joining_merges.end()) {
            release(it->second.proposal);
            _joining_merges.erase(it);
        }
        if (const auto it = _opening_merges.find(n.merge); it != _opening_merges.end()) {
            release(it->second.request.proposal);
            output(now, "not-merged", n.merge.str(), it->second.started);
            _opening_merges.erase(it);
        }
    }

    // ---- Procedure (D): update edge

    void party::update_edge(const round_t now, const cmd_update_edge &c)
    {
        const auto obj = edge_subject(c.merge, c.edge_user);
        const auto it = _merges.find(c.merge);
        if (it == _merges.end() || it->second.m.status != merge_status::active || c.amount < 0) {
            note(now, "command-ignored", { { "reason", "merge not active" }, { "edge", obj } });
            return;
        }
        auto &mv = it->second;
        const auto eit = mv.edges.find(c.edge_user);
        auto *e = mv.m.find_edge(c.edge_user);
        if (eit == mv.edges.end() || !e) {
            note(now, "command-ignored", { { "reason", "not a side of this edge" }, { "edge", obj } });
            return;
        }
        auto &ev = eit->second;
        if (ev.pending || mv.busy() || mv.closing.contains(c.edge_user)) {
            output(now, "not-updatedE", obj, now);
            return;
        }
        const party_id other = _id == e->hub ? e->user : e->hub;
        const transfer pay { _id, other, c.amount };
        balance_map current { { e->hub, e->hub_balance }, { e->user, e->user_balance } };
        auto next = apply_payment(current, pay);
        if (!next && _behavior == behavior::double_spend) {
            next = current;
            (*next)[pay.from] -= pay.amount;
            (*next)[pay.to] += pay.amount;
        }
        if (!next) {
            output(now, "not-updatedE", obj, now);
            return;
        }
        auto msg = make_edge_state(c.merge, e->hub, e->user, e->version + 1, next->at(e->hub), next->at(e->user));
        msg.sign(keys());
        update_edge_proposal prop { c.merge, c.edge_user, pay, msg };
        ev.pending = prop;
        ev.pending_started = now;
        send(other, std::move(prop));
    }

    void party::on_update_edge(const round_t now, const party_id &from, const update_edge_proposal &m)
    {
        const auto obj = edge_subject(m.merge, m.edge_user);
        const auto it = _merges.find(m.merge);
        if (it == _merges.end() || it->second.m.status != merge_status::active) {
            note(now, "updateE-ignored", { { "edge", obj }, { "reason", "unknown merge" } });
            return;
        }
        auto &mv = it->second;
        auto *e = mv.m.find_edge(m.edge_user);
        const auto eit = mv.edges.find(m.edge_user);
        if (!e || eit == mv.edges.end() || !e->has_user(from) || from == _id) {
            note(now, "updateE-ignored", { { "edge", obj }, { "reason", "unknown edge" } });
            return;
        }
        auto &ev = eit->second;
        if (!signs()) {
            note(now, "updateE-withheld", { { "edge", obj } });
            return;
        }
        if (ev.pending) {
            if (_id < from) {
                note(now, "updateE-ignored", { { "edge", obj }, { "reason", "concurrent proposal loses to own" } });
                return;
            }
            output(now, "not-updatedE", obj, ev.pending_started);
            ev.pending.reset();
        }
        if (mv.busy() || mv.closing.contains(m.edge_user)) {
            note(now, "updateE-ignored", { { "edge", obj }, { "reason", "edge busy" } });
            return;
        }
        const auto &s = m.msg_e;
        const balance_map current { { e->hub, e->hub_balance }, { e->user, e->user_balance } };
        const auto expected = apply_payment(current, m.payment);
        const bool ok = s.kind == state_kind::edge && s.subject == obj && s.version == e->version + 1 && m.payment.from == from
            && m.payment.to == _id && expected && *expected == s.entries && s.signed_by(_keys, from);
        if (!ok) {
            note(now, "updateE-ignored", { { "edge", obj }, { "reason", "version mismatch, overdraft or invalid state" }, { "version", s.version } });
            return;
        }
        auto signed_msg = s;
        signed_msg.sign(keys());
        ev.history.push_back(signed_msg);
        set_edge(*e, signed_msg);
        note(now, "updateE-accepted", { { "edge", obj }, { "version", s.version } });
        send(from, update_edge_reply { m.merge, m.edge_user, s.version, signed_msg.signatures.at(_id) });
    }

    void party::on_update_edge_reply(const round_t now, const party_id &from, const update_edge_reply &m)
    {
        const auto it = _merges.find(m.merge);
        if (it == _merges.end())
            return;
        auto &mv = it->second;
        const auto eit = mv.edges.find(m.edge_user);
        auto *e = mv.m.find_edge(m.edge_user);
        if (eit == mv.edges.end() || !e || !eit->second.pending)
            return;
        auto &ev = eit->second;
        auto msg = ev.pending->msg_e;
        if (m.version != msg.version || !e->has_user(from) || from == _id || !_keys.verify(from, msg.signing_bytes(), m.sig)) {
            note(now, "updateE-reply-ignored", { { "edge", edge_subject(m.merge, m.edge_user) } });
            return;
        }
        msg.add_signature(m.sig);
        ev.history.push_back(msg);
        set_edge(*e, msg);
        ev.pending.reset();
        output(now, "updatedE", edge_subject(m.merge, m.edge_user), ev.pending_started);
    }

    // ---- Procedure (E): update merge

    void party::update_merge(const round_t now, const cmd_update_merge &c)
    {
        const auto obj = c.merge.str();
        const auto it = _merges.find(c.merge);
        const auto &u = c.update;
        if (it == _merges.end() || it->second.m.hub != _id || it->second.m.status != merge_status::active || u.amount < 0
            || u.from_edge == u.to_edge) {
            note(now, "command-ignored", { { "reason", "illogical update merge" }, { "merge", obj } });
            return;
        }
        auto &mv = it->second;
        auto *from = mv.m.find_edge(u.from_edge);
        auto *to = mv.m.find_edge(u.to_edge);
        if (!from || !to) {
            note(now, "command-ignored", { { "reason", "unknown edge" }, { "merge", obj } });
            return;
        }
        const bool edge_pending = mv.edges.at(u.from_edge).pending || mv.edges.at(u.to_edge).pending;
        if (mv.busy() || edge_pending || mv.closing.contains(u.from_edge) || mv.closing.contains(u.to_edge)
            || (from->hub_balance < u.amount && _behavior != behavior::double_spend)) {
            output(now, "not-updatedM", obj, now);
            return;
        }
        auto msg_m = make_merge_state(c.merge, mv.latest().version + 1, caps_after(mv.m, u));
        auto e_from = make_edge_state(c.merge, _id, u.from_edge, from->version + 1, from->hub_balance - u.amount, from->user_balance);
        auto e_to = make_edge_state(c.merge, _id, u.to_edge, to->version + 1, to->hub_balance + u.amount, to->user_balance);
        msg_m.sign(keys());
        e_from.sign(keys());
        e_to.sign(keys());
        mv.updating = pending_update_merge { u, msg_m, e_from, e_to, now, {}, false };
        const update_merge_proposal prop { c.merge, u, msg_m, e_from, e_to };
        send(u.from_edge, prop);
        send(u.to_edge, prop);
    }

    void party::on_update_merge(const round_t now, const party_id &from, const update_merge_proposal &m)
    {
        const auto obj = m.merge.str();
        const auto it = _merges.find(m.merge);
        if (it == _merges.end() || it->second.m.hub != from || it->second.m.status != merge_status::active) {
            note(now, "updateM-ignored", { { "merge", obj }, { "reason", "unknown merge" } });
            return;
        }
        auto &mv = it->second;
        const auto &u = m.update;
        const bool is_from = u.from_edge == _id;
        if (!is_from && u.to_edge != _id) {
            note(now, "updateM-ignored", { { "merge", obj }, { "reason", "not a touched edge" } });
            return;
        }
        if (!signs()) {
            note(now, "updateM-withheld", { { "merge", obj } });
            return;
        }
        auto *mine = mv.m.find_edge(_id);
        const auto eit = mv.edges.find(_id);
        if (!mine || eit == mv.edges.end() || mv.busy() || eit->second.pending || mv.closing.contains(_id) || !mv.m.find_edge(u.from_edge)
            || !mv.m.find_edge(u.to_edge)) {
            note(now, "updateM-ignored", { { "merge", obj }, { "reason", "merge busy" } });
            return;
        }
        const auto &my_e = is_from ? m.msg_e_from : m.msg_e_to;
        const bool ok = m.msg_m.version == mv.latest().version + 1 && m.msg_m.entries == caps_after(mv.m, u) && m.msg_m.non_negative()
            && m.msg_m.signed_by(_keys, from) && my_e.subject == edge_subject(m.merge, _id) && my_e.version == mine->version + 1
            && my_e.entries == edge_after_update(*mine, u) && my_e.non_negative() && my_e.signed_by(_keys, from);
        if (!ok) {
            note(now, "updateM-ignored", { { "merge", obj }, { "reason", "version mismatch or invalid state" }, { "version", m.msg_m.version } });
            return;
        }
        mv.signing_since = now;
        send(from, update_merge_reply { m.merge, m.msg_m.version, keys().sign(m.msg_m.signing_bytes()), keys().sign(my_e.signing_bytes()) });
    }

    void party::on_update_merge_reply(const round_t now, const party_id &from, const update_merge_reply &m)
    {
        const auto it = _merges.find(m.merge);
        if (it == _merges.end() || !it->second.updating || it->second.updating->broadcasting)
            return;
        auto &mv = it->second;
        auto &pu = *mv.updating;
        const bool is_from = from == pu.update.from_edge;
        if ((!is_from && from != pu.update.to_edge) || m.version != pu.msg_m.version)
            return;
        auto &e = is_from ? pu.msg_e_from : pu.msg_e_to;
        if (!_keys.verify(from, pu.msg_m.signing_bytes(), m.sig_m) || !_keys.verify(from, e.signing_bytes(), m.sig_e)) {
            note(now, "updateM-reply-ignored", { { "merge", m.merge.str() }, { "from", from.str() } });
            return;
        }
        pu.msg_m.add_signature(m.sig_m);
        e.add_signature(m.sig_e);
        pu.replied.insert(from);
        if (pu.replied.size() < 2)
            return;
        pu.broadcasting = true;
        const round_t deadline = now + 2;
        mv.broadcast = pending_broadcast { broadcast_instance { pu.msg_m, mv.m.users, deadline }, pu.update, pu.msg_e_from, pu.msg_e_to };
        note(now, "broadcast-start", { { "merge", m.merge.str() }, { "version", pu.msg_m.version }, { "deadline", deadline } });
        for (const auto &user: mv.m.users)
            send(user, broadcast_proposal { m.merge, pu.update, pu.msg_m, pu.msg_e_from, pu.msg_e_to, deadline });
    }

    void party::on_broadcast_proposal(const round_t now, const party_id &from, const broadcast_proposal &m)
    {
        const auto obj = m.merge.str();
        const auto it = _merges.find(m.merge);
        if (it == _merges.end() || it->second.m.hub != from || it->second.broadcast) {
            note(now, "broadcast-ignored", { { "merge", obj } });
            return;
        }
        auto &mv = it->second;
        const auto &u = m.update;
        const auto *pe = mv.m.find_edge(u.from_edge);
        const auto *qe = mv.m.find_edge(u.to_edge);
        bool accept = pe && qe && m.msg_m.version == mv.latest().version + 1 && m.msg_m.entries == caps_after(mv.m, u)
            && m.msg_m.signed_by(_keys, from) && m.msg_m.signed_by(_keys, u.from_edge) && m.msg_m.signed_by(_keys, u.to_edge)
            && m.msg_e_from.signed_by(_keys, from) && m.msg_e_from.signed_by(_keys, u.from_edge) && m.msg_e_to.signed_by(_keys, from)
            && m.msg_e_to.signed_by(_keys, u.to_edge) && !mv.closing.contains(u.from_edge) && !mv.closing.contains(u.to_edge);
        if (accept && (_id == u.from_edge || _id == u.to_edge)) {
            const auto &mine = _id == u.from_edge ? m.msg_e_from : m.msg_e_to;
            accept = mine.version == mv.m.find_edge(_id)->version + 1 && mine.entries == edge_after_update(*mv.m.find_edge(_id), u);
        }
        if (_behavior == behavior::reject_update_merge)
            accept = false;
        mv.signing_since.reset();
        auto unsigned_m = m.msg_m;
        mv.broadcast = pending_broadcast { broadcast_instance { unsigned_m, mv.m.users, m.deadline }, u, m.msg_e_from, m.msg_e_to };
        const auto sig = keys().sign(m.msg_m.signing_bytes());
        mv.broadcast->instance.record_vote(_keys, _id, accept, sig);
        note(now, accept ? "updateM-vote-accept" : "updateM-wrong", { { "merge", obj }, { "version", m.msg_m.version } });
        const broadcast_vote vote { m.merge, m.msg_m.version, accept, accept ? sig : signature { _id, {} } };
        send(from, vote);
        for (const auto &user: mv.m.users)
            if (user != _id)
                send(user, vote);
    }

    void party::on_broadcast_vote(const round_t now, const party_id &from, const broadcast_vote &m)
    {
        const auto it = _merges.find(m.merge);
        if (it == _merges.end() || !it->second.broadcast || it->second.broadcast->instance.certified().version != m.version) {
            note(now, "vote-ignored", { { "merge", m.merge.str() }, { "from", from.str() } });
            return;
        }
        it->second.broadcast->instance.record_vote(_keys, from, m.accept, m.sig);
    }

    void party::finish_broadcast(const round_t now, merge_view &mv)
    {
        auto &pb = *mv.broadcast;
        const auto verdict = pb.instance.verdict(now);
        const auto obj = mv.m.id.str();
        const bool hub = _id == mv.m.hub;
        note(now, "broadcast-verdict", { { "merge", obj }, { "verdict", to_string(verdict) }, { "version", pb.instance.certified().version } });
        if (verdict == broadcast_verdict::success) {
            const auto &u = pb.update;
            for (auto &e: mv.m.edges)
                e.capacity += u.delta(e.user);
            mv.history.push_back(pb.instance.certified());
            for (const auto *s: { &pb.msg_e_from, &pb.msg_e_to }) {
                const party_id &user = s == &pb.msg_e_from ? u.from_edge : u.to_edge;
                if (const auto eit = mv.edges.find(user); eit != mv.edges.end()) {
                    eit->second.history.push_back(*s);
                    set_edge(*mv.m.find_edge(user), *s);
                }
            }
            if (hub)
                output(now, "updatedM", obj, mv.updating->started);
        } else if (hub) {
            output(now, "not-updatedM", obj, mv.updating->started);
        }
        mv.broadcast.reset();
        mv.updating.reset();
        mv.signing_since.reset();
    }

    // ---- Procedure (F): close merge

    signed_state party::closing_merge_state(const merge_view &mv) const
    {
        if (_behavior == behavior::stale_close && mv.history.size() >= 2)
            return mv.history[mv.history.size() - 2];
        return mv.latest();
    }

    signed_state party::closing_edge_state(const merge_view &mv, const party_id &edge_user) const
    {
        const auto &hist = mv.edges.at(edge_user).history;
        if (_behavior != behavior::stale_close)
            return hist.back();
        const signed_state *best = &hist.back();
        for (const auto &s: hist)
            if (s.entry(_id) > best->entry(_id))
                best = &s;
        return *best;
    }

    void party::close_merge(const round_t now, const merge_id &merge, const party_id &edge_user, const std::optional<round_t> started)
    {
        const auto obj = edge_subject(merge, edge_user);
        const auto it = _merges.find(merge);
        if (it == _merges.end() || it->second.m.status != merge_status::active || !it->second.m.users.contains(edge_user)
            || (_id != it->second.m.hub && _id != edge_user)) {
            note(now, "command-ignored", { { "reason", "not a side of an active edge" }, { "edge", obj } });
            return;
        }
        auto &mv = it->second;
        if (mv.closing.contains(edge_user)) {
            note(now, "command-ignored", { { "reason", "edge already closing" }, { "edge", obj } });
            return;
        }
        mv.closing.insert(edge_user);
        if (started)
            mv.close_started[edge_user] = *started;
        submit(close_merge_request { merge, edge_user, closing_merge_state(mv), closing_edge_state(mv, edge_user) });
    }

    void party::on_merge_closing(const round_t now, const merge_closing &n)
    {
        const auto it = _merges.find(n.merge);
        if (it == _merges.end() || !it->second.edges.contains(n.edge_user))
            return;
        auto &mv = it->second;
        mv.closing.insert(n.edge_user);
        note(now, "closingM-response", { { "edge", edge_subject(n.merge, n.edge_user) } });
        submit(close_merge_request { n.merge, n.edge_user, closing_merge_state(mv), closing_edge_state(mv, n.edge_user) });
    }

    void party::on_close_check(const round_t now, const merge_close_check &n)
    {
        const auto it = _merges.find(n.merge);
        if (it == _merges.end())
            return;
        const auto &mv = it->second;
        if (mv.latest().version > n.version && _behavior != behavior::stale_close) {
            note(now, "closeM-challenge", { { "merge", n.merge.str() }, { "submitted", n.version }, { "held", mv.latest().version } });
            submit(close_merge_challenge { n.merge, mv.latest() });
        }
    }

    void party::on_merge_closed(const round_t now, const merge_closed &n)
    {
        const auto it = _merges.find(n.merge);
        if (it == _merges.end())
            return;
        auto &mv = it->second;
        std::erase_if(mv.m.edges, [&](const edge &e) { return e.user == n.edge_user; });
        mv.m.users.erase(n.edge_user);
        mv.edges.erase(n.edge_user);
        mv.closing.erase(n.edge_user);
        for (auto &e: mv.m.edges) {
            const auto cap = n.capacities.contains(e.user) ? n.capacities.at(e.user) : e.capacity;
            if (cap == e.capacity)
                continue;
            e.capacity = cap;
            if (e.user_balance > cap)
                e.user_balance = cap;
            e.hub_balance = cap - e.user_balance;
        }
        if (mv.m.users.empty())
            mv.m.status = merge_status::closed;
        if (const auto sit = mv.close_started.find(n.edge_user); sit != mv.close_started.end()) {
            output(now, "closedM", edge_subject(n.merge, n.edge_user), sit->second);
            mv.close_started.erase(sit);
        }
        // the contract runs one edge close at a time and drops requests that arrive meanwhile
        for (const auto &user: mv.closing) {
            note(now, "closeM-resubmit", { { "edge", edge_subject(n.merge, user) } });
            submit(close_merge_request { n.merge, user, closing_merge_state(mv), closing_edge_state(mv, user) });
        }
        for (auto &[cid, cv]: _channels)
            if (cv.close_started && cv.ch.status == channel_status::open && cv.ch.merges.empty())
                maybe_submit_pending_close(now, cid);
    }

    void party::on_channel_adjusted(const round_t now, const channel_adjusted &n)
    {
        const auto it = _channels.find(n.channel);
        if (it == _channels.end())
            return;
        auto &cv = it->second;
        cv.adjustments.push_back(n.delta);
        for (const auto &[p, v]: n.delta)
            cv.ch.balance[p] += v;
        cv.ch.epoch = n.epoch;
        if (cv.ch.merges.contains(n.merge))
            cv.ch.merges.erase(n.merge);
        else
            cv.ch.merges.insert(n.merge);
        note(now, "channel-adjusted", { { "channel", n.channel.str() }, { "epoch", n.epoch } });
    }

    // ---- Procedure (G): close channel

    signed_state party::closing_channel_state(const channel_view &cv) const
    {
        if (_behavior == behavior::stale_close) {
            const signed_state *best = &cv.latest();
            for (const auto &s: cv.history)
                if (cv.payout_from(s).at(_id) > cv.payout_from(*best).at(_id))
                    best = &s;
            return *best;
        }
        if (_behavior == behavior::forge_signature) {
            const auto &other = cv.ch.other(_id);
            balance_map grab { { _id, cv.ch.total() }, { other, 0 } };
            auto forged = make_channel_state(cv.ch.id, cv.ch.version + 1, cv.ch.epoch, grab);
            forged.sign(keys());
            forged.add_signature(keys().forge_as(other, forged.signing_bytes()));
            return forged;
        }
        return cv.latest();
    }

    void party::submit_channel_close(const round_t now, channel_view &cv)
    {
        note(now, "closeC-submit", { { "channel", cv.ch.id.str() } });
        submit(close_channel_request { cv.ch.id, closing_channel_state(cv) });
    }

    void party::maybe_submit_pending_close(const round_t now, const channel_id &id)
    {
        auto &cv = _channels.at(id);
        if (cv.ch.merges.empty() && cv.ch.status == channel_status::open) {
            cv.ch.status = channel_status::closing;
            submit_channel_close(now, cv);
        }
    }

    void party::close_channel(const round_t now, const cmd_close_channel &c)
    {
        const auto obj = c.channel.str();
        const auto it = _channels.find(c.channel);
        if (it == _channels.end() || it->second.ch.status != channel_status::open || it->second.close_started) {
            note(now, "command-ignored", { { "reason", "channel not open" }, { "channel", obj } });
            return;
        }
        auto &cv = it->second;
        cv.close_started = now;
        for (const auto &mid: cv.ch.merges) {
            const auto mit = _merges.find(mid);
            if (mit == _merges.end())
                continue;
            const auto &edge_user = mit->second.m.hub == _id ? cv.ch.other(_id) : _id;
            if (!mit->second.closing.contains(edge_user))
                close_merge(now, mid, edge_user, std::nullopt);
        }
        maybe_submit_pending_close(now, c.channel);
    }

    void party::on_channel_closing(const round_t now, const channel_closing &n)
    {
        const auto it = _channels.find(n.channel);
        if (it == _channels.end())
            return;
        auto &cv = it->second;
        cv.ch.status = channel_status::closing;
        if (_behavior == behavior::forge_signature) {
            // a forged counter-submission would be discarded anyway; answer with the real state
            submit(close_channel_request { cv.ch.id, cv.latest() });
            return;
        }
        submit_channel_close(now, cv);
    }

    // ---- adversarial replays

    void party::replay_merge(const round_t now, const cmd_replay_merge &c)
    {
        const auto it = _merge_requests_sent.find(c.merge);
        if (it == _merge_requests_sent.end()) {
            note(now, "command-ignored", { { "reason", "no merge request to replay" }, { "merge", c.merge.str() } });
            return;
        }
        const auto &req = it->second;
        note(now, "replay-merge", { { "merge", c.merge.str() }, { "timestamp", req.proposal.timestamp } });
        const auto &hub_sig = *std::find_if(req.signatures.begin(), req.signatures.end(), [&](const auto &s) { return s.signer == _id; });
        for (const auto &e: req.proposal.edges)
            send(e.user, merge_request { req.proposal, hub_sig });
        submit(req);
    }

    void party::replay_update(const round_t now, const cmd_replay_update &c)
    {
        const auto it = _last_proposals.find(c.channel);
        if (it == _last_proposals.end()) {
            note(now, "command-ignored", { { "reason", "no update to replay" }, { "channel", c.channel.str() } });
            return;
        }
        note(now, "replay-update", { { "channel", c.channel.str() }, { "version", it->second.msg_c.version } });
        send(it->second.payment.to, it->second);
    }

    // ---- timeouts

    void party::tick(const round_t now)
    {
        for (auto &[cid, cv]: _channels) {
            if (cv.pending && now >= cv.pending_started + 2) {
                output(now, "not-updatedC", cid.str(), cv.pending_started);
                cv.pending.reset();
            }
        }
        for (auto it = _opening_merges.begin(); it != _opening_merges.end();) {
            auto &pom = it->second;
            const auto &prop = pom.request.proposal;
            if (!pom.submitted && now >= pom.started + 2) {
                if (_behavior == behavior::forge_signature) {
                    std::set<party_id> signers;
                    for (const auto &s: pom.request.signatures)
                        signers.insert(s.signer);
                    for (const auto &e: prop.edges)
                        if (!signers.contains(e.user))
                            pom.request.signatures.push_back(keys().forge_as(e.user, prop.signing_bytes()));
                    for (const auto &e: prop.edges)
                        pom.request.channel_states.push_back(_channels.at(e.channel).latest());
                    note(now, "merge-forged", { { "merge", prop.id.str() } });
                    pom.submitted = true;
                    _merge_requests_sent.insert_or_assign(prop.id, pom.request);
                    submit(pom.request);
                } else {
                    for (const auto &e: prop.edges)
                        _channels.at(e.channel).busy = false;
                    output(now, "not-merged", prop.id.str(), pom.started);
                    it = _opening_merges.erase(it);
                    continue;
                }
            } else if (pom.submitted && now > pom.started + 2 + _delta) {
                for (const auto &e: prop.edges)
                    _channels.at(e.channel).busy = false;
                output(now, "not-merged", prop.id.str(), pom.started);
                it = _opening_merges.erase(it);
                continue;
            }
            ++it;
        }
        for (auto it = _joining_merges.begin(); it != _joining_merges.end();) {
            if (now > it->second.started + 1 + _delta) {
                if (const auto *spec = it->second.proposal.find(_id))
                    if (const auto cit = _channels.find(spec->channel); cit != _channels.end())
                        cit->second.busy = false;
                it = _joining_merges.erase(it);
            } else {
                ++it;
            }
        }
        for (auto &[mid, mv]: _merges) {
            for (auto &[user, ev]: mv.edges) {
                if (ev.pending && now >= ev.pending_started + 2) {
                    output(now, "not-updatedE", edge_subject(mid, user), ev.pending_started);
                    ev.pending.reset();
                }
            }
            if (mv.broadcast && now >= mv.broadcast->instance.deadline()) {
                finish_broadcast(now, mv);
            } else if (mv.updating && !mv.updating->broadcasting && now >= mv.updating->started + 2) {
                output(now, "not-updatedM", mid.str(), mv.updating->started);
                mv.updating.reset();
            } else if (mv.signing_since && now >= *mv.signing_since + 3) {
                mv.signing_since.reset();
            }
        }
    }
}
