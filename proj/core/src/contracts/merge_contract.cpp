#include <starfish/contracts/contract_host.hpp>

namespace starfish {
    signed_state edge_baseline(const merge_record &rec, const party_id &user)
    {
        const auto *spec = rec.proposal.find(user);
        const amount_t cap = spec ? spec->capacity : 0;
        return make_edge_state(rec.proposal.id, rec.proposal.hub, user, 0, cap, 0);
    }

    bool contract_host::valid_merge_state(const merge &m, const signed_state &s) const
    {
        if (s.kind != state_kind::merge || s.subject != m.id.str() || !s.non_negative())
            return false;
        const auto &rec = _merge_records.at(m.id);
        if (s.version == 0)
            return s.same_content(make_merge_state(m.id, 0, rec.proposal.capacities()));
        amount_t current = 0;
        for (const auto &u: m.users) {
            if (!s.entries.contains(u))
                return false;
            current += s.entry(u);
        }
        for (const auto &[u, _]: s.entries)
            if (!rec.proposal.find(u))
                return false;
        if (current != m.pooled_capacity())
            return false;
        if (!s.signed_by(_keys, m.hub))
            return false;
        for (const auto &[u, _]: s.entries)
            if (!s.signed_by(_keys, u))
                return false;
        return true;
    }

    bool contract_host::valid_edge_state(const merge &m, const party_id &user, const signed_state &s) const
    {
        if (s.kind != state_kind::edge || s.subject != edge_subject(m.id, user) || !s.non_negative())
            return false;
        if (s.entries.size() != 2 || !s.entries.contains(m.hub) || !s.entries.contains(user))
            return false;
        if (s.version == 0)
            return s.same_content(edge_baseline(_merge_records.at(m.id), user));
        return s.signed_by(_keys, m.hub) && s.signed_by(_keys, user);
    }

    std::vector<addressed_notice> contract_host::on_open_merge(const round_t now, const party_id &sender, const open_merge_request &req)
    {
        std::vector<addressed_notice> out;
        const auto &prop = req.proposal;
        const auto src = prop.id.str();
        if (prop.id.empty() || _merge_records.contains(prop.id)) {
            note(now, src, "merge-ignored", { { "reason", "merge id already used" }, { "sender", sender.str() } });
            return out;
        }
        auto reject = [&](const std::string &reason) {
            note(now, src, "not-merged", { { "reason", reason } });
            out.push_back({ prop.hub, merge_not_opened { prop.id, reason } });
            for (const auto &e: prop.edges)
                out.push_back({ e.user, merge_not_opened { prop.id, reason } });
            return out;
        };
        if (sender != prop.hub || prop.edges.empty()) {
            note(now, src, "merge-ignored", { { "reason", "malformed request" }, { "sender", sender.str() } });
            return out;
        }
        std::set<party_id> users;
        std::set<channel_id> chans;
        for (const auto &e: prop.edges) {
            if (e.user == prop.hub || !users.insert(e.user).second || !chans.insert(e.channel).second || e.capacity < 0)
                return reject("malformed edge list");
        }
        const auto bytes = prop.signing_bytes();
        auto signed_by = [&](const party_id &p) {
            for (const auto &sig: req.signatures)
                if (sig.signer == p && _keys.verify(p, bytes, sig))
                    return true;
            return false;
        };
        if (!signed_by(prop.hub))
            return reject("missing or invalid hub signature");
        for (const auto &u: users)
            if (!signed_by(u))
                return reject("missing or invalid signature of " + u.str());

        for (const auto &s: req.channel_states) {
            const channel_id cid { s.subject };
            if (!chans.contains(cid))
                continue;
            const auto rit = _channel_records.find(cid);
            if (rit != _channel_records.end())
                consider_channel_state(rit->second, _channels.at(cid), s);
        }
        for (const auto &e: prop.edges) {
            const auto cit = _channels.find(e.channel);
            if (cit == _channels.end() || cit->second.status != channel_status::open)
                return reject("channel " + e.channel.str() + " is not open");
            const auto &ch = cit->second;
            const auto &rec = _channel_records.at(e.channel);
            if (!ch.has_user(prop.hub) || !ch.has_user(e.user))
                return reject("channel " + e.channel.str() + " does not connect hub and " + e.user.str());
            if (rec.best.version != e.channel_version || ch.epoch != e.channel_epoch)
                return reject("channel " + e.channel.str() + " state differs from the signed proposal");
            if (ch.balance_of(prop.hub) < e.capacity)
                return reject("hub balance in " + e.channel.str() + " below capacity");
        }

        merge m { prop.id, prop.hub, users, {}, 0, merge_status::active };
        for (const auto &e: prop.edges)
            m.edges.push_back({ e.channel, prop.hub, e.user, e.capacity, e.capacity, 0, 0 });
        _merges.emplace(prop.id, std::move(m));
        _merge_records.emplace(prop.id, merge_record { prop, make_merge_state(prop.id, 0, prop.capacities()) });
        for (const auto &e: prop.edges) {
            _channels.at(e.channel).merges.insert(prop.id);
            adjust_channel(now, e.channel, prop.id, { { prop.hub, -e.capacity } }, out);
        }
        note(now, src, "merged", to_json(prop));
        out.push_back({ prop.hub, merge_opened { prop } });
        for (const auto &u: users)
            out.push_back({ u, merge_opened { prop } });
        return out;
    }

    void contract_host::send_close_checks(const round_t now, const merge &m, const pending_merge_close &pc, std::vector<addressed_notice> &out)
    {
        note(now, m.id.str(), "closeM-check", { { "edge", pc.edge_user.str() }, { "version", pc.best_m.version } });
        for (const auto &u: m.users)
            if (u != pc.edge_user)
                out.push_back({ u, merge_close_check { m.id, pc.edge_user, pc.best_m.version } });
    }

    std::vector<addressed_notice> contract_host::on_close_merge(const round_t now, const party_id &sender, const close_merge_request &req)
    {
        std::vector<addressed_notice> out;
        const auto src = req.merge.str();
        const auto mit = _merges.find(req.merge);
        if (mit == _merges.end() || mit->second.status != merge_status::active) {
            note(now, src, "closeM-ignored", { { "reason", "merge not active" }, { "sender", sender.str() } });
            return out;
        }
        auto &m = mit->second;
        auto &rec = _merge_records.at(req.merge);
        if (!m.users.contains(req.edge_user) || (sender != m.hub && sender != req.edge_user)) {
            note(now, src, "closeM-ignored", { { "reason", "sender not on edge" }, { "sender", sender.str() } });
            return out;
        }
        if (!rec.closing) {
            if (!valid_merge_state(m, req.msg_m) || !valid_edge_state(m, req.edge_user, req.msg_e)) {
                note(now, src, "closeM-ignored", { { "reason", "invalid state" }, { "sender", sender.str() } });
                return out;
            }
            pending_merge_close pc;
            pc.edge_user = req.edge_user;
            pc.initiator = sender;
            pc.counterparty = sender == m.hub ? req.edge_user : m.hub;
            pc.started = now;
            pc.best_m = req.msg_m.version > rec.certified.version ? req.msg_m : rec.certified;
            const auto baseline = edge_baseline(rec, req.edge_user);
            pc.best_e = req.msg_e.version > baseline.version ? req.msg_e : baseline;
            note(now, src, "closingM", { { "edge", req.edge_user.str() }, { "initiator", sender.str() },
                { "versionM", pc.best_m.version }, { "versionE", pc.best_e.version } });
            out.push_back({ pc.counterparty, merge_closing { m.id, req.edge_user } });
            send_close_checks(now, m, pc, out);
            rec.closing = std::move(pc);
            return out;
        }
        auto &pc = *rec.closing;
        if (sender != pc.counterparty || req.edge_user != pc.edge_user || pc.counterparty_responded || now > pc.started + _delta) {
            note(now, src, "closeM-ignored", { { "reason", "close already pending" }, { "sender", sender.str() } });
            return out;
        }
        pc.counterparty_responded = true;
        bool improved_m = false;
        if (req.msg_m.version > pc.best_m.version && valid_merge_state(m, req.msg_m)) {
            pc.best_m = req.msg_m;
            improved_m = true;
        }
        if (req.msg_e.version > pc.best_e.version && valid_edge_state(m, pc.edge_user, req.msg_e))
            pc.best_e = req.msg_e;
        note(now, src, "closeM-response", { { "sender", sender.str() }, { "versionM", pc.best_m.version }, { "versionE", pc.best_e.version } });
        if (improved_m)
            send_close_checks(now, m, pc, out);
        return out;
    }

    std::vector<addressed_notice> contract_host::on_challenge(const round_t now, const party_id &sender, const close_merge_challenge &req)
    {
        std::vector<addressed_notice> out;
        const auto src = req.merge.str();
        const auto mit = _merges.find(req.merge);
        auto *rec = mit == _merges.end() ? nullptr : &_merge_records.at(req.merge);
        if (!rec || !rec->closing || now > rec->closing->started + 2 * _delta) {
            note(now, src, "closeM-challenge-ignored", { { "reason", "no open challenge window" }, { "sender", sender.str() } });
            return out;
        }
        const auto &m = mit->second;
        if (!m.users.contains(sender) && sender != m.hub) {
            note(now, src, "closeM-challenge-ignored", { { "reason", "not a merge user" }, { "sender", sender.str() } });
            return out;
        }
        auto &pc = *rec->closing;
        if (req.msg_m.version > pc.best_m.version && valid_merge_state(m, req.msg_m)) {
            pc.best_m = req.msg_m;
            note(now, src, "closeM-challenge", { { "sender", sender.str() }, { "versionM", req.msg_m.version } });
        } else {
            note(now, src, "closeM-challenge-ignored", { { "reason", "not newer or invalid" }, { "sender", sender.str() },
                { "versionM", req.msg_m.version } });
        }
        return out;
    }

    void contract_host::finalize_merge_close(const round_t now, const merge_id &id, std::vector<addressed_notice> &out)
    {
        auto &m = _merges.at(id);
        auto &rec = _merge_records.at(id);
        const auto pc = *rec.closing;
        rec.closing.reset();
        const auto &user = pc.edge_user;
        const amount_t cap = pc.best_m.entry(user);
        amount_t user_bal = pc.best_e.entry(user);
        amount_t hub_bal = cap - user_bal;
        if (hub_bal < 0) {
            user_bal = cap;
            hub_bal = 0;
        }
        const auto channel = m.find_edge(user)->channel;

        std::map<party_id, amount_t> remaining;
        for (const auto &u: m.users)
            if (u != user)
                remaining.emplace(u, pc.best_m.entry(u));
        std::erase_if(m.edges, [&](const edge &e) { return e.user == user; });
        m.users.erase(user);
        for (auto &e: m.edges) {
            e.capacity = remaining.at(e.user);
            e.hub_balance = e.capacity;
            e.user_balance = 0;
        }
        rec.certified = make_merge_state(id, pc.best_m.version, remaining);
        if (m.users.empty())
            m.status = merge_status::closed;
        m.version = pc.best_m.version;

        const balance_map payout { { m.hub, hub_bal }, { user, user_bal } };
        note(now, id.str(), "closedM", { { "edge", user.str() }, { "versionM", pc.best_m.version }, { "versionE", pc.best_e.version },
            { "capacity", cap }, { "edge_payout", to_json(payout) }, { "remaining", to_json(remaining) } });
        _channels.at(channel).merges.erase(id);
        adjust_channel(now, channel, id, payout, out);
        const merge_closed notice { id, user, pc.best_m.version, remaining, payout };
        out.push_back({ m.hub, notice });
        out.push_back({ user, notice });
        for (const auto &u: m.users)
            out.push_back({ u, notice });
    }

    void contract_host::tick_merges(const round_t now, std::vector<addressed_notice> &out)
    {
        for (auto &[id, rec]: _merge_records) {
            if (!rec.closing)
                continue;
            auto &pc = *rec.closing;
            if (!pc.counterparty_responded && !pc.timeout_logged && now > pc.started + _delta) {
                pc.timeout_logged = true;
                note(now, id.str(), "timeout", { { "edge", pc.edge_user.str() }, { "silent", pc.counterparty.str() } });
            }
            if (now >= pc.started + 2 * _delta)
                finalize_merge_close(now, id, out);
        }
    }
}
