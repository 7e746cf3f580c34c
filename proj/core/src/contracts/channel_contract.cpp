#include <starfish/contracts/contract_host.hpp>

namespace starfish {
    namespace {
        // Two-party payout with a negative side clamped to zero; the total is preserved.
        balance_map clamp_pair(balance_map m)
        {
            amount_t total = 0;
            for (const auto &[_, v]: m)
                total += v;
            for (auto &[p, v]: m) {
                if (v < 0) {
                    for (auto &[q, w]: m)
                        w = q == p ? 0 : total;
                    break;
                }
            }
            return m;
        }

        signed_state funding_state(const channel_spec &spec)
        {
            return make_channel_state(spec.id, 0, 0, { { spec.a, spec.fund_a }, { spec.b, spec.fund_b } });
        }
    }

    amount_t channel_record::escrow_at(const std::uint64_t epoch) const
    {
        amount_t total = spec.fund_a + spec.fund_b;
        for (std::uint64_t i = 0; i < epoch && i < adjustments.size(); ++i)
            for (const auto &[_, v]: adjustments[i])
                total += v;
        return total;
    }

    balance_map channel_record::payout_from(const signed_state &s) const
    {
        balance_map out { { spec.a, s.entry(spec.a) }, { spec.b, s.entry(spec.b) } };
        for (auto i = s.epoch; i < adjustments.size(); ++i)
            for (const auto &[p, v]: adjustments[i])
                out[p] += v;
        return out;
    }

    bool contract_host::valid_channel_state(const channel_record &rec, const signed_state &s) const
    {
        if (s.kind != state_kind::channel || s.subject != rec.spec.id.str())
            return false;
        if (s.version == 0)
            return s.same_content(funding_state(rec.spec));
        if (s.entries.size() != 2 || !s.entries.contains(rec.spec.a) || !s.entries.contains(rec.spec.b))
            return false;
        if (!s.non_negative() || s.epoch > rec.adjustments.size() || s.total() != rec.escrow_at(s.epoch))
            return false;
        return s.signed_by(_keys, rec.spec.a) && s.signed_by(_keys, rec.spec.b);
    }

    void contract_host::consider_channel_state(channel_record &rec, channel &ch, const signed_state &s)
    {
        if (s.version <= rec.best.version || !valid_channel_state(rec, s))
            return;
        rec.best = s;
        ch.version = s.version;
        ch.balance = clamp_pair(rec.payout_from(rec.best));
    }

    std::vector<addressed_notice> contract_host::on_open_channel(const round_t now, const party_id &sender, const open_channel_request &req)
    {
        std::vector<addressed_notice> out;
        const auto &spec = req.spec;
        const auto src = spec.id.str();
        const bool well_formed = !spec.id.empty() && spec.a != spec.b && spec.fund_a >= 0 && spec.fund_b >= 0
            && (sender == spec.a || sender == spec.b);
        if (!well_formed) {
            note(now, src, "open-ignored", { { "reason", "malformed" }, { "sender", sender.str() } });
            return out;
        }
        const auto it = _channel_records.find(spec.id);
        if (it == _channel_records.end()) {
            const auto res = _ledger.remove(sender, spec.funding_of(sender));
            if (res != ledger_result::ok) {
                note(now, src, "open-aborted", { { "reason", to_string(res) }, { "sender", sender.str() } });
                out.push_back({ sender, channel_not_opened { spec.id } });
                return out;
            }
            channel ch;
            ch.id = spec.id;
            ch.a = spec.a;
            ch.b = spec.b;
            ch.balance = { { spec.a, 0 }, { spec.b, 0 } };
            ch.balance[sender] = spec.funding_of(sender);
            _channels.emplace(spec.id, std::move(ch));
            channel_record rec { spec, now, sender, funding_state(spec) };
            _channel_records.emplace(spec.id, std::move(rec));
            note(now, src, "opening", to_json(spec));
            const auto &other = sender == spec.a ? spec.b : spec.a;
            out.push_back({ other, channel_opening { spec } });
            return out;
        }
        auto &rec = it->second;
        auto &ch = _channels.at(spec.id);
        if (ch.status != channel_status::proposed || sender == rec.opener || !(spec == rec.spec) || now > rec.opened_request + _delta) {
            note(now, src, "open-ignored", { { "sender", sender.str() } });
            return out;
        }
        const auto res = _ledger.remove(sender, spec.funding_of(sender));
        if (res != ledger_result::ok) {
            note(now, src, "open-ignored", { { "reason", to_string(res) }, { "sender", sender.str() } });
            return out;
        }
        ch.balance = { { spec.a, spec.fund_a }, { spec.b, spec.fund_b } };
        ch.status = channel_status::open;
        note(now, src, "opened", to_json(spec));
        out.push_back({ spec.a, channel_opened { spec } });
        out.push_back({ spec.b, channel_opened { spec } });
        return out;
    }

    std::vector<addressed_notice> contract_host::on_close_channel(const round_t now, const party_id &sender, const close_channel_request &req)
    {
        std::vector<addressed_notice> out;
        const auto src = req.channel.str();
        const auto rit = _channel_records.find(req.channel);
        if (rit == _channel_records.end()) {
            note(now, src, "closeC-ignored", { { "reason", "unknown channel" } });
            return out;
        }
        auto &rec = rit->second;
        auto &ch = _channels.at(req.channel);
        if ((ch.status != channel_status::open && ch.status != channel_status::closing) || !ch.has_user(sender)) {
            note(now, src, "closeC-ignored", { { "reason", "not open" }, { "sender", sender.str() } });
            return out;
        }
        if (!ch.merges.empty()) {
            note(now, src, "closeC-ignored", { { "reason", "channel still merged" }, { "sender", sender.str() } });
            return out;
        }
        if (!valid_channel_state(rec, req.msg_c)) {
            note(now, src, "closeC-ignored", { { "reason", "invalid msgC" }, { "sender", sender.str() } });
            return out;
        }
        if (!rec.closing) {
            rec.closing = pending_channel_close { sender, now, now + 4 * _delta };
            ch.status = channel_status::closing;
            consider_channel_state(rec, ch, req.msg_c);
            note(now, src, "closingC", { { "initiator", sender.str() }, { "version", req.msg_c.version }, { "deadline", rec.closing->deadline } });
            out.push_back({ ch.other(sender), channel_closing { ch.id } });
            return out;
        }
        if (sender == rec.closing->initiator) {
            note(now, src, "closeC-ignored", { { "reason", "already closing" }, { "sender", sender.str() } });
            return out;
        }
        consider_channel_state(rec, ch, req.msg_c);
        note(now, src, "closeC-response", { { "sender", sender.str() }, { "version", req.msg_c.version } });
        settle_channel(now, ch.id, out);
        return out;
    }

    void contract_host::settle_channel(const round_t now, const channel_id &id, std::vector<addressed_notice> &out)
    {
        auto &rec = _channel_records.at(id);
        auto &ch = _channels.at(id);
        const auto payout = clamp_pair(rec.payout_from(rec.best));
        for (const auto &[p, v]: payout)
            _ledger.add(p, v);
        for (auto &[_, v]: ch.balance)
            v = 0;
        ch.status = channel_status::closed;
        rec.closing.reset();
        note(now, id.str(), "closedC", { { "version", rec.best.version }, { "payout", to_json(payout) } });
        out.push_back({ ch.a, channel_closed { id, payout } });
        out.push_back({ ch.b, channel_closed { id, payout } });
    }

    void contract_host::adjust_channel(const round_t now, const channel_id &id, const merge_id &merge, const balance_map &delta,
        std::vector<addressed_notice> &out)
    {
        auto &rec = _channel_records.at(id);
        auto &ch = _channels.at(id);
        rec.adjustments.push_back(delta);
        ch.epoch = rec.adjustments.size();
        ch.balance = clamp_pair(rec.payout_from(rec.best));
        const channel_adjusted notice { id, merge, delta, ch.epoch };
        note(now, id.str(), "chan-adjusted", to_json(contract_notice { notice }));
        out.push_back({ ch.a, notice });
        out.push_back({ ch.b, notice });
    }

    void contract_host::tick_channels(const round_t now, std::vector<addressed_notice> &out)
    {
        for (auto &[id, rec]: _channel_records) {
            auto &ch = _channels.at(id);
            if (ch.status == channel_status::proposed && now > rec.opened_request + _delta) {
                const auto refund = ch.balance_of(rec.opener);
                _ledger.add(rec.opener, refund);
                for (auto &[_, v]: ch.balance)
                    v = 0;
                ch.status = channel_status::closed;
                note(now, id.str(), "not-opened", { { "refunded", rec.opener.str() }, { "amount", refund } });
                out.push_back({ rec.opener, channel_not_opened { id } });
            } else if (rec.closing && now >= rec.closing->deadline) {
                settle_channel(now, id, out);
            }
        }
    }
}
