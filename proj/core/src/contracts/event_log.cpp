#include <ostream>
#include <sstream>
#include <starfish/contracts/event_log.hpp>

namespace starfish {
    namespace {
        template<class... Ts>
        struct overloaded: Ts... {
            using Ts::operator()...;
        };
        template<class... Ts>
        overloaded(Ts...) -> overloaded<Ts...>;
    }

    void event_log::append(const round_t round, std::string source, std::string event, nlohmann::json payload)
    {
        if (!_enabled)
            return;
        _records.push_back({ round, std::move(source), std::move(event), std::move(payload) });
    }

    void event_log::write_jsonl(std::ostream &os) const
    {
        for (const auto &r: _records) {
            nlohmann::ordered_json line;
            line["round"] = r.round;
            line["source"] = r.source;
            line["event"] = r.event;
            line["payload"] = r.payload;
            os << line.dump() << '\n';
        }
    }

    std::string event_log::to_jsonl() const
    {
        std::ostringstream os;
        write_jsonl(os);
        return os.str();
    }

    nlohmann::json to_json(const balance_map &m)
    {
        auto j = nlohmann::json::object();
        for (const auto &[p, v]: m)
            j[p.str()] = v;
        return j;
    }

    nlohmann::json to_json(const signed_state &s)
    {
        auto signers = nlohmann::json::array();
        for (const auto &[p, _]: s.signatures)
            signers.push_back(p.str());
        return {
            { "kind", to_string(s.kind) },
            { "subject", s.subject },
            { "version", s.version },
            { "epoch", s.epoch },
            { "entries", to_json(s.entries) },
            { "signers", signers },
        };
    }

    nlohmann::json to_json(const merge_proposal &p)
    {
        auto edges = nlohmann::json::array();
        for (const auto &e: p.edges)
            edges.push_back({ { "user", e.user.str() }, { "channel", e.channel.str() }, { "capacity", e.capacity },
                { "channel_version", e.channel_version }, { "channel_epoch", e.channel_epoch } });
        return { { "merge", p.id.str() }, { "hub", p.hub.str() }, { "timestamp", p.timestamp }, { "edges", edges } };
    }

    nlohmann::json to_json(const channel_spec &s)
    {
        return { { "channel", s.id.str() }, { "a", s.a.str() }, { "b", s.b.str() }, { "fund_a", s.fund_a }, { "fund_b", s.fund_b } };
    }

    nlohmann::json to_json(const contract_request &r)
    {
        return std::visit(overloaded {
            [](const open_channel_request &m) { return to_json(m.spec); },
            [](const open_merge_request &m) {
                auto j = to_json(m.proposal);
                j["signatures"] = m.signatures.size();
                return j;
            },
            [](const close_merge_request &m) {
                return nlohmann::json { { "merge", m.merge.str() }, { "edge", m.edge_user.str() },
                    { "msgM", to_json(m.msg_m) }, { "msgE", to_json(m.msg_e) } };
            },
            [](const close_merge_challenge &m) {
                return nlohmann::json { { "merge", m.merge.str() }, { "msgM", to_json(m.msg_m) } };
            },
            [](const close_channel_request &m) {
                return nlohmann::json { { "channel", m.channel.str() }, { "msgC", to_json(m.msg_c) } };
            },
        }, r);
    }

    nlohmann::json to_json(const contract_notice &n)
    {
        return std::visit(overloaded {
            [](const channel_opening &m) { return to_json(m.spec); },
            [](const channel_opened &m) { return to_json(m.spec); },
            [](const channel_not_opened &m) { return nlohmann::json { { "channel", m.channel.str() } }; },
            [](const channel_adjusted &m) {
                return nlohmann::json { { "channel", m.channel.str() }, { "merge", m.merge.str() },
                    { "delta", to_json(m.delta) }, { "epoch", m.epoch } };
            },
            [](const merge_opened &m) { return to_json(m.proposal); },
            [](const merge_not_opened &m) { return nlohmann::json { { "merge", m.merge.str() }, { "reason", m.reason } }; },
            [](const merge_closing &m) { return nlohmann::json { { "merge", m.merge.str() }, { "edge", m.edge_user.str() } }; },
            [](const merge_close_check &m) {
                return nlohmann::json { { "merge", m.merge.str() }, { "edge", m.edge_user.str() }, { "version", m.version } };
            },
            [](const merge_closed &m) {
                return nlohmann::json { { "merge", m.merge.str() }, { "edge", m.edge_user.str() }, { "version", m.version },
                    { "capacities", to_json(m.capacities) }, { "edge_payout", to_json(m.edge_payout) } };
            },
            [](const channel_closing &m) { return nlohmann::json { { "channel", m.channel.str() } }; },
            [](const channel_closed &m) { return nlohmann::json { { "channel", m.channel.str() }, { "payout", to_json(m.payout) } }; },
        }, n);
    }

    std::string_view request_name(const contract_request &r)
    {
        static constexpr std::string_view names[] = { "open", "merge", "closeM", "closeM-challenge", "closeC" };
        return names[r.index()];
    }

    std::string_view notice_name(const contract_notice &n)
    {
        static constexpr std::string_view names[] = { "opening", "opened", "not-opened", "chan-adjusted", "merged",
            "not-merged", "closingM", "closeM-check", "closedM", "closingC", "closedC" };
        return names[n.index()];
    }
}
