#include <algorithm>
#include <starfish/engine/world.hpp>

namespace starfish {
    namespace {
        std::vector<party_id> keys_of(const balance_map &m)
        {
            std::vector<party_id> out;
            for (const auto &[p, _]: m)
                out.push_back(p);
            return out;
        }

        const std::string contract_address = "~contract";
    }

    bool world::later::operator()(const envelope &x, const envelope &y) const
    {
        return std::tie(x.deliver, x.sender, x.recipient, x.seq) > std::tie(y.deliver, y.sender, y.recipient, y.seq);
    }

    world::world(balance_map funding, world_config cfg, const std::map<party_id, behavior> &adversary):
        _cfg { cfg }, _keys { key_registry::derive(keys_of(funding), cfg.key_seed) }
    {
        for (const auto &[p, v]: funding)
            if (v < 0)
                throw error("negative funding for party " + p.str());
        for (const auto &[p, _]: adversary)
            if (!funding.contains(p))
                throw error("adversary names unknown party " + p.str());
        ledger initial { funding };
        _endowment = initial.total();
        _host = std::make_unique<contract_host>(std::move(initial), cfg.delta, _keys, _log);
        for (const auto &[p, _]: funding) {
            const auto it = adversary.find(p);
            const auto b = it == adversary.end() ? behavior::honest : it->second;
            _parties.emplace(p, std::make_unique<party>(p, b, _keys, cfg.delta, _host->ledger_state(), _log));
        }
        _log.set_enabled(cfg.log_messages);
    }

    const party &world::member(const party_id &p) const
    {
        const auto it = _parties.find(p);
        if (it == _parties.end())
            throw error("unknown party " + p.str());
        return *it->second;
    }

    void world::schedule(scheduled_command c)
    {
        if (!_parties.contains(c.party))
            throw error("command for unknown party " + c.party.str());
        if (c.round < _round)
            throw error("command scheduled in the past");
        _schedule.emplace(c.round, std::move(c));
    }

    void world::flush(party &p)
    {
        auto box = p.take_outbox();
        for (auto &[to, msg]: box.messages) {
            if (!_parties.contains(to))
                continue;
            _bus.push_back({ _round + 1, p.id().str(), to.str(), _seq++, p.id(), to, std::move(msg) });
            std::push_heap(_bus.begin(), _bus.end(), later {});
        }
        for (auto &req: box.requests) {
            _bus.push_back({ _round + _cfg.delta, p.id().str(), contract_address, _seq++, p.id(), {}, std::move(req) });
            std::push_heap(_bus.begin(), _bus.end(), later {});
        }
        for (auto &o: box.outputs)
            _outputs.push_back(std::move(o));
    }

    void world::enqueue_notices(std::vector<addressed_notice> notices)
    {
        for (auto &n: notices) {
            if (!_parties.contains(n.to))
                continue;
            _bus.push_back({ _round, contract_address, n.to.str(), _seq++, {}, n.to, std::move(n.notice) });
            std::push_heap(_bus.begin(), _bus.end(), later {});
        }
    }

    void world::deliver_due()
    {
        while (!_bus.empty() && _bus.front().deliver <= _round) {
            std::pop_heap(_bus.begin(), _bus.end(), later {});
            auto env = std::move(_bus.back());
            _bus.pop_back();
            if (auto *m = std::get_if<party_message>(&env.payload)) {
                if (_cfg.log_messages)
                    _log.append(_round, "bus", "deliver", { { "from", env.sender }, { "to", env.recipient }, { "type", message_name(*m) } });
                auto &p = *_parties.at(env.to);
                p.receive(_round, env.from, *m);
                flush(p);
            } else if (auto *r = std::get_if<contract_request>(&env.payload)) {
                if (_cfg.log_messages)
                    _log.append(_round, "bus", "request", { { "from", env.sender }, { "type", request_name(*r) }, { "body", to_json(*r) } });
                enqueue_notices(_host->handle(_round, env.from, *r));
            } else {
                const auto &n = std::get<contract_notice>(env.payload);
                if (_cfg.log_messages)
                    _log.append(_round, "bus", "notice", { { "to", env.recipient }, { "type", notice_name(n) } });
                auto &p = *_parties.at(env.to);
                p.notify(_round, n);
                flush(p);
            }
            audit("deliver");
        }
    }

    void world::run_round()
    {
        const auto [first, last] = _schedule.equal_range(_round);
        for (auto it = first; it != last; ++it) {
            auto &p = *_parties.at(it->second.party);
            p.execute(_round, it->second.cmd);
            flush(p);
        }
        _schedule.erase(first, last);
        deliver_due();
        enqueue_notices(_host->tick(_round));
        deliver_due();
        for (auto &[_, p]: _parties) {
            p->tick(_round);
            flush(*p);
        }
        deliver_due();
        audit("round");
        ++_round;
    }

    void world::run_until(const round_t round)
    {
        while (_round < round)
            run_round();
    }

    bool world::quiescent() const
    {
        if (!_schedule.empty() || !_bus.empty() || !_host->idle())
            return false;
        return std::all_of(_parties.begin(), _parties.end(), [](const auto &kv) { return kv.second->idle(); });
    }

    round_t world::run_to_quiescence(const round_t max_rounds)
    {
        const auto limit = _round + max_rounds;
        do {
            run_round();
        } while (!quiescent() && _round < limit);
        return _round;
    }

    const party_output *world::find_output(const party_id &p, const std::string_view name, const std::string_view object) const
    {
        for (const auto &o: _outputs)
            if (o.party == p && o.name == name && o.object == object)
                return &o;
        return nullptr;
    }

    void world::audit(const char *step)
    {
        if (!_cfg.audit)
            return;
        ++_audits;
        auto flag = [&](std::string what) {
            _log.append(_round, "auditor", "violation", { { "step", step }, { "what", what } });
            _violations.push_back({ _round, std::move(what) });
        };
        const auto &host = *_host;
        const auto total = total_coins(host.ledger_state(), host.channels(), host.merges());
        if (total != _endowment)
            flag("conservation: total " + std::to_string(total) + " differs from endowment " + std::to_string(_endowment));
        for (auto &v: negative_entries(host.ledger_state(), host.channels(), host.merges()))
            flag("non-negativity: " + v);

        for (const auto &[pid, pp]: _parties) {
            const auto &p = *pp;
            if (!p.honest())
                continue;
            for (const auto &[cid, cv]: p.channels()) {
                for (const auto &[q, v]: cv.ch.balance)
                    if (v < 0 && cv.ch.status == channel_status::open)
                        flag("party " + pid.str() + " holds a negative balance in " + cid.str());
                if (cv.ch.status != channel_status::open)
                    continue;
                const auto &other = member(cv.ch.other(pid));
                const auto *ov = other.channel_state(cid);
                if (other.honest() && ov && ov->ch.status == channel_status::open && ov->ch.version == cv.ch.version
                    && ov->ch.epoch == cv.ch.epoch && ov->ch.balance != cv.ch.balance)
                    flag("honest views of " + cid.str() + " disagree at version " + std::to_string(cv.ch.version));
            }
            for (const auto &[mid, mv]: p.merges()) {
                if (mv.m.status != merge_status::active || mv.m.hub != pid)
                    continue;
                amount_t hub_side = 0;
                for (const auto &e: mv.m.edges) {
                    hub_side += e.hub_balance;
                    if (!e.consistent())
                        flag("hub view of edge " + edge_subject(mid, e.user) + " is inconsistent");
                    const auto &u = member(e.user);
                    const auto *uv = u.merge_state(mid);
                    if (!u.honest() || !uv)
                        continue;
                    const auto *ue = uv->m.find_edge(e.user);
                    if (ue && ue->version == e.version && (ue->hub_balance != e.hub_balance || ue->user_balance != e.user_balance))
                        flag("honest views of edge " + edge_subject(mid, e.user) + " disagree");
                }
                if (hub_side > mv.m.pooled_capacity())
                    flag("hub-side balances of " + mid.str() + " exceed pooled capacity");
            }
        }
    }
}
