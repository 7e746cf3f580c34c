#include <fstream>
#include <sstream>
#include <starfish/engine/scenario.hpp>

namespace starfish {
    namespace {
        using json = nlohmann::json;

        [[noreturn]] void fail(const std::string &path, const std::string &what)
        {
            throw error(path + ": " + what);
        }

        const json &field(const json &obj, const std::string &path, const char *key)
        {
            if (!obj.is_object() || !obj.contains(key))
                fail(path, std::string { "missing field '" } + key + "'");
            return obj.at(key);
        }

        std::string text_of(const json &obj, const std::string &path, const char *key)
        {
            const auto &v = field(obj, path, key);
            if (!v.is_string() || v.get<std::string>().empty())
                fail(path + "." + key, "expected a non-empty string");
            return v.get<std::string>();
        }

        amount_t amount_of(const json &obj, const std::string &path, const char *key, std::optional<amount_t> fallback = std::nullopt)
        {
            if (fallback && (!obj.is_object() || !obj.contains(key)))
                return *fallback;
            const auto &v = field(obj, path, key);
            if (!v.is_number_integer())
                fail(path + "." + key, "expected an integer amount");
            const auto a = v.get<amount_t>();
            if (a < 0)
                fail(path + "." + key, "amount must be non-negative");
            return a;
        }

        command parse_command(const std::string &op, const json &args, const std::string &path)
        {
            if (op == "open_channel")
                return cmd_open_channel { channel_id { text_of(args, path, "channel") }, party_id { text_of(args, path, "with") },
                    amount_of(args, path, "fund"), amount_of(args, path, "counter_fund", 0) };
            if (op == "update_channel")
                return cmd_update_channel { channel_id { text_of(args, path, "channel") }, amount_of(args, path, "amount") };
            if (op == "open_merge") {
                cmd_open_merge c { merge_id { text_of(args, path, "merge") }, {} };
                const auto &edges = field(args, path, "edges");
                if (!edges.is_array() || edges.empty())
                    fail(path + ".edges", "expected a non-empty array");
                for (std::size_t i = 0; i < edges.size(); ++i) {
                    const auto p = path + ".edges[" + std::to_string(i) + "]";
                    c.edges.emplace_back(channel_id { text_of(edges[i], p, "channel") }, amount_of(edges[i], p, "capacity"));
                }
                return c;
            }
            if (op == "update_edge")
                return cmd_update_edge { merge_id { text_of(args, path, "merge") }, party_id { text_of(args, path, "edge") },
                    amount_of(args, path, "amount") };
            if (op == "update_merge")
                return cmd_update_merge { merge_id { text_of(args, path, "merge") },
                    merge_update { party_id { text_of(args, path, "from") }, party_id { text_of(args, path, "to") }, amount_of(args, path, "amount") } };
            if (op == "close_merge")
                return cmd_close_merge { merge_id { text_of(args, path, "merge") }, party_id { text_of(args, path, "edge") } };
            if (op == "close_channel")
                return cmd_close_channel { channel_id { text_of(args, path, "channel") } };
            if (op == "replay_merge")
                return cmd_replay_merge { merge_id { text_of(args, path, "merge") } };
            if (op == "replay_update")
                return cmd_replay_update { channel_id { text_of(args, path, "channel") } };
            fail(path + ".op", "unknown operation '" + op + "'");
        }
    }

    scenario parse_scenario(const json &j)
    {
        if (!j.is_object())
            fail("$", "expected a JSON object");
        scenario s;
        if (j.contains("name")) {
            if (!j["name"].is_string())
                fail("$.name", "expected a string");
            s.name = j["name"].get<std::string>();
        }
        if (j.contains("delta")) {
            if (!j["delta"].is_number_unsigned() || j["delta"].get<round_t>() == 0)
                fail("$.delta", "expected a positive integer");
            s.delta = j["delta"].get<round_t>();
        }
        if (j.contains("seed")) {
            if (!j["seed"].is_number_unsigned())
                fail("$.seed", "expected a non-negative integer");
            s.seed = j["seed"].get<std::uint64_t>();
        }
        if (j.contains("rounds")) {
            if (!j["rounds"].is_number_unsigned())
                fail("$.rounds", "expected a non-negative integer");
            s.rounds = j["rounds"].get<round_t>();
        }
        const auto &parties = field(j, "$", "parties");
        if (!parties.is_array() || parties.empty())
            fail("$.parties", "expected a non-empty array of names");
        for (std::size_t i = 0; i < parties.size(); ++i) {
            if (!parties[i].is_string() || parties[i].get<std::string>().empty())
                fail("$.parties[" + std::to_string(i) + "]", "expected a non-empty string");
            if (!s.funding.emplace(party_id { parties[i].get<std::string>() }, 0).second)
                fail("$.parties[" + std::to_string(i) + "]", "duplicate party");
        }
        if (j.contains("funding")) {
            const auto &f = j["funding"];
            if (!f.is_object())
                fail("$.funding", "expected an object of party amounts");
            for (const auto &[name, _]: f.items()) {
                const party_id p { name };
                if (!s.funding.contains(p))
                    fail("$.funding." + name, "party not listed in $.parties");
                s.funding[p] = amount_of(f, "$.funding", name.c_str());
            }
        }
        if (j.contains("adversary")) {
            const auto &a = j["adversary"];
            if (!a.is_object())
                fail("$.adversary", "expected an object of party behaviors");
            for (const auto &[name, v]: a.items()) {
                const party_id p { name };
                if (!s.funding.contains(p))
                    fail("$.adversary." + name, "party not listed in $.parties");
                const auto b = v.is_string() ? parse_behavior(v.get<std::string>()) : std::nullopt;
                if (!b)
                    fail("$.adversary." + name, "unknown behavior");
                s.adversary[p] = *b;
            }
        }
        if (j.contains("schedule")) {
            const auto &sched = j["schedule"];
            if (!sched.is_array())
                fail("$.schedule", "expected an array");
            for (std::size_t i = 0; i < sched.size(); ++i) {
                const auto path = "$.schedule[" + std::to_string(i) + "]";
                const auto &e = sched[i];
                const auto &r = field(e, path, "round");
                if (!r.is_number_unsigned())
                    fail(path + ".round", "expected a non-negative integer");
                const party_id p { text_of(e, path, "party") };
                if (!s.funding.contains(p))
                    fail(path + ".party", "party not listed in $.parties");
                const auto op = text_of(e, path, "op");
                const json args = e.contains("args") ? e["args"] : json::object();
                s.schedule.push_back({ r.get<round_t>(), p, parse_command(op, args, path + ".args") });
            }
        }
        return s;
    }

    scenario parse_scenario_text(const std::string_view text)
    {
        json j;
        try {
            j = json::parse(text);
        } catch (const json::parse_error &e) {
            std::size_t line = 1, col = 1;
            for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
                if (text[i] == '\n') {
                    ++line;
                    col = 1;
                } else {
                    ++col;
                }
            }
            throw error("line " + std::to_string(line) + ", column " + std::to_string(col) + ": invalid JSON");
        }
        return parse_scenario(j);
    }

    scenario load_scenario(const std::filesystem::path &path)
    {
        std::ifstream in { path };
        if (!in)
            throw error("cannot open scenario file " + path.string());
        std::ostringstream ss;
        ss << in.rdbuf();
        try {
            return parse_scenario_text(ss.str());
        } catch (const error &e) {
            throw error(path.string() + ": " + e.what());
        }
    }

    std::unique_ptr<world> build_world(const scenario &s, const bool log_messages)
    {
        world_config cfg;
        cfg.delta = s.delta;
        cfg.key_seed = s.seed;
        cfg.log_messages = log_messages;
        auto w = std::make_unique<world>(s.funding, cfg, s.adversary);
        for (const auto &c: s.schedule)
            w->schedule(c);
        return w;
    }

    std::unique_ptr<world> run_scenario(const scenario &s, const bool log_messages)
    {
        auto w = build_world(s, log_messages);
        if (s.rounds)
            w->run_until(*s.rounds);
        else
            w->run_to_quiescence();
        return w;
    }
}

namespace starfish {
    nlohmann::ordered_json final_state(const world &w)
    {
        using ojson = nlohmann::ordered_json;
        ojson out;
        out["round"] = w.now();
        out["endowment"] = w.endowment();
        ojson ledger_json = ojson::object();
        for (const auto &[p, v]: w.contracts().ledger_state().balances())
            ledger_json[p.str()] = v;
        out["ledger"] = ledger_json;

        ojson channels = ojson::array();
        for (const auto &[id, ch]: w.contracts().channels()) {
            ojson balances = ojson::object();
            for (const auto &[p, v]: ch.balance)
                balances[p.str()] = v;
            channels.push_back({ { "id", id.str() }, { "users", { ch.a.str(), ch.b.str() } },
                { "status", std::string { to_string(ch.status) } }, { "version", ch.version }, { "epoch", ch.epoch },
                { "balance", balances } });
        }
        out["channels"] = channels;

        ojson merges = ojson::array();
        for (const auto &[id, m]: w.contracts().merges()) {
            ojson edges = ojson::array();
            for (const auto &e: m.edges)
                edges.push_back({ { "user", e.user.str() }, { "channel", e.channel.str() }, { "capacity", e.capacity },
                    { "hub_balance", e.hub_balance }, { "user_balance", e.user_balance }, { "version", e.version } });
            merges.push_back({ { "id", id.str() }, { "hub", m.hub.str() }, { "status", std::string { to_string(m.status) } },
                { "version", m.version }, { "pooled", m.pooled_capacity() }, { "edges", edges } });
        }
        out["merges"] = merges;

        // party views of pooled capacities, which survive the contract-side close of single edges
        ojson views = ojson::object();
        for (const auto &[p, member]: w.members()) {
            ojson mv = ojson::object();
            for (const auto &[id, view]: member->merges()) {
                ojson caps = ojson::object();
                for (const auto &[u, c]: view.latest().entries)
                    caps[u.str()] = c;
                mv[id.str()] = { { "versionM", view.latest().version }, { "capacities", caps } };
            }
            if (!mv.empty())
                views[p.str()] = mv;
        }
        out["merge_views"] = views;

        ojson outputs = ojson::array();
        for (const auto &o: w.outputs())
            outputs.push_back({ { "round", o.round }, { "party", o.party.str() }, { "output", o.name }, { "object", o.object },
                { "started", o.started } });
        out["outputs"] = outputs;

        ojson violations = ojson::array();
        for (const auto &v: w.violations())
            violations.push_back({ { "round", v.round }, { "what", v.what } });
        out["audits"] = w.audits();
        out["violations"] = violations;
        return out;
    }
}
