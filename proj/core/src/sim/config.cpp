#include <fstream>
#include <set>
#include <sstream>
#include <starfish/sim/config.hpp>

namespace starfish {
    namespace {
        using nlohmann::json;

        [[noreturn]] void fail(const std::string &path, const std::string &what)
        {
            throw error(path + ": " + what);
        }

        template<typename T>
        T get_number(const json &j, const std::string &path)
        {
            if constexpr (std::is_floating_point_v<T>) {
                if (!j.is_number())
                    fail(path, "expected a number");
            } else {
                if (!j.is_number_integer())
                    fail(path, "expected an integer");
                if constexpr (std::is_unsigned_v<T>)
                    if (j.get<std::int64_t>() < 0)
                        fail(path, "expected a non-negative integer");
            }
            return j.get<T>();
        }

        // a named preset serializes as its name so parsing restores it exactly
        nlohmann::ordered_json values_json(const value_distribution &v)
        {
            if (v.preset != "custom")
                return v.preset;
            return { { "mu", v.mu }, { "sigma", v.sigma }, { "scale", v.scale } };
        }

        const json *member(const json &obj, const char *key)
        {
            const auto it = obj.find(key);
            return it == obj.end() ? nullptr : &*it;
        }

        template<typename T, typename F>
        std::vector<T> get_list(const json &j, const std::string &path, F &&each)
        {
            if (!j.is_array() || j.empty())
                fail(path, "expected a non-empty array");
            std::vector<T> out;
            for (std::size_t i = 0; i < j.size(); ++i)
                out.push_back(each(j[i], path + "[" + std::to_string(i) + "]"));
            return out;
        }
    }

    experiment_config parse_experiment_config(const json &j, const std::filesystem::path &base_dir)
    {
        if (!j.is_object())
            fail("$", "expected an object");
        static const std::set<std::string> known { "topology", "workload", "strategies", "capacity_multipliers",
            "skewness", "skew_side", "seeds", "delta", "max_cycle", "refill", "revive_willing", "strategy_nodes", "audit" };
        for (const auto &[key, _]: j.items())
            if (!known.contains(key))
                fail("$." + key, "unknown key");

        experiment_config c;
        if (const auto *t = member(j, "topology")) {
            if (!t->is_object())
                fail("$.topology", "expected an object");
            if (const auto *csv = member(*t, "csv")) {
                if (!csv->is_string())
                    fail("$.topology.csv", "expected a path string");
                std::filesystem::path p { csv->get<std::string>() };
                c.topology_csv = p.is_absolute() ? p : base_dir / p;
            }
            if (const auto *v = member(*t, "model")) {
                if (!v->is_string())
                    fail("$.topology.model", "expected a string");
                c.synthesis.model = v->get<std::string>();
                if (c.synthesis.model != "scale-free")
                    fail("$.topology.model", "unknown model '" + c.synthesis.model + "'");
            }
            if (const auto *v = member(*t, "nodes"))
                c.synthesis.nodes = get_number<std::size_t>(*v, "$.topology.nodes");
            if (const auto *v = member(*t, "attach"))
                c.synthesis.attach = get_number<std::size_t>(*v, "$.topology.attach");
            if (const auto *v = member(*t, "seed"))
                c.synthesis.seed = get_number<std::uint64_t>(*v, "$.topology.seed");
            if (const auto *v = member(*t, "capacity_min"))
                c.synthesis.capacity_min = get_number<amount_t>(*v, "$.topology.capacity_min");
            if (const auto *v = member(*t, "capacity_max"))
                c.synthesis.capacity_max = get_number<amount_t>(*v, "$.topology.capacity_max");
            if (c.synthesis.capacity_min <= 0 || c.synthesis.capacity_max < c.synthesis.capacity_min)
                fail("$.topology", "capacity_min must be positive and not above capacity_max");
            if (c.synthesis.attach == 0 || c.synthesis.nodes <= c.synthesis.attach)
                fail("$.topology", "need attach >= 1 and nodes > attach");
        }
        if (const auto *w = member(j, "workload")) {
            if (!w->is_object())
                fail("$.workload", "expected an object");
            if (const auto *v = member(*w, "payments")) {
                c.payments = get_number<std::size_t>(*v, "$.workload.payments");
                if (c.payments == 0)
                    fail("$.workload.payments", "must be positive");
            }
            if (const auto *v = member(*w, "values")) {
                if (v->is_string()) {
                    try {
                        c.values = value_preset(v->get<std::string>());
                    } catch (const error &e) {
                        fail("$.workload.values", e.what());
                    }
                } else if (v->is_object()) {
                    c.values = { "custom", 0, 0, 1.0 };
                    const auto *mu = member(*v, "mu");
                    const auto *sigma = member(*v, "sigma");
                    if (!mu || !sigma)
                        fail("$.workload.values", "custom values need mu and sigma");
                    c.values.mu = get_number<double>(*mu, "$.workload.values.mu");
                    c.values.sigma = get_number<double>(*sigma, "$.workload.values.sigma");
                    if (const auto *s = member(*v, "scale"))
                        c.values.scale = get_number<double>(*s, "$.workload.values.scale");
                    if (!(c.values.sigma > 0) || !(c.values.scale > 0))
                        fail("$.workload.values", "sigma and scale must be positive");
                } else {
                    fail("$.workload.values", "expected a preset name or {mu, sigma, scale}");
                }
            }
        }
        if (const auto *v = member(j, "strategies"))
            c.strategies = get_list<strategy_kind>(*v, "$.strategies", [](const json &e, const std::string &p) {
                if (!e.is_string())
                    fail(p, "expected a strategy name");
                try {
                    return parse_strategy(e.get<std::string>());
                } catch (const error &err) {
                    fail(p, err.what());
                }
            });
        if (const auto *v = member(j, "capacity_multipliers"))
            c.capacity_multipliers = get_list<amount_t>(*v, "$.capacity_multipliers", [](const json &e, const std::string &p) {
                const auto m = get_number<amount_t>(e, p);
                if (m <= 0)
                    fail(p, "multiplier must be positive");
                return m;
            });
        if (const auto *v = member(j, "skewness"))
            c.skewness = get_list<double>(*v, "$.skewness", [](const json &e, const std::string &p) {
                const auto s = get_number<double>(e, p);
                if (!(s > 0))
                    fail(p, "skewness must be positive");
                return s;
            });
        if (const auto *v = member(j, "seeds"))
            c.seeds = get_list<std::uint64_t>(*v, "$.seeds", [](const json &e, const std::string &p) { return get_number<std::uint64_t>(e, p); });
        if (const auto *v = member(j, "delta"))
            c.delta = get_number<std::uint64_t>(*v, "$.delta");
        if (const auto *v = member(j, "max_cycle")) {
            c.max_cycle = get_number<std::size_t>(*v, "$.max_cycle");
            if (c.max_cycle < 3)
                fail("$.max_cycle", "a cycle has at least 3 hops");
        }
        if (const auto *v = member(j, "skew_side")) {
            if (!v->is_string())
                fail("$.skew_side", "expected \"receiver\", \"sender\" or \"both\"");
            try {
                c.skew = parse_skew_side(v->get<std::string>());
            } catch (const error &e) {
                fail("$.skew_side", e.what());
            }
        }
        if (const auto *v = member(j, "refill")) {
            if (*v == "shortfall")
                c.refill = refill_policy::shortfall;
            else if (*v == "equalize")
                c.refill = refill_policy::equalize;
            else
                fail("$.refill", "expected \"shortfall\" or \"equalize\"");
        }
        if (const auto *v = member(j, "revive_willing")) {
            if (!v->is_boolean())
                fail("$.revive_willing", "expected true or false");
            c.revive_willing = v->get<bool>();
        }
        if (const auto *v = member(j, "strategy_nodes")) {
            if (*v == "all")
                c.enabled = strategy_nodes::all;
            else if (*v == "top-decile")
                c.enabled = strategy_nodes::top_decile;
            else
                fail("$.strategy_nodes", "expected \"all\" or \"top-decile\"");
        }
        if (const auto *v = member(j, "audit")) {
            if (*v == "touched")
                c.audit = audit_level::touched;
            else if (*v == "full")
                c.audit = audit_level::full;
            else
                fail("$.audit", "expected \"touched\" or \"full\"");
        }
        return c;
    }

    experiment_config load_experiment_config(const std::filesystem::path &path)
    {
        std::ifstream in { path };
        if (!in)
            throw error("cannot open config " + path.string());
        std::stringstream buf;
        buf << in.rdbuf();
        json j;
        try {
            j = json::parse(buf.str());
        } catch (const json::parse_error &e) {
            throw error(path.string() + ": " + e.what());
        }
        try {
            return parse_experiment_config(j, path.parent_path());
        } catch (const error &e) {
            throw error(path.string() + ": " + e.what());
        }
    }

    nlohmann::ordered_json to_json(const experiment_config &c)
    {
        nlohmann::ordered_json j;
        if (c.topology_csv) {
            j["topology"] = { { "csv", c.topology_csv->string() } };
        } else {
            j["topology"] = { { "model", c.synthesis.model }, { "nodes", c.synthesis.nodes }, { "attach", c.synthesis.attach },
                { "seed", c.synthesis.seed }, { "capacity_min", c.synthesis.capacity_min }, { "capacity_max", c.synthesis.capacity_max } };
        }
        j["workload"] = { { "payments", c.payments },
            { "values", values_json(c.values) } };
        auto strategies = nlohmann::ordered_json::array();
        for (const auto k: c.strategies)
            strategies.push_back(std::string { to_string(k) });
        j["strategies"] = strategies;
        j["capacity_multipliers"] = c.capacity_multipliers;
        j["skewness"] = c.skewness;
        j["skew_side"] = std::string { to_string(c.skew) };
        j["seeds"] = c.seeds;
        j["delta"] = c.delta;
        j["max_cycle"] = c.max_cycle;
        j["refill"] = c.refill == refill_policy::equalize ? "equalize" : "shortfall";
        j["revive_willing"] = c.revive_willing;
        j["strategy_nodes"] = c.enabled == strategy_nodes::all ? "all" : "top-decile";
        j["audit"] = c.audit == audit_level::full ? "full" : "touched";
        return j;
    }

    topology load_topology(const experiment_config &c)
    {
        auto t = c.topology_csv ? load_topology_csv(*c.topology_csv) : synthesize_topology(c.synthesis);
        validate_topology(t);
        return t;
    }
}
