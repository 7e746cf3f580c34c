#include <algorithm>
#include <charconv>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <starfish/sim/topology.hpp>

namespace starfish {
    namespace {
        std::string trim(std::string s)
        {
            const auto ws = " \t\r\n";
            const auto first = s.find_first_not_of(ws);
            if (first == std::string::npos)
                return {};
            return s.substr(first, s.find_last_not_of(ws) - first + 1);
        }

        std::vector<std::string> split_fields(const std::string &line)
        {
            std::vector<std::string> fields;
            std::string field;
            std::istringstream in { line };
            while (std::getline(in, field, ','))
                fields.push_back(trim(field));
            if (!line.empty() && line.back() == ',')
                fields.emplace_back();
            return fields;
        }

        std::pair<std::string, std::string> edge_key(const std::string &x, const std::string &y)
        {
            return x < y ? std::pair { x, y } : std::pair { y, x };
        }
    }

    topology parse_topology_csv(std::istream &in, const std::string &source)
    {
        topology t;
        std::set<std::string> nodes;
        std::set<std::pair<std::string, std::string>> seen;
        std::string line;
        std::size_t line_no = 0;
        bool header = false;
        const auto fail = [&](const std::string &what) {
            throw error(source + ":" + std::to_string(line_no) + ": " + what);
        };
        while (std::getline(in, line)) {
            ++line_no;
            if (trim(line).empty())
                continue;
            const auto fields = split_fields(line);
            if (!header) {
                if (fields != std::vector<std::string> { "nodeA", "nodeB", "capacity" })
                    fail("expected header 'nodeA,nodeB,capacity'");
                header = true;
                continue;
            }
            if (fields.size() != 3)
                fail("expected 3 fields, found " + std::to_string(fields.size()));
            const auto &a = fields[0];
            const auto &b = fields[1];
            if (a.empty() || b.empty())
                fail("empty node name");
            if (a == b)
                fail("self-loop at node '" + a + "'");
            amount_t cap = 0;
            const auto &c = fields[2];
            const auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), cap);
            if (ec != std::errc {} || ptr != c.data() + c.size())
                fail("capacity '" + c + "' is not an integer");
            if (cap <= 0)
                fail("capacity must be positive, got " + c);
            if (!seen.insert(edge_key(a, b)).second)
                fail("duplicate channel " + a + "-" + b);
            nodes.insert(a);
            nodes.insert(b);
            t.channels.push_back({ a, b, cap });
        }
        if (!header)
            throw error(source + ": missing header 'nodeA,nodeB,capacity'");
        t.nodes.assign(nodes.begin(), nodes.end());
        return t;
    }

    topology load_topology_csv(const std::filesystem::path &path)
    {
        std::ifstream in { path };
        if (!in)
            throw error("cannot open topology file " + path.string());
        return parse_topology_csv(in, path.string());
    }

    topology synthesize_topology(const synthesis_spec &spec)
    {
        if (spec.model != "scale-free")
            throw error("unknown topology model '" + spec.model + "'");
        if (spec.attach == 0 || spec.nodes < spec.attach + 1)
            throw error("scale-free synthesis needs attach >= 1 and nodes > attach");
        if (spec.capacity_min <= 0 || spec.capacity_max < spec.capacity_min)
            throw error("capacity range must be positive and ordered");
        std::mt19937_64 rng { spec.seed };
        std::uniform_int_distribution<amount_t> capacity { spec.capacity_min, spec.capacity_max };

        const auto width = std::max<std::size_t>(3, std::to_string(spec.nodes - 1).size());
        topology t;
        for (std::size_t i = 0; i < spec.nodes; ++i) {
            auto digits = std::to_string(i);
            t.nodes.push_back("n" + std::string(width - digits.size(), '0') + digits);
        }
        // each endpoint occurrence is one ticket, so sampling a ticket is degree-proportional
        std::vector<std::size_t> tickets;
        const auto link = [&](const std::size_t x, const std::size_t y) {
            t.channels.push_back({ t.nodes[x], t.nodes[y], capacity(rng) });
            tickets.push_back(x);
            tickets.push_back(y);
        };
        for (std::size_t i = 0; i <= spec.attach; ++i)
            for (std::size_t j = i + 1; j <= spec.attach; ++j)
                link(i, j);
        for (std::size_t v = spec.attach + 1; v < spec.nodes; ++v) {
            std::vector<std::size_t> targets;
            while (targets.size() < spec.attach) {
                std::uniform_int_distribution<std::size_t> pick { 0, tickets.size() - 1 };
                const auto u = tickets[pick(rng)];
                if (std::find(targets.begin(), targets.end(), u) == targets.end())
                    targets.push_back(u);
            }
            std::sort(targets.begin(), targets.end());
            for (const auto u: targets)
                link(u, v);
        }
        return t;
    }

    void validate_topology(const topology &t)
    {
        std::set<std::string> nodes(t.nodes.begin(), t.nodes.end());
        if (nodes.size() != t.nodes.size())
            throw error("topology lists a node twice");
        std::set<std::pair<std::string, std::string>> seen;
        for (const auto &c: t.channels) {
            if (c.a == c.b)
                throw error("self-loop at node '" + c.a + "'");
            if (c.capacity <= 0)
                throw error("channel " + c.a + "-" + c.b + " has non-positive capacity");
            if (!nodes.contains(c.a) || !nodes.contains(c.b))
                throw error("channel " + c.a + "-" + c.b + " references an unknown node");
            if (!seen.insert(edge_key(c.a, c.b)).second)
                throw error("duplicate channel " + c.a + "-" + c.b);
        }
    }

    pcn_state build_network(const topology &t, const amount_t multiplier)
    {
        if (multiplier <= 0)
            throw error("capacity multiplier must be positive");
        std::vector<pcn_state::channel_spec> specs;
        specs.reserve(t.channels.size());
        for (const auto &c: t.channels) {
            const auto cap = c.capacity * multiplier;
            specs.push_back({ c.a, c.b, cap / 2, cap - cap / 2 });
        }
        return pcn_state { t.nodes, specs };
    }
}
