#include <boost/math/distributions/chi_squared.hpp>
#include <gtest/gtest.h>
#include <random>
#include <sstream>
#include <starfish/sim/config.hpp>
#include <starfish/sim/experiment.hpp>
#include <starfish/sim/routing.hpp>

using namespace starfish;

namespace {
    std::string csv_error(const std::string &text)
    {
        std::istringstream in(text);
        try {
            parse_topology_csv(in, "t.csv");
        } catch (const error &e) {
            return e.what();
        }
        return {};
    }

    std::string config_error(const std::string &text)
    {
        try {
            parse_experiment_config(nlohmann::json::parse(text));
        } catch (const error &e) {
            return e.what();
        }
        return {};
    }

    double chi_square_p(const std::vector<double> &observed, const std::vector<double> &expected)
    {
        double stat = 0;
        for (std::size_t i = 0; i < observed.size(); ++i)
            stat += (observed[i] - expected[i]) * (observed[i] - expected[i]) / expected[i];
        const boost::math::chi_squared dist(static_cast<double>(observed.size() - 1));
        return boost::math::cdf(boost::math::complement(dist, stat));
    }

    // Random connected graph over n nodes "v0".."v{n-1}" with random directional balances.
    pcn_state random_network(std::mt19937_64 &rng, std::size_t n, double density, amount_t max_balance)
    {
        std::vector<std::string> names;
        for (std::size_t i = 0; i < n; ++i)
            names.push_back("v" + std::to_string(i));
        std::uniform_int_distribution<amount_t> bal(0, max_balance);
        std::vector<pcn_state::channel_spec> chans;
        for (std::size_t i = 1; i < n; ++i) {
            const auto j = std::uniform_int_distribution<std::size_t>(0, i - 1)(rng);
            chans.push_back({ names[j], names[i], bal(rng), bal(rng) });
        }
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                const bool exists = std::any_of(chans.begin(), chans.end(), [&](const auto &c) {
                    return (c.a == names[i] && c.b == names[j]) || (c.a == names[j] && c.b == names[i]);
                });
                if (!exists && std::bernoulli_distribution(density)(rng))
                    chans.push_back({ names[i], names[j], bal(rng), bal(rng) });
            }
        return pcn_state { names, chans };
    }

    // Every simple path, by exhaustive DFS; keeps the shortest, then the smallest node sequence.
    std::optional<std::vector<node_index>> brute_force_path(const pcn_state &s, node_index from, node_index to, amount_t amount)
    {
        std::optional<std::vector<node_index>> best;
        std::vector<node_index> path { from };
        std::vector<bool> on(s.node_count(), false);
        on[from] = true;
        std::function<void()> dfs = [&] {
            const auto x = path.back();
            if (x == to) {
                if (!best || path.size() < best->size() || (path.size() == best->size() && path < *best))
                    best = path;
                return;
            }
            for (const auto &adj: s.neighbors(x)) {
                if (on[adj.neighbor] || s.balance(adj.channel, x) < amount)
                    continue;
                on[adj.neighbor] = true;
                path.push_back(adj.neighbor);
                dfs();
                path.pop_back();
                on[adj.neighbor] = false;
            }
        };
        dfs();
        return best;
    }

    experiment_config small_config()
    {
        experiment_config c;
        c.synthesis.nodes = 30;
        c.payments = 1500;
        c.seeds = { 3 };
        c.capacity_multipliers = { 1 };
        return c;
    }
}

TEST(topology_csv, parses_channels_and_collects_nodes)
{
    std::istringstream in("nodeA,nodeB,capacity\nalice,bob,100\nbob,carol,7\n");
    const auto t = parse_topology_csv(in, "t.csv");
    EXPECT_EQ(t.nodes.size(), 3u);
    ASSERT_EQ(t.channels.size(), 2u);
    EXPECT_EQ(t.channels[1].capacity, 7);
}

TEST(topology_csv, errors_carry_file_and_line)
{
    EXPECT_NE(csv_error("a,b,c\n").find("header"), std::string::npos);
    EXPECT_NE(csv_error("nodeA,nodeB,capacity\nx,y\n").find("t.csv:2:"), std::string::npos);
    EXPECT_NE(csv_error("nodeA,nodeB,capacity\nx,y,1\nx,x,3\n").find("t.csv:3:"), std::string::npos);
    EXPECT_NE(csv_error("nodeA,nodeB,capacity\nx,y,ten\n").find("t.csv:2:"), std::string::npos);
    EXPECT_NE(csv_error("nodeA,nodeB,capacity\nx,y,0\n").find("t.csv:2:"), std::string::npos);
    EXPECT_NE(csv_error("nodeA,nodeB,capacity\nx,y,1\ny,x,2\n").find("t.csv:3:"), std::string::npos);
    EXPECT_NE(csv_error("nodeA,nodeB,capacity\n,y,1\n").find("t.csv:2:"), std::string::npos);
}

TEST(synthesis, is_seeded_connected_and_sized_by_attachment)
{
    synthesis_spec spec;
    const auto t = synthesize_topology(spec);
    EXPECT_EQ(t.nodes.size(), 200u);
    // clique of attach+1 nodes, then `attach` links per later node
    EXPECT_EQ(t.channels.size(), 3u + 197u * 2u);
    EXPECT_NO_THROW(validate_topology(t));

    const auto again = synthesize_topology(spec);
    ASSERT_EQ(again.channels.size(), t.channels.size());
    for (std::size_t i = 0; i < t.channels.size(); ++i)
        EXPECT_TRUE(t.channels[i].a == again.channels[i].a && t.channels[i].b == again.channels[i].b);
    spec.seed = 8;
    const auto other = synthesize_topology(spec);
    bool differs = false;
    for (std::size_t i = 0; i < t.channels.size(); ++i)
        differs |= t.channels[i].a != other.channels[i].a || t.channels[i].b != other.channels[i].b;
    EXPECT_TRUE(differs);

    const auto s = build_network(t, 1);
    std::vector<bool> seen(s.node_count(), false);
    std::vector<node_index> stack { 0 };
    seen[0] = true;
    std::size_t reached = 1;
    while (!stack.empty()) {
        const auto x = stack.back();
        stack.pop_back();
        for (const auto &adj: s.neighbors(x))
            if (!seen[adj.neighbor]) {
                seen[adj.neighbor] = true;
                ++reached;
                stack.push_back(adj.neighbor);
            }
    }
    EXPECT_EQ(reached, s.node_count());
}

TEST(build_network, splits_capacity_evenly_with_the_odd_unit_on_side_b)
{
    topology t { { "a", "b" }, { { "a", "b", 7 } } };
    const auto s = build_network(t, 3);
    EXPECT_EQ(s.channel(0).bal_a, 10);
    EXPECT_EQ(s.channel(0).bal_b, 11);
    EXPECT_EQ(s.reserve(s.index_of("a")), 10);
    EXPECT_THROW(build_network(t, 0), error);
}

TEST(workload, uniform_endpoints_pass_a_chi_square_test)
{
    const auto t = synthesize_topology({ "scale-free", 20, 2, 7, 40, 40 });
    const auto s = build_network(t, 1);
    constexpr std::size_t n = 100000;
    const auto w = generate_workload(s, n, 1.0, value_preset("small"), 17);
    std::vector<double> recv(s.node_count(), 0), send(s.node_count(), 0);
    for (const auto &p: w.payments) {
        ASSERT_NE(p.sender, p.receiver);
        ASSERT_GE(p.amount, 1);
        ++recv[p.receiver];
        ++send[p.sender];
    }
    const std::vector<double> expected(s.node_count(), static_cast<double>(n) / static_cast<double>(s.node_count()));
    EXPECT_GT(chi_square_p(recv, expected), 0.001);
    EXPECT_GT(chi_square_p(send, expected), 0.001);
}

TEST(workload, skewed_receivers_follow_their_weights)
{
    const auto t = synthesize_topology({ "scale-free", 20, 2, 7, 40, 40 });
    const auto s = build_network(t, 1);
    const auto hubs = top_decile(s);
    ASSERT_EQ(hubs.size(), 2u);
    constexpr std::size_t n = 100000;
    constexpr double skew = 8.0;
    const auto w = generate_workload(s, n, skew, value_preset("small"), 4);
    std::vector<double> recv(s.node_count(), 0);
    for (const auto &p: w.payments)
        ++recv[p.receiver];
    std::vector<double> weight(s.node_count(), 1.0);
    for (const auto h: hubs)
        weight[h] = skew;
    const double total = std::accumulate(weight.begin(), weight.end(), 0.0);
    std::vector<double> expected;
    for (const auto x: weight)
        expected.push_back(static_cast<double>(n) * x / total);
    EXPECT_GT(chi_square_p(recv, expected), 0.001);
}

TEST(workload, values_have_the_lognormal_median)
{
    const auto t = synthesize_topology({ "scale-free", 20, 2, 7, 40, 40 });
    const auto s = build_network(t, 1);
    const auto v = value_preset("small");
    auto w = generate_workload(s, 20001, 1.0, v, 9);
    std::vector<amount_t> amounts;
    for (const auto &p: w.payments)
        amounts.push_back(p.amount);
    std::nth_element(amounts.begin(), amounts.begin() + 10000, amounts.end());
    const auto median = static_cast<double>(amounts[10000]);
    EXPECT_NEAR(median, std::floor(std::exp(v.mu)), 1.0);
    EXPECT_EQ(value_preset("large").scale, 10 * value_preset("small").scale);
}

TEST(workload, top_decile_is_the_highest_degree_tenth)
{
    const auto t = synthesize_topology({});
    const auto s = build_network(t, 1);
    const auto top = top_decile(s);
    EXPECT_EQ(top.size(), 20u);
    std::size_t min_top = SIZE_MAX;
    for (const auto h: top)
        min_top = std::min(min_top, s.neighbors(h).size());
    std::size_t above = 0;
    for (node_index i = 0; i < s.node_count(); ++i)
        if (s.neighbors(i).size() > min_top)
            ++above;
    EXPECT_LE(above, top.size());
}

TEST(routing, matches_exhaustive_search_for_shortest_smallest_path)
{
    std::mt19937_64 rng { 21 };
    router r;
    std::size_t routed = 0;
    for (int trial = 0; trial < 400; ++trial) {
        const auto s = random_network(rng, 7, 0.35, 20);
        const auto from = std::uniform_int_distribution<node_index>(0, 6)(rng);
        auto to = std::uniform_int_distribution<node_index>(0, 6)(rng);
        if (to == from)
            to = (to + 1) % 7;
        const auto amount = std::uniform_int_distribution<amount_t>(1, 15)(rng);
        const auto expected = brute_force_path(s, from, to, amount);
        const auto got = r.find(s, from, to, amount, hop_rule::balance);
        ASSERT_EQ(expected.has_value(), got.has_value()) << trial;
        if (!got)
            continue;
        std::vector<node_index> nodes { from };
        for (const auto &h: *got) {
            ASSERT_EQ(h.from, nodes.back());
            ASSERT_EQ(s.channel(h.channel).other(h.from), h.to);
            nodes.push_back(h.to);
        }
        ASSERT_EQ(nodes, *expected) << trial;
        ++routed;
    }
    EXPECT_GT(routed, 100u);
}

TEST(routing, locked_channels_are_never_used)
{
    pcn_state s { { "a", "b", "c" }, { { "a", "b", 10, 10 }, { "b", "c", 10, 10 }, { "a", "c", 10, 10 } } };
    s.begin();
    s.lock(2, 5);
    s.commit();
    const auto path = route_payment(s, 0, 2, 1);
    ASSERT_TRUE(path);
    EXPECT_EQ(path->size(), 2u);
}

TEST(execute_payment, failure_leaves_the_state_untouched)
{
    std::mt19937_64 rng { 8 };
    std::size_t failures = 0, successes = 0;
    for (int trial = 0; trial < 300; ++trial) {
        auto s = random_network(rng, 8, 0.3, 12);
        const auto kind = all_strategies()[std::uniform_int_distribution<std::size_t>(0, 7)(rng)];
        const strategy_setup setup { kind, s };
        const auto from = std::uniform_int_distribution<node_index>(0, 7)(rng);
        const auto to = static_cast<node_index>((from + 1 + std::uniform_int_distribution<node_index>(0, 6)(rng)) % 8);
        router r;
        const auto path = r.find(s, from, to, 1, hop_rule::topology);
        ASSERT_TRUE(path);
        const auto amount = std::uniform_int_distribution<amount_t>(1, 30)(rng);
        const auto before = s;
        const auto coins = s.total_coins();
        op_counter ops(s.node_count());
        const auto out = execute_payment(s, &setup, *path, amount, &ops);
        EXPECT_TRUE(out.violation.empty()) << out.violation;
        EXPECT_EQ(s.total_coins(), coins);
        EXPECT_EQ(s.find_negative(), "");
        if (out.success) {
            ++successes;
            EXPECT_EQ(ops.total(), out.onchain_ops);
        } else {
            ++failures;
            EXPECT_TRUE(s == before) << trial;
            EXPECT_EQ(ops.total(), 0u);
        }
    }
    EXPECT_GT(failures, 0u);
    EXPECT_GT(successes, 0u);
}

TEST(experiment, every_attempt_is_counted_once)
{
    auto c = small_config();
    const auto t = load_topology(c);
    for (const auto k: all_strategies()) {
        const auto m = run_cell(t, c, { k, 1, 8.0, 3 });
        EXPECT_EQ(m.attempted, c.payments) << to_string(k);
        EXPECT_EQ(m.attempted, m.succeeded + m.failed) << to_string(k);
        EXPECT_TRUE(m.violations.empty()) << to_string(k);
        EXPECT_NEAR(m.success_ratio, static_cast<double>(m.succeeded) / static_cast<double>(m.attempted), 1e-12);
    }
}

TEST(experiment, full_audit_checks_every_payment)
{
    auto c = small_config();
    c.audit = audit_level::full;
    const auto t = load_topology(c);
    const auto m = run_cell(t, c, { strategy_kind::starfish, 1, 8.0, 3 });
    EXPECT_GE(m.audits, c.payments);
    EXPECT_TRUE(m.violations.empty());
}

TEST(experiment, results_do_not_depend_on_thread_count)
{
    auto c = small_config();
    c.seeds = { 1, 2 };
    c.capacity_multipliers = { 1, 5 };
    const auto t = load_topology(c);
    std::ostringstream one, four;
    write_results_csv(one, run_experiment(c, t, 1));
    write_results_csv(four, run_experiment(c, t, 4));
    EXPECT_EQ(one.str(), four.str());
    EXPECT_EQ(one.str().substr(0, one.str().find('\n')), "strategy,capacity_mult,skewness,seed,attempted,succeeded,success_ratio,onchain_ops");
}

TEST(experiment, setup_costs_follow_the_binding_structure)
{
    auto c = small_config();
    const auto t = load_topology(c);
    const auto s = build_network(t, 1);
    std::uint64_t degree_sum = 0, pair_sum = 0;
    for (node_index i = 0; i < s.node_count(); ++i) {
        const auto d = s.neighbors(i).size();
        degree_sum += d;
        pair_sum += d * (d - 1);
    }
    EXPECT_EQ(strategy_setup(strategy_kind::starfish, s).setup_ops(), degree_sum);
    EXPECT_EQ(strategy_setup(strategy_kind::shaduf_ab, s).setup_ops(), pair_sum);
}

TEST(config, diagnostics_name_the_json_path)
{
    EXPECT_NE(config_error(R"({"bogus": 1})").find("$.bogus"), std::string::npos);
    EXPECT_NE(config_error(R"({"seeds": "one"})").find("$.seeds"), std::string::npos);
    EXPECT_NE(config_error(R"({"strategies": ["LN", "Warp"]})").find("$.strategies[1]"), std::string::npos);
    EXPECT_NE(config_error(R"({"workload": {"payments": -4}})").find("$.workload.payments"), std::string::npos);
    EXPECT_NE(config_error(R"({"capacity_multipliers": [0]})").find("$.capacity_multipliers"), std::string::npos);
    EXPECT_NE(config_error(R"({"topology": {"nodes": 2.5}})").find("$.topology.nodes"), std::string::npos);
    EXPECT_NE(config_error(R"({"workload": {"values": "huge"}})").find("$.workload.values"), std::string::npos);
}

TEST(config, round_trips_through_json)
{
    auto c = small_config();
    c.skewness = { 1, 8 };
    c.refill = refill_policy::shortfall;
    const auto back = parse_experiment_config(nlohmann::json::parse(to_json(c).dump()));
    EXPECT_EQ(to_json(back).dump(), to_json(c).dump());
}
