#include <gtest/gtest.h>
#include <starfish/core/audit.hpp>
#include <starfish/engine/atomic_broadcast.hpp>
#include <starfish/engine/scenario.hpp>
#include "harness.hpp"

using namespace starfish;
using starfish::testing::scenario_path;

namespace {
    const party_id H { "H" }, A { "A" }, B { "B" }, C { "C" }, D { "D" };

    std::vector<amount_t> hub_view_capacities(const world &w, const std::string &merge)
    {
        const auto *mv = w.member(H).merge_state(merge_id { merge });
        std::vector<amount_t> caps;
        for (const auto &u: { A, B, C, D }) {
            const auto *e = mv ? mv->m.find_edge(u) : nullptr;
            caps.push_back(e ? e->capacity : -1);
        }
        return caps;
    }

    version_t edge_version(const world &w, const party_id &viewer, const party_id &user)
    {
        return w.member(viewer).merge_state(merge_id { "phi" })->m.find_edge(user)->version;
    }

    round_t latency(const world &w, const party_id &p, std::string_view name, std::string_view object)
    {
        const auto *o = w.find_output(p, name, object);
        return o ? o->round - o->started : ~round_t { 0 };
    }
}

TEST(walkthrough, reproduces_deposits_pool_and_reallocations)
{
    const auto s = load_scenario(scenario_path("walkthrough"));
    auto w = build_world(s);
    w->run_until(21);
    const auto &ch = w->contracts().channels();
    EXPECT_EQ(ch.at(channel_id { "ch-HA" }).balance_of(H), 0);
    EXPECT_EQ(ch.at(channel_id { "ch-HB" }).balance_of(H), 5);
    EXPECT_EQ(ch.at(channel_id { "ch-HC" }).balance_of(H), 10);
    EXPECT_EQ(ch.at(channel_id { "ch-HD" }).balance_of(H), 21);

    w->run_until(34);
    ASSERT_TRUE(w->contracts().merges().contains(merge_id { "phi" }));
    EXPECT_EQ(w->contracts().merges().at(merge_id { "phi" }).pooled_capacity(), 36);

    w->run_until(44);
    EXPECT_EQ(hub_view_capacities(*w, "phi"), (std::vector<amount_t> { 21, 5, 6, 4 }));
    std::map<party_id, version_t> before;
    for (const auto &u: { A, B, C })
        before[u] = edge_version(*w, H, u);

    w->run_until(47);
    for (const auto &u: { A, B, C }) {
        EXPECT_EQ(edge_version(*w, H, u), before[u] + 1) << u.str();
        EXPECT_EQ(edge_version(*w, u, u), before[u] + 1) << u.str();
    }
    EXPECT_EQ(edge_version(*w, H, D), edge_version(*w, D, D));

    w->run_until(52);
    EXPECT_EQ(hub_view_capacities(*w, "phi"), (std::vector<amount_t> { 17, 9, 6, 4 }));
    const std::map<party_id, amount_t> expected { { A, 17 }, { B, 9 }, { C, 6 }, { D, 4 } };
    for (const auto &[u, cap]: expected)
        EXPECT_EQ(w->member(u).merge_state(merge_id { "phi" })->m.find_edge(u)->capacity, cap) << u.str();

    w->run_to_quiescence();
    EXPECT_EQ(w->contracts().merges().at(merge_id { "phi" }).pooled_capacity(), 32);
    EXPECT_EQ(w->contracts().channels().at(channel_id { "ch-HD" }).balance_of(H), 4);
    EXPECT_TRUE(w->violations().empty());
}

TEST(walkthrough, every_user_sees_the_same_allocation)
{
    const auto w = run_scenario(load_scenario(scenario_path("walkthrough")));
    const auto &hub = w->member(H).merge_state(merge_id { "phi" })->latest();
    for (const auto &u: { A, B, C }) {
        const auto *mv = w->member(u).merge_state(merge_id { "phi" });
        ASSERT_NE(mv, nullptr);
        EXPECT_TRUE(mv->latest().same_content(hub)) << u.str();
    }
}

TEST(timing, honest_procedures_meet_their_round_bounds)
{
    constexpr round_t delta = 10;
    const auto w = run_scenario(load_scenario(scenario_path("honest-lifecycle")));
    ASSERT_EQ(w->config().delta, delta);
    EXPECT_LE(latency(*w, H, "opened", "ch-HA"), 2 * delta);
    EXPECT_LE(latency(*w, C, "opened", "ch-CH"), 2 * delta);
    EXPECT_EQ(latency(*w, A, "updatedC", "ch-HA"), 2u);
    EXPECT_EQ(latency(*w, H, "updatedC", "ch-HB"), 2u);
    EXPECT_LE(latency(*w, H, "merged", "phi"), delta + 2);
    EXPECT_EQ(latency(*w, H, "updatedM", "phi"), 4u);
    EXPECT_EQ(latency(*w, H, "updatedE", "phi/A"), 2u);
    EXPECT_EQ(latency(*w, A, "updatedE", "phi/A"), 2u);
    EXPECT_LE(latency(*w, A, "closedM", "phi/A"), 3 * delta);
    EXPECT_LE(latency(*w, H, "closedM", "phi/B"), 3 * delta);
    EXPECT_LE(latency(*w, C, "closedC", "ch-CH"), 2 * delta);
    EXPECT_LE(latency(*w, A, "closedC", "ch-HA"), 2 * delta);
    EXPECT_TRUE(w->violations().empty());
}

// Expected balances follow from replaying the schedule's payments by hand.
TEST(lifecycle, honest_close_pays_latest_balances)
{
    const auto w = run_scenario(load_scenario(scenario_path("honest-lifecycle")));
    const auto &l = w->contracts().ledger_state();
    EXPECT_EQ(l.balance(A), 14);
    EXPECT_EQ(l.balance(B), 13);
    EXPECT_EQ(l.balance(C), 6);
    EXPECT_EQ(l.balance(H), 37);
    EXPECT_EQ(l.total(), w->endowment());
}

TEST(adversary, stale_channel_close_is_overridden)
{
    const auto w = run_scenario(load_scenario(scenario_path("stale-close")));
    EXPECT_EQ(w->contracts().ledger_state().balance(B), 18);
    EXPECT_EQ(w->contracts().ledger_state().balance(A), 2);
    EXPECT_TRUE(w->violations().empty());
}

TEST(adversary, silent_party_cannot_freeze_other_funds)
{
    const auto w = run_scenario(load_scenario(scenario_path("silent-party")));
    EXPECT_NE(w->find_output(H, "not-opened", "ch-HC"), nullptr);
    EXPECT_EQ(w->contracts().ledger_state().balance(C), 10);
    EXPECT_NE(w->find_output(A, "closedM", "psi/A"), nullptr);
    EXPECT_NE(w->find_output(B, "closedM", "psi/B"), nullptr);
    const auto &ch = w->contracts().channels();
    EXPECT_EQ(ch.at(channel_id { "ch-HA" }).balance_of(A), 10);
    EXPECT_EQ(ch.at(channel_id { "ch-HB" }).balance_of(B), 10);
    EXPECT_EQ(ch.at(channel_id { "ch-HB" }).balance_of(H), 17);
    EXPECT_TRUE(w->violations().empty());
}

TEST(adversary, second_spend_beyond_edge_capacity_is_rejected)
{
    const auto w = run_scenario(load_scenario(scenario_path("double-spend")));
    EXPECT_NE(w->find_output(H, "updatedE", "phi/A"), nullptr);
    EXPECT_NE(w->find_output(H, "not-updatedE", "phi/D"), nullptr);
    EXPECT_EQ(w->find_output(H, "updatedE", "phi/D"), nullptr);
    const auto &ch = w->contracts().channels();
    EXPECT_EQ(ch.at(channel_id { "ch-HA" }).balance_of(A), 18);
    EXPECT_EQ(ch.at(channel_id { "ch-HD" }).balance_of(D), 0);
    EXPECT_EQ(ch.at(channel_id { "ch-HD" }).balance_of(H), 18);
    EXPECT_TRUE(w->violations().empty());
}

TEST(adversary, stale_merge_close_loses_to_the_challenge)
{
    const auto w = run_scenario(load_scenario(scenario_path("stale-merge-close")));
    bool flagged = false;
    version_t finalized = 0;
    for (const auto &r: w->log().records()) {
        flagged |= r.event == "closeM-challenge" && r.source == "party:B";
        if (r.event == "closedM" && r.source == "contract:phi")
            finalized = r.payload["versionM"].get<version_t>();
    }
    EXPECT_TRUE(flagged);
    EXPECT_EQ(finalized, 2u);
    const auto &ch = w->contracts().channels().at(channel_id { "ch-HA" });
    EXPECT_EQ(ch.balance_of(A), 15);
    EXPECT_EQ(ch.balance_of(H), 3);
    EXPECT_TRUE(w->violations().empty());
}

TEST(adversary, forged_close_is_ignored)
{
    const auto w = run_scenario(load_scenario(scenario_path("forge-signature")));
    EXPECT_EQ(w->contracts().ledger_state().balance(A), 13);
    EXPECT_EQ(w->contracts().ledger_state().balance(B), 7);
    EXPECT_TRUE(w->violations().empty());
}

TEST(audit, runs_after_every_round_of_every_bundled_scenario)
{
    for (const auto *name: { "walkthrough", "honest-lifecycle", "stale-close", "silent-party", "double-spend", "stale-merge-close", "forge-signature" }) {
        const auto w = run_scenario(load_scenario(scenario_path(name)));
        EXPECT_GE(w->audits(), w->now()) << name;
        EXPECT_TRUE(w->violations().empty()) << name;
        const auto &h = w->contracts();
        EXPECT_EQ(total_coins(h.ledger_state(), h.channels(), h.merges()), w->endowment()) << name;
    }
}

TEST(scenario, identical_runs_produce_identical_traces)
{
    const auto s = load_scenario(scenario_path("walkthrough"));
    const auto a = run_scenario(s);
    const auto b = run_scenario(s);
    EXPECT_EQ(a->log().to_jsonl(), b->log().to_jsonl());
    EXPECT_EQ(final_state(*a).dump(), final_state(*b).dump());
}

TEST(scenario, diagnostics_name_the_offending_field)
{
    auto message = [](std::string_view text) {
        try {
            parse_scenario_text(text);
        } catch (const error &e) {
            return std::string { e.what() };
        }
        return std::string {};
    };
    EXPECT_NE(message(R"({"parties":["A"],"schedule":[{"round":0,"party":"A","op":"fly","args":{}}]})").find("unknown operation"), std::string::npos);
    EXPECT_NE(message(R"({"parties":["A","B"],"schedule":[{"round":0,"party":"A","op":"update_channel","args":{"channel":"c","amount":-2}}]})")
                  .find("schedule[0].args.amount"),
        std::string::npos);
    EXPECT_NE(message(R"({"parties":["A"], "adversary": {"A": "sneaky"}})").find("$.adversary.A"), std::string::npos);
    EXPECT_NE(message("{\n  \"parties\": [\"A\",\n}").find("line"), std::string::npos);
}

TEST(atomic_broadcast, verdict_is_unanimous_and_waits_for_the_deadline)
{
    const std::vector<party_id> ps { H, A, B };
    const auto reg = key_registry::derive(ps, 5);
    auto msg = make_merge_state(merge_id { "m" }, 1, { { A, 3 }, { B, 4 } });
    msg.sign(reg.keys(H));
    const auto bytes = msg.signing_bytes();

    broadcast_instance ok { msg, { A, B }, 10 };
    ok.record_vote(reg, A, true, reg.keys(A).sign(bytes));
    EXPECT_EQ(ok.verdict(9), broadcast_verdict::pending);
    ok.record_vote(reg, B, true, reg.keys(B).sign(bytes));
    EXPECT_EQ(ok.verdict(10), broadcast_verdict::success);
    EXPECT_TRUE(ok.certified().signed_by_all(reg, ps));

    broadcast_instance no { msg, { A, B }, 10 };
    no.record_vote(reg, A, true, reg.keys(A).sign(bytes));
    no.record_vote(reg, B, false, reg.keys(B).sign(bytes));
    no.record_vote(reg, B, true, reg.keys(B).sign(bytes));
    EXPECT_EQ(no.verdict(10), broadcast_verdict::failure);

    broadcast_instance forged { msg, { A, B }, 10 };
    forged.record_vote(reg, A, true, reg.keys(A).sign(bytes));
    forged.record_vote(reg, B, true, reg.keys(A).forge_as(B, bytes));
    EXPECT_EQ(forged.verdict(10), broadcast_verdict::failure);

    broadcast_instance missing { msg, { A, B }, 10 };
    missing.record_vote(reg, A, true, reg.keys(A).sign(bytes));
    EXPECT_EQ(missing.verdict(10), broadcast_verdict::failure);
}
