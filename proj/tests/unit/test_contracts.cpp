#include <gtest/gtest.h>
#include <starfish/core/audit.hpp>
#include "challenge_property.hpp"

using namespace starfish;
using starfish::testing::contract_bench;

namespace {
    const party_id A { "A" }, B { "B" }, H { "H" };
    const channel_id AB { "ch-AB" };

    amount_t coins(const contract_bench &b)
    {
        return total_coins(b.host.ledger_state(), b.host.channels(), b.host.merges());
    }

    signed_state channel_state(const contract_bench &b, version_t v, amount_t a, amount_t bb)
    {
        return b.cosign(make_channel_state(AB, v, 0, { { A, a }, { B, bb } }), { A, B });
    }
}

TEST(channel_contract, opens_when_both_fund_and_conserves_coins)
{
    contract_bench b { { { A, 10 }, { B, 10 } }, 10 };
    b.open_channel("ch-AB", "A", "B", 6, 4);
    const auto &ch = b.host.channels().at(AB);
    EXPECT_EQ(ch.status, channel_status::open);
    EXPECT_EQ(ch.balance_of(A), 6);
    EXPECT_EQ(ch.balance_of(B), 4);
    EXPECT_EQ(b.host.ledger_state().balance(A), 4);
    EXPECT_EQ(coins(b), 20);
    EXPECT_EQ(b.notices_of<channel_opened>().size(), 2u);
}

TEST(channel_contract, unmatched_open_is_refunded_after_delta)
{
    contract_bench b { { { A, 10 }, { B, 10 } }, 10 };
    const channel_spec spec { AB, A, B, 7, 0 };
    b.submit(A, open_channel_request { spec });
    EXPECT_EQ(b.host.ledger_state().balance(A), 3);
    b.advance_to(11);
    b.end_round();
    EXPECT_EQ(b.host.channels().at(AB).status, channel_status::closed);
    EXPECT_EQ(b.host.ledger_state().balance(A), 10);
    EXPECT_EQ(b.notices_of<channel_not_opened>().size(), 1u);
}

TEST(channel_contract, counterparty_overrides_a_stale_close)
{
    contract_bench b { { { A, 10 }, { B, 10 } }, 10 };
    b.open_channel("ch-AB", "A", "B", 10, 10);
    const auto v1 = channel_state(b, 1, 4, 16);
    const auto v2 = channel_state(b, 2, 7, 13);
    b.submit(A, close_channel_request { AB, v1 });
    EXPECT_EQ(b.host.channels().at(AB).status, channel_status::closing);
    b.advance_to(5);
    b.submit(B, close_channel_request { AB, v2 });
    EXPECT_EQ(b.host.channels().at(AB).status, channel_status::closed);
    EXPECT_EQ(b.host.ledger_state().balance(A), 7);
    EXPECT_EQ(b.host.ledger_state().balance(B), 13);
    EXPECT_EQ(coins(b), 20);
}

TEST(channel_contract, unanswered_close_settles_at_the_deadline)
{
    contract_bench b { { { A, 10 }, { B, 10 } }, 10 };
    b.open_channel("ch-AB", "A", "B", 10, 10);
    b.submit(A, close_channel_request { AB, channel_state(b, 3, 2, 18) });
    b.advance_to(40);
    EXPECT_EQ(b.host.channels().at(AB).status, channel_status::closing);
    b.end_round();
    EXPECT_EQ(b.host.channels().at(AB).status, channel_status::closed);
    EXPECT_EQ(b.host.ledger_state().balance(B), 18);
}

TEST(channel_contract, rejects_forged_and_unbalanced_states)
{
    contract_bench b { { { A, 10 }, { B, 10 } }, 10 };
    b.open_channel("ch-AB", "A", "B", 10, 10);
    auto forged = make_channel_state(AB, 5, 0, { { A, 20 }, { B, 0 } });
    forged.sign(b.keys.keys(A));
    forged.add_signature(b.keys.keys(A).forge_as(B, forged.signing_bytes()));
    b.submit(A, close_channel_request { AB, forged });
    EXPECT_EQ(b.host.channels().at(AB).status, channel_status::open);
    b.submit(A, close_channel_request { AB, channel_state(b, 5, 15, 10) });
    EXPECT_EQ(b.host.channels().at(AB).status, channel_status::open);
    b.submit(A, close_channel_request { AB, channel_state(b, 5, -1, 21) });
    EXPECT_EQ(b.host.channels().at(AB).status, channel_status::open);
}

TEST(merge_contract, requires_every_signature_and_hub_balance)
{
    contract_bench b { { { H, 20 }, { A, 0 }, { B, 0 } }, 10 };
    b.open_channel("ch-HA", "H", "A", 5, 0);
    b.open_channel("ch-HB", "H", "B", 15, 0);
    b.open_merge("too-big", "H", { { "A", "ch-HA", 6 }, { "B", "ch-HB", 15 } });
    EXPECT_EQ(b.host.merge_info(merge_id { "too-big" }), nullptr);

    merge_proposal prop { merge_id { "unsigned" }, H, 0, { { A, channel_id { "ch-HA" }, 0, 0, 5 }, { B, channel_id { "ch-HB" }, 0, 0, 15 } } };
    open_merge_request req { prop, { b.keys.keys(H).sign(prop.signing_bytes()), b.keys.keys(A).sign(prop.signing_bytes()) }, {} };
    b.submit(H, req);
    EXPECT_EQ(b.host.merge_info(merge_id { "unsigned" }), nullptr);
    EXPECT_EQ(b.notices_of<merge_not_opened>().size(), 6u);

    b.open_merge("phi", "H", { { "A", "ch-HA", 5 }, { "B", "ch-HB", 15 } });
    const auto &m = b.host.merges().at(merge_id { "phi" });
    EXPECT_EQ(m.pooled_capacity(), 20);
    EXPECT_EQ(b.host.channels().at(channel_id { "ch-HB" }).balance_of(H), 0);
    EXPECT_EQ(coins(b), 20);
}

TEST(merge_contract, newer_valid_state_wins_over_a_stale_close)
{
    contract_bench b { { { H, 20 }, { A, 0 }, { B, 0 } }, 10 };
    b.open_channel("ch-HA", "H", "A", 10, 0);
    b.open_channel("ch-HB", "H", "B", 10, 0);
    b.open_merge("phi", "H", { { "A", "ch-HA", 10 }, { "B", "ch-HB", 10 } });
    const merge_id phi { "phi" };
    const auto v1 = b.cosign(make_merge_state(phi, 1, { { A, 15 }, { B, 5 } }), { H, A, B });
    const auto v2 = b.cosign(make_merge_state(phi, 2, { { A, 18 }, { B, 2 } }), { H, A, B });
    const auto v3_unsigned = b.cosign(make_merge_state(phi, 3, { { A, 1 }, { B, 19 } }), { H, B });
    const auto *rec = b.host.merge_info(phi);
    b.submit(H, close_merge_request { phi, A, v1, edge_baseline(*rec, A) });
    b.advance_to(3);
    b.submit(B, close_merge_challenge { phi, v3_unsigned });
    b.submit(A, close_merge_challenge { phi, v2 });
    b.advance_to(25);
    const auto closed = b.notices_of<merge_closed>();
    ASSERT_FALSE(closed.empty());
    EXPECT_EQ(closed.front().version, 2u);
    EXPECT_EQ(closed.front().capacities.at(B), 2);
    EXPECT_EQ(b.host.channels().at(channel_id { "ch-HA" }).balance_of(H), 18);
    EXPECT_EQ(coins(b), 20);
}

TEST(merge_contract, randomized_interleavings_finalize_the_largest_valid_version)
{
    const auto r = starfish::testing::run_challenge_trials(200, 11);
    EXPECT_EQ(r.failures, 0u) << r.first_failure;
    EXPECT_EQ(r.trials, 200u);
}
