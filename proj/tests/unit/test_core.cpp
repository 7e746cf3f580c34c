#include <gtest/gtest.h>
#include <starfish/core/audit.hpp>
#include <starfish/core/crypto.hpp>
#include <starfish/core/ledger.hpp>
#include <starfish/core/serialize.hpp>
#include <starfish/core/signed_state.hpp>

using namespace starfish;

namespace {
    byte_vector bytes_of(std::string_view s) { return { s.begin(), s.end() }; }
}

TEST(serialize, integers_are_big_endian_and_strings_length_prefixed)
{
    byte_writer w;
    w.u8(7).u32(1).u64(0x0102030405060708ULL).i64(-1).str("ab");
    const byte_vector expected { 7, 0, 0, 0, 1, 1, 2, 3, 4, 5, 6, 7, 8, 0xff, 0xff, 0xff, 0xff, 0xff, 0xff, 0xff, 0xff, 0, 0, 0, 2, 'a', 'b' };
    EXPECT_EQ(w.data(), expected);
    EXPECT_EQ(to_hex(std::span<const std::uint8_t>(expected.data(), 5)), "0700000001");
}

// RFC 4231 test cases 1 and 2.
TEST(crypto, hmac_sha256_matches_published_vectors)
{
    const byte_vector key1(20, 0x0b);
    const auto data1 = bytes_of("Hi There");
    EXPECT_EQ(to_hex(hmac_sha256(key1, data1)), "b0344c61d8db38535ca8afceaf0bf12b881dc200c9833da726e9376c2e32cff7");
    const auto key2 = bytes_of("Jefe");
    const auto data2 = bytes_of("what do ya want for nothing?");
    EXPECT_EQ(to_hex(hmac_sha256(key2, data2)), "5bdcc146bf60754e6a042426089575c75a003f089d2739839dec58b964ec3843");
}

TEST(crypto, signatures_verify_only_for_the_real_signer)
{
    const std::vector<party_id> ps { party_id { "A" }, party_id { "B" } };
    const auto reg = key_registry::derive(ps, 42);
    const auto msg = bytes_of("state");
    const auto sig = reg.keys(ps[0]).sign(msg);
    EXPECT_TRUE(reg.verify(ps[0], msg, sig));
    EXPECT_FALSE(reg.verify(ps[1], msg, sig));
    EXPECT_FALSE(reg.verify(ps[0], bytes_of("other"), sig));
    const auto forged = reg.keys(ps[0]).forge_as(ps[1], msg);
    EXPECT_EQ(forged.signer, ps[1]);
    EXPECT_FALSE(reg.verify(ps[1], msg, forged));
}

TEST(crypto, derived_keys_are_reproducible_per_seed)
{
    const std::vector<party_id> ps { party_id { "A" } };
    const auto msg = bytes_of("m");
    const auto a = key_registry::derive(ps, 1).keys(ps[0]).sign(msg);
    const auto b = key_registry::derive(ps, 1).keys(ps[0]).sign(msg);
    const auto c = key_registry::derive(ps, 2).keys(ps[0]).sign(msg);
    EXPECT_EQ(a, b);
    EXPECT_NE(a.tag, c.tag);
}

TEST(ledger, refuses_overdraft_and_negative_amounts)
{
    ledger l { { { party_id { "A" }, 10 } } };
    EXPECT_EQ(l.remove(party_id { "A" }, 11), ledger_result::insufficient_funds);
    EXPECT_EQ(l.balance(party_id { "A" }), 10);
    EXPECT_EQ(l.remove(party_id { "A" }, -1), ledger_result::invalid_amount);
    EXPECT_EQ(l.add(party_id { "B" }, -3), ledger_result::invalid_amount);
    EXPECT_EQ(l.remove(party_id { "A" }, 4), ledger_result::ok);
    EXPECT_EQ(l.add(party_id { "B" }, 4), ledger_result::ok);
    EXPECT_EQ(l.total(), 10);
    EXPECT_EQ(l.balance(party_id { "C" }), 0);
}

TEST(types, apply_payment_is_zero_sum_and_never_negative)
{
    const party_id a { "A" }, b { "B" }, c { "C" };
    const balance_map m { { a, 5 }, { b, 3 } };
    const auto ok = apply_payment(m, { a, b, 5 });
    ASSERT_TRUE(ok);
    EXPECT_EQ(ok->at(a), 0);
    EXPECT_EQ(ok->at(b), 8);
    EXPECT_FALSE(apply_payment(m, { a, b, 6 }));
    EXPECT_FALSE(apply_payment(m, { a, c, 1 }));
    EXPECT_FALSE(apply_payment(m, { a, b, -1 }));
}

TEST(types, merge_update_delta_is_zero_sum)
{
    const merge_update u { party_id { "D" }, party_id { "A" }, 21 };
    EXPECT_EQ(u.delta(party_id { "D" }) + u.delta(party_id { "A" }) + u.delta(party_id { "B" }), 0);
    EXPECT_EQ(u.delta(party_id { "A" }), 21);
}

TEST(signed_state, signing_bytes_cover_every_field)
{
    const party_id a { "A" }, b { "B" };
    const auto base = make_channel_state(channel_id { "c" }, 1, 0, { { a, 1 }, { b, 2 } });
    auto other = base;
    other.version = 2;
    EXPECT_NE(base.signing_bytes(), other.signing_bytes());
    other = base;
    other.epoch = 1;
    EXPECT_NE(base.signing_bytes(), other.signing_bytes());
    other = base;
    other.entries[a] = 2;
    EXPECT_NE(base.signing_bytes(), other.signing_bytes());
    other = base;
    other.kind = state_kind::merge;
    EXPECT_NE(base.signing_bytes(), other.signing_bytes());
}

TEST(signed_state, cosigned_state_verifies_for_both_users)
{
    const std::vector<party_id> ps { party_id { "A" }, party_id { "B" } };
    const auto reg = key_registry::derive(ps, 3);
    auto s = make_channel_state(channel_id { "c" }, 4, 0, { { ps[0], 6 }, { ps[1], 4 } });
    s.sign(reg.keys(ps[0]));
    EXPECT_TRUE(s.signed_by(reg, ps[0]));
    EXPECT_FALSE(s.signed_by_all(reg, ps));
    s.sign(reg.keys(ps[1]));
    EXPECT_TRUE(s.signed_by_all(reg, ps));
    s.entries[ps[0]] = 7;
    EXPECT_FALSE(s.signed_by(reg, ps[0]));
    EXPECT_EQ(s.total(), 11);
}

TEST(audit, census_counts_ledger_escrow_and_edges)
{
    ledger l { { { party_id { "A" }, 3 } } };
    channel_map chans;
    channel ch { channel_id { "c" }, party_id { "A" }, party_id { "H" }, { { party_id { "A" }, 2 }, { party_id { "H" }, 5 } }, 0, 0, {} };
    ch.status = channel_status::open;
    chans.emplace(ch.id, ch);
    merge_map merges;
    merge m { merge_id { "m" }, party_id { "H" }, { party_id { "A" } }, {}, 0, merge_status::active };
    m.edges.push_back({ channel_id { "c" }, party_id { "H" }, party_id { "A" }, 4, 1, 3, 0 });
    merges.emplace(m.id, m);
    const auto c = take_census(l, chans, merges);
    EXPECT_EQ(c.ledger, 3);
    EXPECT_EQ(c.channels, 7);
    EXPECT_EQ(c.edges, 4);
    EXPECT_EQ(total_coins(l, chans, merges), 14);
    EXPECT_TRUE(negative_entries(l, chans, merges).empty());
    merges.begin()->second.edges[0].hub_balance = -1;
    EXPECT_FALSE(negative_entries(l, chans, merges).empty());
}
