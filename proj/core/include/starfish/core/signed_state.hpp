#pragma once

#include <starfish/core/crypto.hpp>
#include <starfish/core/types.hpp>

namespace starfish {
    // msgC / msgE / msgM
    enum class state_kind: std::uint8_t { channel = 1, edge = 2, merge = 3 };

    std::string_view to_string(state_kind k);

    // The unit of dispute evidence. For channel states `entries` maps both users to their
    // balances; for edge states it maps hub and user to their edge balances; for merge
    // states it maps every end user to the capacity of that user's edge.
    struct signed_state {
        state_kind kind = state_kind::channel;
        std::string subject {};
        version_t version = 0;
        // channel states only: how many on-chain adjustments the balances already include
        std::uint64_t epoch = 0;
        std::map<party_id, amount_t> entries {};
        std::map<party_id, signature> signatures {};

        byte_vector signing_bytes() const;
        void sign(const key_pair &keys);
        void add_signature(const signature &sig) { signatures.insert_or_assign(sig.signer, sig); }
        bool signed_by(const key_registry &reg, const party_id &p) const;
        template<typename Range>
        bool signed_by_all(const key_registry &reg, const Range &parties) const
        {
            for (const auto &p: parties)
                if (!signed_by(reg, p))
                    return false;
            return true;
        }

        amount_t entry(const party_id &p) const;
        amount_t total() const;
        bool non_negative() const;
        bool same_content(const signed_state &o) const;
    };

    std::string edge_subject(const merge_id &merge, const party_id &user);

    signed_state make_channel_state(const channel_id &id, version_t version, std::uint64_t epoch, const balance_map &balances);
    signed_state make_edge_state(const merge_id &merge, const party_id &hub, const party_id &user,
        version_t version, amount_t hub_balance, amount_t user_balance);
    signed_state make_merge_state(const merge_id &merge, version_t version, const std::map<party_id, amount_t> &caps);

    struct edge_spec {
        party_id user;
        channel_id channel;
        version_t channel_version = 0;
        std::uint64_t channel_epoch = 0;
        amount_t capacity = 0;
    };

    // The (φ, t) pair every merge participant signs during open merge.
    struct merge_proposal {
        merge_id id;
        party_id hub;
        round_t timestamp = 0;
        std::vector<edge_spec> edges {};

        byte_vector signing_bytes() const;
        std::map<party_id, amount_t> capacities() const;
        const edge_spec *find(const party_id &user) const;
    };
}
