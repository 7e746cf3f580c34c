#include <starfish/core/signed_state.hpp>

namespace starfish {
    std::string_view to_string(const state_kind k)
    {
        switch (k) {
            case state_kind::channel: return "msgC";
            case state_kind::edge: return "msgE";
            case state_kind::merge: return "msgM";
        }
        return "unknown";
    }

    byte_vector signed_state::signing_bytes() const
    {
        byte_writer w;
        w.str("starfish/state").u8(static_cast<std::uint8_t>(kind)).str(subject).u64(version).u64(epoch);
        w.u32(static_cast<std::uint32_t>(entries.size()));
        for (const auto &[p, v]: entries)
            w.str(p.str()).i64(v);
        return w.take();
    }

    void signed_state::sign(const key_pair &keys)
    {
        add_signature(keys.sign(signing_bytes()));
    }

    bool signed_state::signed_by(const key_registry &reg, const party_id &p) const
    {
        const auto it = signatures.find(p);
        if (it == signatures.end())
            return false;
        return reg.verify(p, signing_bytes(), it->second);
    }

    amount_t signed_state::entry(const party_id &p) const
    {
        const auto it = entries.find(p);
        return it == entries.end() ? 0 : it->second;
    }

    amount_t signed_state::total() const
    {
        amount_t sum = 0;
        for (const auto &[_, v]: entries)
            sum += v;
        return sum;
    }

    bool signed_state::non_negative() const
    {
        for (const auto &[_, v]: entries)
            if (v < 0)
                return false;
        return true;
    }

    bool signed_state::same_content(const signed_state &o) const
    {
        return kind == o.kind && subject == o.subject && version == o.version && epoch == o.epoch && entries == o.entries;
    }

    std::string edge_subject(const merge_id &merge, const party_id &user)
    {
        return merge.str() + "/" + user.str();
    }

    signed_state make_channel_state(const channel_id &id, const version_t version, const std::uint64_t epoch, const balance_map &balances)
    {
        return { state_kind::channel, id.str(), version, epoch, balances, {} };
    }

    signed_state make_edge_state(const merge_id &merge, const party_id &hub, const party_id &user,
        const version_t version, const amount_t hub_balance, const amount_t user_balance)
    {
        return { state_kind::edge, edge_subject(merge, user), version, 0, { { hub, hub_balance }, { user, user_balance } }, {} };
    }

    signed_state make_merge_state(const merge_id &merge, const version_t version, const std::map<party_id, amount_t> &caps)
    {
        return { state_kind::merge, merge.str(), version, 0, caps, {} };
    }

    byte_vector merge_proposal::signing_bytes() const
    {
        byte_writer w;
        w.str("starfish/merge-proposal").str(id.str()).str(hub.str()).u64(timestamp);
        w.u32(static_cast<std::uint32_t>(edges.size()));
        for (const auto &e: edges)
            w.str(e.user.str()).str(e.channel.str()).u64(e.channel_version).u64(e.channel_epoch).i64(e.capacity);
        return w.take();
    }

    std::map<party_id, amount_t> merge_proposal::capacities() const
    {
        std::map<party_id, amount_t> caps;
        for (const auto &e: edges)
            caps.emplace(e.user, e.capacity);
        return caps;
    }

    const edge_spec *merge_proposal::find(const party_id &user) const
    {
        for (const auto &e: edges)
            if (e.user == user)
                return &e;
        return nullptr;
    }
}
