#pragma once

#include <starfish/core/signed_state.hpp>

namespace starfish {
    enum class broadcast_verdict { pending, success, failure };

    std::string_view to_string(broadcast_verdict v);

    // One participant's view of a two-round unanimous echo-vote. Every participant evaluates
    // the verdict at the same deadline round over the same vote set, so honest views agree.
    class broadcast_instance {
    public:
        broadcast_instance(signed_state msg_m, std::set<party_id> voters, round_t deadline);

        // Only the first vote of each listed voter counts; accepts must carry a valid signature on msgM.
        void record_vote(const key_registry &keys, const party_id &voter, bool accept, const signature &sig);
        broadcast_verdict verdict(round_t now) const;
        // msgM carrying the proposer's signatures plus every accepting voter's.
        const signed_state &certified() const noexcept { return _msg_m; }
        round_t deadline() const noexcept { return _deadline; }
        const std::set<party_id> &voters() const noexcept { return _voters; }
        std::size_t accepts() const noexcept { return _accepted.size(); }
        bool rejected() const noexcept { return !_rejected.empty(); }
    private:
        signed_state _msg_m;
        std::set<party_id> _voters;
        round_t _deadline;
        std::set<party_id> _accepted {};
        std::set<party_id> _rejected {};
    };
}
