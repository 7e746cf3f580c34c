#include <starfish/engine/atomic_broadcast.hpp>

namespace starfish {
    std::string_view to_string(const broadcast_verdict v)
    {
        switch (v) {
            case broadcast_verdict::pending: return "pending";
            case broadcast_verdict::success: return "success";
            case broadcast_verdict::failure: return "failure";
        }
        return "unknown";
    }

    broadcast_instance::broadcast_instance(signed_state msg_m, std::set<party_id> voters, const round_t deadline):
        _msg_m { std::move(msg_m) }, _voters { std::move(voters) }, _deadline { deadline }
    {
    }

    void broadcast_instance::record_vote(const key_registry &keys, const party_id &voter, const bool accept, const signature &sig)
    {
        if (!_voters.contains(voter) || _accepted.contains(voter) || _rejected.contains(voter))
            return;
        if (!accept) {
            _rejected.insert(voter);
            return;
        }
        if (!keys.verify(voter, _msg_m.signing_bytes(), sig)) {
            _rejected.insert(voter);
            return;
        }
        _accepted.insert(voter);
        _msg_m.add_signature(sig);
    }

    broadcast_verdict broadcast_instance::verdict(const round_t now) const
    {
        if (now < _deadline)
            return broadcast_verdict::pending;
        return _rejected.empty() && _accepted.size() == _voters.size() ? broadcast_verdict::success : broadcast_verdict::failure;
    }
}
