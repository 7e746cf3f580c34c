#pragma once

#include <starfish/contracts/messages.hpp>

namespace starfish {
    // Party-to-party payloads; every one of them is delivered exactly one round after sending.

    struct update_channel_proposal {
        channel_id channel;
        transfer payment;
        signed_state msg_c;
    };

    struct update_channel_reply {
        channel_id channel;
        version_t version = 0;
        signature sig;
    };

    struct update_edge_proposal {
        merge_id merge;
        party_id edge_user;
        transfer payment;
        signed_state msg_e;
    };

    struct update_edge_reply {
        merge_id merge;
        party_id edge_user;
        version_t version = 0;
        signature sig;
    };

    struct merge_request {
        merge_proposal proposal;
        signature hub_sig;
    };

    struct merge_accept {
        merge_id merge;
        signature sig;
    };

    // Hub to the two end users whose edges an update merge touches.
    struct update_merge_proposal {
        merge_id merge;
        merge_update update;
        signed_state msg_m;
        signed_state msg_e_from;
        signed_state msg_e_to;
    };

    struct update_merge_reply {
        merge_id merge;
        version_t version = 0;
        signature sig_m;
        signature sig_e;
    };

    // First round of the atomic broadcast: the hub's proposal to every end user.
    struct broadcast_proposal {
        merge_id merge;
        merge_update update;
        signed_state msg_m;
        signed_state msg_e_from;
        signed_state msg_e_to;
        round_t deadline = 0;
    };

    // Second round: every end user echoes its vote to the hub and all other end users.
    // An accept carries the voter's signature on msgM.
    struct broadcast_vote {
        merge_id merge;
        version_t version = 0;
        bool accept = false;
        signature sig;
    };

    using party_message = std::variant<update_channel_proposal, update_channel_reply, update_edge_proposal, update_edge_reply,
        merge_request, merge_accept, update_merge_proposal, update_merge_reply, broadcast_proposal, broadcast_vote>;

    std::string_view message_name(const party_message &m);
}
