#pragma once

#include <variant>
#include <starfish/core/signed_state.hpp>

namespace starfish {
    struct channel_spec {
        channel_id id;
        party_id a;
        party_id b;
        amount_t fund_a = 0;
        amount_t fund_b = 0;

        amount_t funding_of(const party_id &p) const { return p == a ? fund_a : p == b ? fund_b : 0; }
        bool operator==(const channel_spec &) const = default;
    };

    // Requests a party submits to a contract; each takes delta rounds to land.

    struct open_channel_request {
        channel_spec spec;
    };

    struct open_merge_request {
        merge_proposal proposal;
        std::vector<signature> signatures {};
        // the latest co-signed state of every channel named in the proposal
        std::vector<signed_state> channel_states {};
    };

    struct close_merge_request {
        merge_id merge;
        party_id edge_user;
        signed_state msg_m;
        signed_state msg_e;
    };

    struct close_merge_challenge {
        merge_id merge;
        signed_state msg_m;
    };

    struct close_channel_request {
        channel_id channel;
        signed_state msg_c;
    };

    using contract_request = std::variant<open_channel_request, open_merge_request, close_merge_request,
        close_merge_challenge, close_channel_request>;

    // Notices a contract emits to parties; they arrive in the round they are emitted.

    struct channel_opening {
        channel_spec spec;
    };

    struct channel_opened {
        channel_spec spec;
    };

    struct channel_not_opened {
        channel_id channel;
    };

    // An on-chain change to a channel's balances (merge debit or close-merge credit).
    // `epoch` is the channel's adjustment count after applying `delta`.
    struct channel_adjusted {
        channel_id channel;
        merge_id merge;
        balance_map delta {};
        std::uint64_t epoch = 0;
    };

    struct merge_opened {
        merge_proposal proposal;
    };

    struct merge_not_opened {
        merge_id merge;
        std::string reason {};
    };

    struct merge_closing {
        merge_id merge;
        party_id edge_user;
    };

    struct merge_close_check {
        merge_id merge;
        party_id edge_user;
        version_t version = 0;
    };

    struct merge_closed {
        merge_id merge;
        party_id edge_user;
        version_t version = 0;
        // capacities of the remaining edges after the close
        std::map<party_id, amount_t> capacities {};
        // what the closed edge returned to the channel
        balance_map edge_payout {};
    };

    struct channel_closing {
        channel_id channel;
    };

    struct channel_closed {
        channel_id channel;
        balance_map payout {};
    };

    using contract_notice = std::variant<channel_opening, channel_opened, channel_not_opened, channel_adjusted,
        merge_opened, merge_not_opened, merge_closing, merge_close_check, merge_closed, channel_closing, channel_closed>;

    struct addressed_notice {
        party_id to;
        contract_notice notice;
    };

    std::string_view request_name(const contract_request &r);
    std::string_view notice_name(const contract_notice &n);
}
