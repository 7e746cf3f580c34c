#pragma once

#include <optional>
#include <starfish/contracts/event_log.hpp>
#include <starfish/contracts/messages.hpp>
#include <starfish/core/audit.hpp>
#include <starfish/core/crypto.hpp>
#include <starfish/core/ledger.hpp>

namespace starfish {
    struct pending_channel_close {
        party_id initiator;
        round_t started = 0;
        round_t deadline = 0;
    };

    // Contract-side bookkeeping for one channel beyond the public `channel` view.
    struct channel_record {
        channel_spec spec;
        round_t opened_request = 0;
        party_id opener;
        // highest-version valid msgC seen; version 0 is the unsigned funding state
        signed_state best;
        // on-chain adjustments in order; adjustment i moves the channel from epoch i to i+1
        std::vector<balance_map> adjustments {};
        std::optional<pending_channel_close> closing {};

        amount_t escrow_at(std::uint64_t epoch) const;
        balance_map payout_from(const signed_state &s) const;
    };

    enum class close_phase { awaiting_counterparty, challenge_window };

    std::string_view to_string(close_phase p);

    struct pending_merge_close {
        party_id edge_user;
        party_id initiator;
        party_id counterparty;
        round_t started = 0;
        signed_state best_m;
        signed_state best_e;
        bool counterparty_responded = false;
        bool timeout_logged = false;

        close_phase phase(round_t now, round_t delta) const
        {
            return now <= started + delta && !counterparty_responded ? close_phase::awaiting_counterparty : close_phase::challenge_window;
        }
    };

    struct merge_record {
        merge_proposal proposal;
        // the contract's certified merge state; version 0 is the opening allocation
        signed_state certified;
        std::optional<pending_merge_close> closing {};
    };

    // The contract functionality: channel and merge contracts over a shared ledger.
    // Requests arrive already delayed by the engine; notices are returned for immediate delivery.
    class contract_host {
    public:
        contract_host(ledger initial, round_t delta, const key_registry &keys, event_log &log);

        std::vector<addressed_notice> handle(round_t now, const party_id &sender, const contract_request &req);
        // Fires deadlines whose windows ended at or before `now`.
        std::vector<addressed_notice> tick(round_t now);

        round_t delta() const noexcept { return _delta; }
        const starfish::ledger &ledger_state() const noexcept { return _ledger; }
        const channel_map &channels() const noexcept { return _channels; }
        const merge_map &merges() const noexcept { return _merges; }
        const channel_record *channel_info(const channel_id &id) const;
        const merge_record *merge_info(const merge_id &id) const;

        bool valid_channel_state(const channel_record &rec, const signed_state &s) const;
        bool valid_merge_state(const merge &m, const signed_state &s) const;
        bool valid_edge_state(const merge &m, const party_id &user, const signed_state &s) const;
        bool idle() const;
    private:
        std::vector<addressed_notice> on_open_channel(round_t now, const party_id &sender, const open_channel_request &req);
        std::vector<addressed_notice> on_close_channel(round_t now, const party_id &sender, const close_channel_request &req);
        std::vector<addressed_notice> on_open_merge(round_t now, const party_id &sender, const open_merge_request &req);
        std::vector<addressed_notice> on_close_merge(round_t now, const party_id &sender, const close_merge_request &req);
        std::vector<addressed_notice> on_challenge(round_t now, const party_id &sender, const close_merge_challenge &req);

        void tick_channels(round_t now, std::vector<addressed_notice> &out);
        void tick_merges(round_t now, std::vector<addressed_notice> &out);

        // chan-merge and chan-closeM: an on-chain adjustment of a channel's balances.
        void adjust_channel(round_t now, const channel_id &id, const merge_id &merge, const balance_map &delta,
            std::vector<addressed_notice> &out);
        void consider_channel_state(channel_record &rec, channel &ch, const signed_state &s);
        void settle_channel(round_t now, const channel_id &id, std::vector<addressed_notice> &out);
        void finalize_merge_close(round_t now, const merge_id &id, std::vector<addressed_notice> &out);
        void send_close_checks(round_t now, const merge &m, const pending_merge_close &pc, std::vector<addressed_notice> &out);
        void note(round_t now, const std::string &source, std::string event, nlohmann::json payload = nlohmann::json::object());

        starfish::ledger _ledger;
        round_t _delta;
        const key_registry &_keys;
        event_log &_log;
        channel_map _channels {};
        merge_map _merges {};
        std::map<channel_id, channel_record> _channel_records {};
        std::map<merge_id, merge_record> _merge_records {};
    };

    // The unsigned opening state of an edge: the hub holds the whole opening capacity.
    signed_state edge_baseline(const merge_record &rec, const party_id &user);
}
