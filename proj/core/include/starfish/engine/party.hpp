#pragma once

#include <optional>
#include <starfish/contracts/event_log.hpp>
#include <starfish/core/ledger.hpp>
#include <starfish/engine/atomic_broadcast.hpp>
#include <starfish/engine/messages.hpp>

namespace starfish {
    // The closed library of scripted deviations a corrupt party can follow.
    enum class behavior {
        honest,
        silent,              // never sends anything
        decline,             // withholds its signature from every proposal
        stale_close,         // closes with the historical state most favorable to itself
        forge_signature,     // fabricates missing counterparty signatures
        reject_update_merge, // votes reject in every update-merge broadcast
        double_spend,        // skips its own overdraft checks when proposing
    };

    std::string_view to_string(behavior b);
    std::optional<behavior> parse_behavior(std::string_view s);

    struct cmd_open_channel {
        channel_id channel;
        party_id counterparty;
        amount_t fund = 0;
        amount_t counter_fund = 0;
    };

    // Pays `amount` to the channel counterparty.
    struct cmd_update_channel {
        channel_id channel;
        amount_t amount = 0;
    };

    struct cmd_open_merge {
        merge_id merge;
        std::vector<std::pair<channel_id, amount_t>> edges {};
    };

    // Pays `amount` to the other side of `edge_user`'s edge.
    struct cmd_update_edge {
        merge_id merge;
        party_id edge_user;
        amount_t amount = 0;
    };

    struct cmd_update_merge {
        merge_id merge;
        merge_update update;
    };

    struct cmd_close_merge {
        merge_id merge;
        party_id edge_user;
    };

    struct cmd_close_channel {
        channel_id channel;
    };

    // Re-sends a previously used merge request to its users and to the contract.
    struct cmd_replay_merge {
        merge_id merge;
    };

    // Re-sends the last channel update proposal this party made on `channel`.
    struct cmd_replay_update {
        channel_id channel;
    };

    using command = std::variant<cmd_open_channel, cmd_update_channel, cmd_open_merge, cmd_update_edge, cmd_update_merge,
        cmd_close_merge, cmd_close_channel, cmd_replay_merge, cmd_replay_update>;

    std::string_view command_name(const command &c);

    // A procedure outcome reported to the environment, with the round its command was issued.
    struct party_output {
        round_t round = 0;
        party_id party;
        std::string name {};
        std::string object {};
        round_t started = 0;
    };

    struct party_outbox {
        std::vector<std::pair<party_id, party_message>> messages {};
        std::vector<contract_request> requests {};
        std::vector<party_output> outputs {};

        bool empty() const noexcept { return messages.empty() && requests.empty() && outputs.empty(); }
    };

    struct channel_view {
        channel ch;
        channel_spec spec;
        // fully signed msgCs in version order; the first is the unsigned funding state
        std::vector<signed_state> history {};
        std::vector<balance_map> adjustments {};
        bool busy = false;
        std::optional<update_channel_proposal> pending {};
        round_t pending_started = 0;
        std::optional<round_t> close_started {};
        std::optional<round_t> open_started {};
        balance_map payout {};

        const signed_state &latest() const { return history.back(); }
        balance_map payout_from(const signed_state &s) const;
    };

    struct edge_view {
        // fully signed msgEs in version order; the first is the unsigned opening state
        std::vector<signed_state> history {};
        std::optional<update_edge_proposal> pending {};
        round_t pending_started = 0;

        const signed_state &latest() const { return history.back(); }
    };

    struct pending_update_merge {
        merge_update update;
        signed_state msg_m;
        signed_state msg_e_from;
        signed_state msg_e_to;
        round_t started = 0;
        std::set<party_id> replied {};
        bool broadcasting = false;
    };

    struct pending_broadcast {
        broadcast_instance instance;
        merge_update update;
        signed_state msg_e_from;
        signed_state msg_e_to;
    };

    struct merge_view {
        merge m;
        merge_proposal proposal;
        // certified msgMs in version order; the first is the unsigned opening allocation
        std::vector<signed_state> history {};
        // edges this party is a side of, keyed by end user
        std::map<party_id, edge_view> edges {};
        std::optional<pending_update_merge> updating {};
        std::optional<round_t> signing_since {};
        std::optional<pending_broadcast> broadcast {};
        std::set<party_id> closing {};
        std::map<party_id, round_t> close_started {};

        const signed_state &latest() const { return history.back(); }
        bool busy() const noexcept { return updating.has_value() || signing_since.has_value() || broadcast.has_value(); }
    };

    struct pending_open_merge {
        open_merge_request request;
        round_t started = 0;
        bool submitted = false;
    };

    struct pending_join {
        merge_proposal proposal;
        round_t started = 0;
    };

    // A protocol participant running the channel and merge procedures from its own local view.
    class party {
    public:
        party(party_id id, behavior b, const key_registry &keys, round_t delta, const ledger &public_ledger, event_log &log);

        const party_id &id() const noexcept { return _id; }
        behavior conduct() const noexcept { return _behavior; }
        bool honest() const noexcept { return _behavior == behavior::honest; }

        void execute(round_t now, const command &c);
        void receive(round_t now, const party_id &from, const party_message &m);
        void notify(round_t now, const contract_notice &n);
        void tick(round_t now);
        party_outbox take_outbox();
        bool idle() const;

        const std::map<channel_id, channel_view> &channels() const noexcept { return _channels; }
        const std::map<merge_id, merge_view> &merges() const noexcept { return _merges; }
        const channel_view *channel_state(const channel_id &id) const;
        const merge_view *merge_state(const merge_id &id) const;
    private:
        void open_channel(round_t now, const cmd_open_channel &c);
        void update_channel(round_t now, const cmd_update_channel &c);
        void open_merge(round_t now, const cmd_open_merge &c);
        void update_edge(round_t now, const cmd_update_edge &c);
        void update_merge(round_t now, const cmd_update_merge &c);
        void close_merge(round_t now, const merge_id &merge, const party_id &edge_user, std::optional<round_t> started);
        void close_channel(round_t now, const cmd_close_channel &c);
        void replay_merge(round_t now, const cmd_replay_merge &c);
        void replay_update(round_t now, const cmd_replay_update &c);

        void on_update_channel(round_t now, const party_id &from, const update_channel_proposal &m);
        void on_update_channel_reply(round_t now, const party_id &from, const update_channel_reply &m);
        void on_update_edge(round_t now, const party_id &from, const update_edge_proposal &m);
        void on_update_edge_reply(round_t now, const party_id &from, const update_edge_reply &m);
        void on_merge_request(round_t now, const party_id &from, const merge_request &m);
        void on_merge_accept(round_t now, const party_id &from, const merge_accept &m);
        void on_update_merge(round_t now, const party_id &from, const update_merge_proposal &m);
        void on_update_merge_reply(round_t now, const party_id &from, const update_merge_reply &m);
        void on_broadcast_proposal(round_t now, const party_id &from, const broadcast_proposal &m);
        void on_broadcast_vote(round_t now, const party_id &from, const broadcast_vote &m);

        void on_channel_closing(round_t now, const channel_closing &n);
        void on_merge_opened(round_t now, const merge_opened &n);
        void on_merge_not_opened(round_t now, const merge_not_opened &n);
        void on_merge_closing(round_t now, const merge_closing &n);
        void on_close_check(round_t now, const merge_close_check &n);
        void on_merge_closed(round_t now, const merge_closed &n);
        void on_channel_adjusted(round_t now, const channel_adjusted &n);

        void finish_broadcast(round_t now, merge_view &mv);
        void submit_channel_close(round_t now, channel_view &cv);
        void maybe_submit_pending_close(round_t now, const channel_id &id);
        signed_state closing_channel_state(const channel_view &cv) const;
        signed_state closing_merge_state(const merge_view &mv) const;
        signed_state closing_edge_state(const merge_view &mv, const party_id &edge_user) const;

        void send(const party_id &to, party_message m);
        void submit(contract_request r);
        void output(round_t now, std::string name, std::string object, round_t started);
        void note(round_t now, std::string event, nlohmann::json payload = nlohmann::json::object());
        bool speaks() const noexcept { return _behavior != behavior::silent; }
        bool signs() const noexcept { return _behavior != behavior::silent && _behavior != behavior::decline; }
        const key_pair &keys() const { return _keys.keys(_id); }

        party_id _id;
        behavior _behavior;
        const key_registry &_keys;
        round_t _delta;
        const ledger &_public_ledger;
        event_log &_log;
        std::map<channel_id, channel_view> _channels {};
        std::map<merge_id, merge_view> _merges {};
        std::map<merge_id, pending_open_merge> _opening_merges {};
        std::map<merge_id, pending_join> _joining_merges {};
        std::map<merge_id, open_merge_request> _merge_requests_sent {};
        std::map<channel_id, update_channel_proposal> _last_proposals {};
        party_outbox _outbox {};
    };
}
