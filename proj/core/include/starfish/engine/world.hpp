#pragma once

#include <memory>
#include <starfish/contracts/contract_host.hpp>
#include <starfish/engine/party.hpp>

namespace starfish {
    struct world_config {
        round_t delta = 10;
        std::uint64_t key_seed = 0;
        bool audit = true;
        bool log_messages = true;
    };

    struct scheduled_command {
        round_t round = 0;
        party_id party;
        command cmd;
    };

    struct audit_violation {
        round_t round = 0;
        std::string what {};
    };

    // The synchronous execution environment: parties, the contract host and the message bus,
    // advanced one round at a time in a fixed deterministic order.
    class world {
    public:
        world(balance_map funding, world_config cfg, const std::map<party_id, behavior> &adversary = {});
        world(const world &) = delete;
        world &operator=(const world &) = delete;

        void schedule(scheduled_command c);
        void run_round();
        void run_until(round_t round);
        // Runs until every command has fired and nothing is in flight; returns the final round.
        round_t run_to_quiescence(round_t max_rounds = 1'000'000);
        bool quiescent() const;

        round_t now() const noexcept { return _round; }
        const world_config &config() const noexcept { return _cfg; }
        const contract_host &contracts() const noexcept { return *_host; }
        const party &member(const party_id &p) const;
        const std::map<party_id, std::unique_ptr<party>> &members() const noexcept { return _parties; }
        const event_log &log() const noexcept { return _log; }
        const key_registry &keys() const noexcept { return _keys; }
        const std::vector<party_output> &outputs() const noexcept { return _outputs; }
        const std::vector<audit_violation> &violations() const noexcept { return _violations; }
        amount_t endowment() const noexcept { return _endowment; }
        std::size_t audits() const noexcept { return _audits; }

        const party_output *find_output(const party_id &p, std::string_view name, std::string_view object) const;
    private:
        struct envelope {
            round_t deliver = 0;
            std::string sender {};
            std::string recipient {};
            std::uint64_t seq = 0;
            party_id from;
            party_id to;
            std::variant<party_message, contract_request, contract_notice> payload;
        };
        struct later {
            bool operator()(const envelope &x, const envelope &y) const;
        };

        void flush(party &p);
        void enqueue_notices(std::vector<addressed_notice> notices);
        void deliver_due();
        void audit(const char *step);

        world_config _cfg;
        event_log _log {};
        key_registry _keys;
        std::unique_ptr<contract_host> _host;
        std::map<party_id, std::unique_ptr<party>> _parties {};
        std::multimap<round_t, scheduled_command> _schedule {};
        std::vector<envelope> _bus {};
        std::uint64_t _seq = 0;
        round_t _round = 0;
        amount_t _endowment = 0;
        std::vector<party_output> _outputs {};
        std::vector<audit_violation> _violations {};
        std::size_t _audits = 0;
    };
}
