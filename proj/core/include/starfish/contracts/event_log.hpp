#pragma once

#include <iosfwd>
#include <json.hpp>
#include <starfish/contracts/messages.hpp>

namespace starfish {
    struct log_record {
        round_t round = 0;
        std::string source {};
        std::string event {};
        nlohmann::json payload = nlohmann::json::object();
    };

    // Append-only trace shared by contracts and parties; serialized one JSON object per line.
    class event_log {
    public:
        void append(round_t round, std::string source, std::string event, nlohmann::json payload = nlohmann::json::object());
        const std::vector<log_record> &records() const noexcept { return _records; }
        std::size_t size() const noexcept { return _records.size(); }
        void set_enabled(bool on) noexcept { _enabled = on; }

        void write_jsonl(std::ostream &os) const;
        std::string to_jsonl() const;
    private:
        std::vector<log_record> _records {};
        bool _enabled = true;
    };

    nlohmann::json to_json(const balance_map &m);
    nlohmann::json to_json(const signed_state &s);
    nlohmann::json to_json(const merge_proposal &p);
    nlohmann::json to_json(const channel_spec &s);
    nlohmann::json to_json(const contract_request &r);
    nlohmann::json to_json(const contract_notice &n);
}
