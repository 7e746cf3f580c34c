#include <starfish/contracts/contract_host.hpp>

namespace starfish {
    std::string_view to_string(const close_phase p)
    {
        return p == close_phase::awaiting_counterparty ? "awaiting-counterparty" : "challenge-window";
    }

    contract_host::contract_host(starfish::ledger initial, const round_t delta, const key_registry &keys, event_log &log):
        _ledger { std::move(initial) }, _delta { delta }, _keys { keys }, _log { log }
    {
        if (delta == 0)
            throw error("contract delay must be at least one round");
    }

    std::vector<addressed_notice> contract_host::handle(const round_t now, const party_id &sender, const contract_request &req)
    {
        if (const auto *m = std::get_if<open_channel_request>(&req))
            return on_open_channel(now, sender, *m);
        if (const auto *m = std::get_if<close_channel_request>(&req))
            return on_close_channel(now, sender, *m);
        if (const auto *m = std::get_if<open_merge_request>(&req))
            return on_open_merge(now, sender, *m);
        if (const auto *m = std::get_if<close_merge_request>(&req))
            return on_close_merge(now, sender, *m);
        return on_challenge(now, sender, std::get<close_merge_challenge>(req));
    }

    std::vector<addressed_notice> contract_host::tick(const round_t now)
    {
        std::vector<addressed_notice> out;
        tick_channels(now, out);
        tick_merges(now, out);
        return out;
    }

    const channel_record *contract_host::channel_info(const channel_id &id) const
    {
        const auto it = _channel_records.find(id);
        return it == _channel_records.end() ? nullptr : &it->second;
    }

    const merge_record *contract_host::merge_info(const merge_id &id) const
    {
        const auto it = _merge_records.find(id);
        return it == _merge_records.end() ? nullptr : &it->second;
    }

    bool contract_host::idle() const
    {
        for (const auto &[id, ch]: _channels)
            if (ch.status == channel_status::proposed || ch.status == channel_status::closing)
                return false;
        for (const auto &[_, rec]: _merge_records)
            if (rec.closing)
                return false;
        return true;
    }

    void contract_host::note(const round_t now, const std::string &source, std::string event, nlohmann::json payload)
    {
        _log.append(now, "contract:" + source, std::move(event), std::move(payload));
    }
}
