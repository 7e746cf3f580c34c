#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <starfish/contracts/contract_host.hpp>

// Drives contract_host directly: requests land the round they are handed over, deadlines fire
// after each round's requests.
namespace starfish::testing {
    inline std::filesystem::path source_root() { return STARFISH_SOURCE_ROOT; }
    inline std::filesystem::path scenario_path(const std::string &name) { return source_root() / "scenarios" / (name + ".json"); }

    inline std::string read_file(const std::filesystem::path &p)
    {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    struct contract_bench {
        std::vector<party_id> parties;
        key_registry keys;
        event_log log {};
        contract_host host;
        round_t now = 0;
        std::vector<addressed_notice> notices {};

        contract_bench(const balance_map &funding, round_t delta, std::uint64_t seed = 1):
            parties { ids(funding) }, keys { key_registry::derive(parties, seed) }, host { ledger { funding }, delta, keys, log }
        {
        }

        static std::vector<party_id> ids(const balance_map &m)
        {
            std::vector<party_id> out;
            for (const auto &[p, _]: m)
                out.push_back(p);
            return out;
        }

        void submit(const party_id &sender, const contract_request &r)
        {
            auto n = host.handle(now, sender, r);
            notices.insert(notices.end(), n.begin(), n.end());
        }

        void end_round()
        {
            auto n = host.tick(now);
            notices.insert(notices.end(), n.begin(), n.end());
            ++now;
        }

        void advance_to(round_t r)
        {
            while (now < r)
                end_round();
        }

        void open_channel(const std::string &id, const std::string &a, const std::string &b, amount_t fund_a, amount_t fund_b)
        {
            const channel_spec spec { channel_id { id }, party_id { a }, party_id { b }, fund_a, fund_b };
            submit(spec.a, open_channel_request { spec });
            submit(spec.b, open_channel_request { spec });
        }

        signed_state cosign(signed_state s, const std::vector<party_id> &signers) const
        {
            for (const auto &p: signers)
                s.sign(keys.keys(p));
            return s;
        }

        // Hub-funded merge over channels that are still at their funding state.
        void open_merge(const std::string &id, const std::string &hub, const std::vector<std::tuple<std::string, std::string, amount_t>> &edges)
        {
            merge_proposal prop { merge_id { id }, party_id { hub }, now, {} };
            for (const auto &[user, ch, cap]: edges)
                prop.edges.push_back({ party_id { user }, channel_id { ch }, 0, 0, cap });
            open_merge_request req { prop, {}, {} };
            const auto bytes = prop.signing_bytes();
            req.signatures.push_back(keys.keys(prop.hub).sign(bytes));
            for (const auto &e: prop.edges)
                req.signatures.push_back(keys.keys(e.user).sign(bytes));
            submit(prop.hub, req);
        }

        template<typename T>
        std::vector<T> notices_of() const
        {
            std::vector<T> out;
            for (const auto &n: notices)
                if (const auto *x = std::get_if<T>(&n.notice))
                    out.push_back(*x);
            return out;
        }
    };
}
