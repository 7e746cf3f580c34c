#include <mutex>
#include <sodium.h>
#include <starfish/core/crypto.hpp>

namespace starfish {
    namespace {
        void ensure_sodium()
        {
            static std::once_flag once;
            std::call_once(once, [] {
                if (sodium_init() < 0)
                    throw error("libsodium initialization failed");
            });
        }
    }

    tag_t hmac_sha256(const std::span<const std::uint8_t> key, const std::span<const std::uint8_t> message)
    {
        ensure_sodium();
        crypto_auth_hmacsha256_state st;
        crypto_auth_hmacsha256_init(&st, key.data(), key.size());
        crypto_auth_hmacsha256_update(&st, message.data(), message.size());
        tag_t out {};
        crypto_auth_hmacsha256_final(&st, out.data());
        return out;
    }

    signature key_pair::sign(const std::span<const std::uint8_t> message) const
    {
        return { _owner, hmac_sha256(_secret, message) };
    }

    signature key_pair::forge_as(const party_id &victim, const std::span<const std::uint8_t> message) const
    {
        return { victim, hmac_sha256(_secret, message) };
    }

    key_registry key_registry::derive(const std::vector<party_id> &parties, const std::uint64_t seed)
    {
        ensure_sodium();
        key_registry reg;
        for (const auto &p: parties) {
            byte_writer w;
            w.str("starfish-party-key").u64(seed).str(p.str());
            tag_t secret {};
            crypto_hash_sha256(secret.data(), w.data().data(), w.data().size());
            reg._keys.emplace(p, key_pair { p, secret });
        }
        return reg;
    }

    const key_pair &key_registry::keys(const party_id &p) const
    {
        const auto it = _keys.find(p);
        if (it == _keys.end())
            throw error("no key material for party " + p.str());
        return it->second;
    }

    bool key_registry::verify(const party_id &signer, const std::span<const std::uint8_t> message, const signature &sig) const
    {
        if (sig.signer != signer)
            return false;
        const auto it = _keys.find(signer);
        if (it == _keys.end())
            return false;
        const auto expected = it->second.sign(message);
        return sodium_memcmp(expected.tag.data(), sig.tag.data(), expected.tag.size()) == 0;
    }
}
