#pragma once

#include <array>
#include <map>
#include <span>
#include <vector>
#include <starfish/core/serialize.hpp>
#include <starfish/core/types.hpp>

namespace starfish {
    using tag_t = std::array<std::uint8_t, 32>;

    struct signature {
        party_id signer;
        tag_t tag {};

        bool operator==(const signature &) const = default;
    };

    // A party's signing key. The default scheme is a keyed tag (HMAC-SHA-256 over the
    // canonical bytes) with a per-party secret; verification goes through key_registry,
    // which plays the role of the public-key directory.
    class key_pair {
    public:
        key_pair(party_id owner, const tag_t &secret): _owner { std::move(owner) }, _secret { secret } {}

        const party_id &owner() const noexcept { return _owner; }
        signature sign(std::span<const std::uint8_t> message) const;
        // Produces a tag with this key while claiming another signer; only adversarial scripts use it.
        signature forge_as(const party_id &victim, std::span<const std::uint8_t> message) const;
    private:
        party_id _owner;
        tag_t _secret;
    };

    class key_registry {
    public:
        // Secrets are derived from (seed, party id) so identical scenarios produce identical signatures.
        static key_registry derive(const std::vector<party_id> &parties, std::uint64_t seed);

        const key_pair &keys(const party_id &p) const;
        bool knows(const party_id &p) const { return _keys.contains(p); }
        bool verify(const party_id &signer, std::span<const std::uint8_t> message, const signature &sig) const;
    private:
        std::map<party_id, key_pair> _keys {};
    };

    tag_t hmac_sha256(std::span<const std::uint8_t> key, std::span<const std::uint8_t> message);
}
