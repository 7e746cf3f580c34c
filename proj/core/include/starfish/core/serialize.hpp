#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace starfish {
    using byte_vector = std::vector<std::uint8_t>;

    // Canonical encoding used for everything that gets signed: fields are written in
    // declaration order, integers big-endian, strings and byte blobs prefixed with a u32 length.
    class byte_writer {
    public:
        byte_writer &u8(std::uint8_t v);
        byte_writer &u32(std::uint32_t v);
        byte_writer &u64(std::uint64_t v);
        byte_writer &i64(std::int64_t v);
        byte_writer &str(std::string_view s);
        byte_writer &bytes(std::span<const std::uint8_t> b);

        const byte_vector &data() const noexcept { return _buf; }
        byte_vector take() noexcept { return std::move(_buf); }
    private:
        byte_vector _buf {};
    };

    std::string to_hex(std::span<const std::uint8_t> bytes);
}
