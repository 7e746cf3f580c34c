#include <starfish/core/serialize.hpp>
#include <starfish/core/types.hpp>

namespace starfish {
    byte_writer &byte_writer::u8(const std::uint8_t v)
    {
        _buf.push_back(v);
        return *this;
    }

    byte_writer &byte_writer::u32(const std::uint32_t v)
    {
        for (int shift = 24; shift >= 0; shift -= 8)
            _buf.push_back(static_cast<std::uint8_t>(v >> shift));
        return *this;
    }

    byte_writer &byte_writer::u64(const std::uint64_t v)
    {
        for (int shift = 56; shift >= 0; shift -= 8)
            _buf.push_back(static_cast<std::uint8_t>(v >> shift));
        return *this;
    }

    byte_writer &byte_writer::i64(const std::int64_t v)
    {
        return u64(static_cast<std::uint64_t>(v));
    }

    byte_writer &byte_writer::str(const std::string_view s)
    {
        if (s.size() > UINT32_MAX)
            throw error("string field too long for canonical encoding");
        u32(static_cast<std::uint32_t>(s.size()));
        _buf.insert(_buf.end(), s.begin(), s.end());
        return *this;
    }

    byte_writer &byte_writer::bytes(const std::span<const std::uint8_t> b)
    {
        if (b.size() > UINT32_MAX)
            throw error("byte field too long for canonical encoding");
        u32(static_cast<std::uint32_t>(b.size()));
        _buf.insert(_buf.end(), b.begin(), b.end());
        return *this;
    }

    std::string to_hex(const std::span<const std::uint8_t> bytes)
    {
        static constexpr char digits[] = "0123456789abcdef";
        std::string out;
        out.reserve(bytes.size() * 2);
        for (const auto b: bytes) {
            out.push_back(digits[b >> 4]);
            out.push_back(digits[b & 0x0F]);
        }
        return out;
    }
}
