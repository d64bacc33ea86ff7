#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace w3sim {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

/// 256-bit digest value.
using Digest = std::array<std::uint8_t, 32>;

/// 20-byte account / contract handle (the address payload, scheme-free).
using AccountId = std::array<std::uint8_t, 20>;
using ContractId = AccountId;

/// Token amounts. Unsigned so every debit has to be checked explicitly.
using Amount = unsigned __int128;

inline Bytes to_bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }

template <std::size_t N>
Bytes to_bytes(const std::array<std::uint8_t, N>& a) {
    return Bytes(a.begin(), a.end());
}

/// Lowercase hex without prefix.
std::string hex(ByteView b);
Bytes unhex(std::string_view s);

std::string amount_to_string(Amount v);
Amount amount_from_string(std::string_view s);

/// Canonical writer: big-endian integers, u32 length prefix on variable fields.
class ByteWriter {
public:
    ByteWriter& u8(std::uint8_t v) {
        out_.push_back(v);
        return *this;
    }
    ByteWriter& u32(std::uint32_t v) { return be(v, 4); }
    ByteWriter& u64(std::uint64_t v) { return be(v, 8); }
    ByteWriter& u128(Amount v);
    ByteWriter& raw(ByteView b) {
        out_.insert(out_.end(), b.begin(), b.end());
        return *this;
    }
    ByteWriter& field(ByteView b) {
        u32(static_cast<std::uint32_t>(b.size()));
        return raw(b);
    }
    ByteWriter& field(std::string_view s) {
        return field(ByteView(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
    }

    const Bytes& bytes() const& { return out_; }
    Bytes bytes() && { return std::move(out_); }

private:
    ByteWriter& be(std::uint64_t v, int width) {
        for (int i = width - 1; i >= 0; --i)
            out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
        return *this;
    }
    Bytes out_;
};

/// Reader matching ByteWriter. Throws Error(Errc::Malformed) on underrun.
class ByteReader {
public:
    explicit ByteReader(ByteView b) : in_(b) {}
    std::uint8_t u8();
    std::uint32_t u32();
    std::uint64_t u64();
    Amount u128();
    Bytes raw(std::size_t n);
    Bytes field();
    std::string str();
    bool done() const { return pos_ == in_.size(); }

private:
    void need(std::size_t n) const;
    ByteView in_;
    std::size_t pos_ = 0;
};

// Argument encoding helpers for contract calls.
Bytes encode_u64(std::uint64_t v);
Bytes encode_amount(Amount v);
std::uint64_t decode_u64(ByteView b);
Amount decode_amount(ByteView b);
AccountId to_account(ByteView b);

}  // namespace w3sim
