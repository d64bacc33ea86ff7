#include "w3sim/bytes.hpp"

#include <algorithm>

#include "w3sim/error.hpp"

namespace w3sim {

std::string hex(ByteView b) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(b.size() * 2);
    for (auto c : b) {
        out.push_back(digits[c >> 4]);
        out.push_back(digits[c & 0x0f]);
    }
    return out;
}

namespace {
int nibble(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}
}  // namespace

Bytes unhex(std::string_view s) {
    if (s.size() % 2 != 0) throw Error(Errc::InvalidEncoding, "odd-length hex string");
    Bytes out;
    out.reserve(s.size() / 2);
    for (std::size_t i = 0; i < s.size(); i += 2) {
        int hi = nibble(s[i]);
        int lo = nibble(s[i + 1]);
        if (hi < 0 || lo < 0) throw Error(Errc::InvalidEncoding, "invalid hex digit");
        out.push_back(static_cast<std::uint8_t>(hi << 4 | lo));
    }
    return out;
}

std::string amount_to_string(Amount v) {
    if (v == 0) return "0";
    std::string s;
    while (v > 0) {
        s.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
        v /= 10;
    }
    std::reverse(s.begin(), s.end());
    return s;
}

Amount amount_from_string(std::string_view s) {
    if (s.empty()) throw Error(Errc::InvalidEncoding, "empty amount");
    Amount v = 0;
    for (char c : s) {
        if (c < '0' || c > '9') throw Error(Errc::InvalidEncoding, "invalid amount");
        v = v * 10 + static_cast<Amount>(c - '0');
    }
    return v;
}

ByteWriter& ByteWriter::u128(Amount v) {
    u64(static_cast<std::uint64_t>(v >> 64));
    return u64(static_cast<std::uint64_t>(v));
}

void ByteReader::need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw Error(Errc::Malformed, "truncated input");
}

std::uint8_t ByteReader::u8() {
    need(1);
    return in_[pos_++];
}

std::uint32_t ByteReader::u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = v << 8 | in_[pos_++];
    return v;
}

std::uint64_t ByteReader::u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = v << 8 | in_[pos_++];
    return v;
}

Amount ByteReader::u128() {
    Amount hi = u64();
    Amount lo = u64();
    return hi << 64 | lo;
}

Bytes ByteReader::raw(std::size_t n) {
    need(n);
    Bytes out(in_.begin() + static_cast<std::ptrdiff_t>(pos_),
              in_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return out;
}

Bytes ByteReader::field() { return raw(u32()); }

std::string ByteReader::str() {
    auto b = field();
    return std::string(b.begin(), b.end());
}

Bytes encode_u64(std::uint64_t v) { return ByteWriter().u64(v).bytes(); }
Bytes encode_amount(Amount v) { return ByteWriter().u128(v).bytes(); }

std::uint64_t decode_u64(ByteView b) {
    if (b.size() != 8) throw Error(Errc::Malformed, "expected 8-byte integer");
    return ByteReader(b).u64();
}

Amount decode_amount(ByteView b) {
    if (b.size() != 16) throw Error(Errc::Malformed, "expected 16-byte amount");
    return ByteReader(b).u128();
}

AccountId to_account(ByteView b) {
    if (b.size() != 20) throw Error(Errc::Malformed, "expected 20-byte account");
    AccountId a{};
    std::copy(b.begin(), b.end(), a.begin());
    return a;
}

}  // namespace w3sim
