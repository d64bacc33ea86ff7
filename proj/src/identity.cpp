#include "w3sim/identity.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <shared_mutex>

#include "w3sim/digest.hpp"
#include "w3sim/error.hpp"

namespace w3sim {

namespace {

constexpr std::string_view kBase58Alphabet =
    "123456789ABCDEFGHJKLMNPQRSTUVWXYZabcdefghijkmnopqrstuvwxyz";

// Append-only map pk -> sk backing simulated verification.
class KeyRegistry {
public:
    void enroll(const KeyPair& kp) {
        std::unique_lock lock(mu_);
        keys_.emplace(kp.public_key, kp.secret_key);
    }
    bool lookup(const PublicKey& pk, SecretKey& out) const {
        std::shared_lock lock(mu_);
        auto it = keys_.find(pk);
        if (it == keys_.end()) return false;
        out = it->second;
        return true;
    }

private:
    mutable std::shared_mutex mu_;
    std::map<PublicKey, SecretKey> keys_;
};

KeyRegistry& registry() {
    static KeyRegistry r;
    return r;
}

}  // namespace

PublicKey public_key_of(const SecretKey& sk) {
    return Hasher().update("w3sim.pk").update(sk).finish();
}

KeyPair generate_keypair(ByteView seed) {
    if (seed.empty()) throw Error(Errc::EmptySeed);
    KeyPair kp;
    kp.secret_key = Hasher().update("w3sim.sk").update(seed).finish();
    kp.public_key = public_key_of(kp.secret_key);
    registry().enroll(kp);
    return kp;
}

Address address_of(const AccountId& payload, AddressScheme scheme) {
    Address a;
    a.scheme = scheme;
    a.payload = payload;
    a.text = scheme == AddressScheme::Base16Eth ? encode_base16(payload) : encode_base58(payload);
    return a;
}

Address derive_address(ByteView pk, AddressScheme scheme) {
    if (pk.size() != 32) throw Error(Errc::MalformedKey, "public key must be 32 bytes");
    auto d = digest(pk);
    AccountId payload{};
    std::copy_n(d.begin(), payload.size(), payload.begin());
    return address_of(payload, scheme);
}

Address parse_address(std::string_view text) {
    Bytes raw;
    AddressScheme scheme;
    if (text.starts_with("0x")) {
        raw = decode_base16(text);
        scheme = AddressScheme::Base16Eth;
    } else {
        raw = decode_base58(text);
        scheme = AddressScheme::Base58Btc;
    }
    if (raw.size() != 20) throw Error(Errc::InvalidEncoding, "address payload must be 20 bytes");
    return address_of(to_account(raw), scheme);
}

std::string encode_base58(ByteView bytes) {
    std::size_t zeros = 0;
    while (zeros < bytes.size() && bytes[zeros] == 0) ++zeros;
    // Base-256 to base-58 conversion on a little-endian digit buffer.
    std::vector<std::uint8_t> digits;
    digits.reserve(bytes.size() * 138 / 100 + 1);
    for (std::size_t i = zeros; i < bytes.size(); ++i) {
        int carry = bytes[i];
        for (auto& d : digits) {
            carry += 256 * d;
            d = static_cast<std::uint8_t>(carry % 58);
            carry /= 58;
        }
        while (carry > 0) {
            digits.push_back(static_cast<std::uint8_t>(carry % 58));
            carry /= 58;
        }
    }
    std::string out(zeros, '1');
    for (auto it = digits.rbegin(); it != digits.rend(); ++it) out.push_back(kBase58Alphabet[*it]);
    return out;
}

Bytes decode_base58(std::string_view text) {
    std::size_t ones = 0;
    while (ones < text.size() && text[ones] == '1') ++ones;
    std::vector<std::uint8_t> bytes;  // little-endian base-256
    for (std::size_t i = ones; i < text.size(); ++i) {
        auto pos = kBase58Alphabet.find(text[i]);
        if (pos == std::string_view::npos) throw Error(Errc::InvalidEncoding, "invalid base58 character");
        int carry = static_cast<int>(pos);
        for (auto& b : bytes) {
            carry += 58 * b;
            b = static_cast<std::uint8_t>(carry & 0xff);
            carry >>= 8;
        }
        while (carry > 0) {
            bytes.push_back(static_cast<std::uint8_t>(carry & 0xff));
            carry >>= 8;
        }
    }
    Bytes out(ones, 0);
    out.insert(out.end(), bytes.rbegin(), bytes.rend());
    return out;
}

std::string encode_base16(ByteView bytes) { return "0x" + hex(bytes); }

Bytes decode_base16(std::string_view text) {
    if (!text.starts_with("0x")) throw Error(Errc::InvalidEncoding, "missing 0x prefix");
    return unhex(text.substr(2));
}

Signature sign(const SecretKey& sk, ByteView message) {
    return Signature{Hasher().update(sk).update(message).finish()};
}

bool verify(const PublicKey& pk, ByteView message, const Signature& sig) {
    SecretKey sk;
    if (!registry().lookup(pk, sk)) return false;
    return sign(sk, message) == sig;
}

}  // namespace w3sim
