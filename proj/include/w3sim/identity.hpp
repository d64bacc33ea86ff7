#pragma once

#include <string>

#include "w3sim/bytes.hpp"

namespace w3sim {

using SecretKey = std::array<std::uint8_t, 32>;
using PublicKey = std::array<std::uint8_t, 32>;

/// Default seed length in bytes (256-bit security parameter).
inline constexpr std::size_t kSeedBytes = 32;

struct KeyPair {
    SecretKey secret_key{};
    PublicKey public_key{};

    friend bool operator==(const KeyPair&, const KeyPair&) = default;
};

enum class AddressScheme : std::uint8_t { Base16Eth = 0, Base58Btc = 1 };

struct Address {
    AddressScheme scheme = AddressScheme::Base16Eth;
    AccountId payload{};
    std::string text;

    friend bool operator==(const Address& a, const Address& b) {
        return a.scheme == b.scheme && a.payload == b.payload;
    }
};

struct Signature {
    Digest bytes{};
    friend bool operator==(const Signature&, const Signature&) = default;
};

// Key generation. The public key is digest("w3sim.pk" || sk) and sk is
// digest("w3sim.sk" || seed). Every generated pair is enrolled in the
// process-wide key registry so verify() can re-derive signatures.
KeyPair generate_keypair(ByteView seed);

/// Pure public-key derivation; does not touch the registry.
PublicKey public_key_of(const SecretKey& sk);

/// payload = first 20 bytes of digest(pk). Throws MalformedKey unless pk is 32 bytes.
Address derive_address(ByteView pk, AddressScheme scheme);
Address address_of(const AccountId& payload, AddressScheme scheme);

/// Parses either text form ("0x..." hex or base-58).
Address parse_address(std::string_view text);

std::string encode_base58(ByteView bytes);
Bytes decode_base58(std::string_view text);
std::string encode_base16(ByteView bytes);
Bytes decode_base16(std::string_view text);

// Simulated signature scheme: sig = digest(sk || message).
Signature sign(const SecretKey& sk, ByteView message);
bool verify(const PublicKey& pk, ByteView message, const Signature& sig);

}  // namespace w3sim
