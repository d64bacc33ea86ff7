#pragma once

#include <optional>
#include <string>
#include <vector>

#include "w3sim/identity.hpp"

namespace w3sim {

using TxId = Digest;

struct TxMetadata {
    Address sender;
    Address receiver;
    std::uint64_t nonce = 0;
    std::uint64_t gas_limit = 0;
    std::uint64_t sim_time = 0;
};

struct TxPayload {
    std::optional<ContractId> contract_id;
    std::string method;
    std::vector<Bytes> args;
    Bytes inline_data;
};

struct Transaction {
    TxMetadata metadata;
    TxPayload payload;
    PublicKey sender_key{};
    Signature signature;
    TxId tx_id{};
};

enum class TxCheck { Ok, InvalidSignature, StaleNonce, FutureNonce };

std::string_view to_string(TxCheck c);

/// Canonical bytes signed by the sender: length-prefixed fields in
/// declaration order, big-endian integers.
Bytes serialize(const TxMetadata& m, const TxPayload& p);

/// Full envelope encoding (metadata, payload, sender key, signature).
Bytes encode_transaction(const Transaction& tx);
Transaction decode_transaction(ByteView wire);

TxId compute_tx_id(const TxMetadata& m, const TxPayload& p, const Signature& sig);

/// Signs and envelopes. Throws SenderKeyMismatch when sk does not own
/// metadata.sender, Malformed when a method is given without a contract.
Transaction build_transaction(const SecretKey& sk, const TxMetadata& metadata, TxPayload payload);

TxCheck validate_transaction(const Transaction& tx, std::uint64_t expected_nonce);

/// Signature and sender-key binding only (no nonce check).
bool signature_valid(const Transaction& tx);

}  // namespace w3sim
