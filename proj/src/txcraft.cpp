#include "w3sim/txcraft.hpp"

#include "w3sim/digest.hpp"
#include "w3sim/error.hpp"

namespace w3sim {

namespace {

void write_address(ByteWriter& w, const Address& a) {
    w.u8(static_cast<std::uint8_t>(a.scheme)).field(a.payload);
}

Address read_address(ByteReader& r) {
    auto scheme = r.u8();
    if (scheme > 1) throw Error(Errc::Malformed, "unknown address scheme");
    return address_of(to_account(r.field()), static_cast<AddressScheme>(scheme));
}

void write_body(ByteWriter& w, const TxMetadata& m, const TxPayload& p) {
    write_address(w, m.sender);
    write_address(w, m.receiver);
    w.u64(m.nonce).u64(m.gas_limit).u64(m.sim_time);
    if (p.contract_id)
        w.field(*p.contract_id);
    else
        w.field(ByteView{});
    w.field(p.method);
    w.u32(static_cast<std::uint32_t>(p.args.size()));
    for (const auto& a : p.args) w.field(a);
    w.field(p.inline_data);
}

}  // namespace

std::string_view to_string(TxCheck c) {
    switch (c) {
        case TxCheck::Ok: return "Ok";
        case TxCheck::InvalidSignature: return "InvalidSignature";
        case TxCheck::StaleNonce: return "StaleNonce";
        case TxCheck::FutureNonce: return "FutureNonce";
    }
    return "Unknown";
}

Bytes serialize(const TxMetadata& m, const TxPayload& p) {
    ByteWriter w;
    write_body(w, m, p);
    return std::move(w).bytes();
}

TxId compute_tx_id(const TxMetadata& m, const TxPayload& p, const Signature& sig) {
    ByteWriter w;
    write_body(w, m, p);
    w.field(sig.bytes);
    return digest(w.bytes());
}

Bytes encode_transaction(const Transaction& tx) {
    ByteWriter w;
    write_body(w, tx.metadata, tx.payload);
    w.field(tx.sender_key).field(tx.signature.bytes);
    return std::move(w).bytes();
}

Transaction decode_transaction(ByteView wire) {
    ByteReader r(wire);
    Transaction tx;
    tx.metadata.sender = read_address(r);
    tx.metadata.receiver = read_address(r);
    tx.metadata.nonce = r.u64();
    tx.metadata.gas_limit = r.u64();
    tx.metadata.sim_time = r.u64();
    auto cid = r.field();
    if (!cid.empty()) tx.payload.contract_id = to_account(cid);
    tx.payload.method = r.str();
    auto nargs = r.u32();
    for (std::uint32_t i = 0; i < nargs; ++i) tx.payload.args.push_back(r.field());
    tx.payload.inline_data = r.field();
    auto pk = r.field();
    auto sig = r.field();
    if (pk.size() != 32 || sig.size() != 32) throw Error(Errc::Malformed, "bad key or signature length");
    std::copy(pk.begin(), pk.end(), tx.sender_key.begin());
    std::copy(sig.begin(), sig.end(), tx.signature.bytes.begin());
    if (!r.done()) throw Error(Errc::Malformed, "trailing bytes");
    tx.tx_id = compute_tx_id(tx.metadata, tx.payload, tx.signature);
    return tx;
}

Transaction build_transaction(const SecretKey& sk, const TxMetadata& metadata, TxPayload payload) {
    if (!payload.method.empty() && !payload.contract_id)
        throw Error(Errc::Malformed, "method call without contract id");
    auto pk = public_key_of(sk);
    if (derive_address(pk, metadata.sender.scheme).payload != metadata.sender.payload)
        throw Error(Errc::SenderKeyMismatch);
    Transaction tx;
    tx.metadata = metadata;
    tx.payload = std::move(payload);
    tx.sender_key = pk;
    tx.signature = sign(sk, serialize(tx.metadata, tx.payload));
    tx.tx_id = compute_tx_id(tx.metadata, tx.payload, tx.signature);
    return tx;
}

bool signature_valid(const Transaction& tx) {
    if (derive_address(tx.sender_key, tx.metadata.sender.scheme).payload != tx.metadata.sender.payload)
        return false;
    return verify(tx.sender_key, serialize(tx.metadata, tx.payload), tx.signature);
}

TxCheck validate_transaction(const Transaction& tx, std::uint64_t expected_nonce) {
    if (!signature_valid(tx)) return TxCheck::InvalidSignature;
    if (tx.metadata.nonce < expected_nonce) return TxCheck::StaleNonce;
    if (tx.metadata.nonce > expected_nonce) return TxCheck::FutureNonce;
    return TxCheck::Ok;
}

}  // namespace w3sim
