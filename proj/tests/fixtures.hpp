#pragma once

#include <string>

#include "w3sim/contract_vm.hpp"

namespace fixture {

struct User {
    w3sim::KeyPair keys;
    w3sim::Address address;
    const w3sim::AccountId& id() const { return address.payload; }
};

inline User user(const std::string& name) {
    auto kp = w3sim::generate_keypair(w3sim::to_bytes(name));
    return {kp, w3sim::derive_address(kp.public_key, w3sim::AddressScheme::Base16Eth)};
}

inline w3sim::Transaction call(const User& from, std::uint64_t nonce, const w3sim::ContractId& contract,
                               std::string method, std::vector<w3sim::Bytes> args, w3sim::Bytes inline_data = {},
                               std::uint64_t gas_limit = 10'000'000) {
    w3sim::TxMetadata m;
    m.sender = from.address;
    m.receiver = w3sim::address_of(contract, w3sim::AddressScheme::Base16Eth);
    m.nonce = nonce;
    m.gas_limit = gas_limit;
    w3sim::TxPayload p;
    p.contract_id = contract;
    p.method = std::move(method);
    p.args = std::move(args);
    p.inline_data = std::move(inline_data);
    return w3sim::build_transaction(from.keys.secret_key, m, std::move(p));
}

}  // namespace fixture
