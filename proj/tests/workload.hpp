#pragma once

// Random contract workloads shared by several suites.

#include <vector>

#include "fixtures.hpp"
#include "w3sim/contract_vm.hpp"
#include "w3sim/rng.hpp"

namespace workload {

struct Market {
    std::vector<fixture::User> users;
    w3sim::ContractState state;
    w3sim::ContractId token{}, nft{}, market{};

    explicit Market(std::size_t n_users = 4, const std::string& tag = "wl") {
        using namespace w3sim;
        for (std::size_t i = 0; i < n_users; ++i) users.push_back(fixture::user(tag + "-u" + std::to_string(i)));
        const auto& d = users[0].id();
        token = deploy_contract(state, {make_contract_id(d, "ft"), ContractKind::FungibleToken, d, 10'000, {}, {}});
        nft = deploy_contract(state, {make_contract_id(d, "nft"), ContractKind::NonFungibleToken, d, 0, {}, {}});
        market = deploy_contract(state, {make_contract_id(d, "mkt"), ContractKind::NftMarket, d, 0, nft, token});
        // Spread the supply so every user can pay.
        for (std::size_t i = 1; i < n_users; ++i)
            execute(state, fixture::call(users[0], state.nonce(d), token, "transfer",
                                         {w3sim::to_bytes(users[i].id()), encode_amount(1000)}));
    }

    /// One random call from a random user against the current state.
    w3sim::Transaction random_tx(w3sim::Rng& rng) const {
        using namespace w3sim;
        const auto& u = users[rng.below(users.size())];
        const auto& v = users[rng.below(users.size())];
        auto nonce = state.nonce(u.id());
        auto token_id = rng.below(6);
        switch (rng.below(6)) {
            case 0:
                return fixture::call(u, nonce, token, "transfer", {to_bytes(v.id()), encode_amount(rng.below(300))});
            case 1:
                return fixture::call(u, nonce, token, "approve", {to_bytes(v.id()), encode_amount(rng.below(300))});
            case 2:
                return fixture::call(u, nonce, token, "transferFrom",
                                     {to_bytes(v.id()), to_bytes(u.id()), encode_amount(rng.below(200))});
            case 3:
                return fixture::call(u, nonce, nft, "mint", {encode_u64(token_id), Bytes(32, std::uint8_t(token_id))});
            case 4:
                return fixture::call(u, nonce, market, "list", {encode_u64(token_id), encode_amount(10 + token_id)});
            default:
                return fixture::call(u, nonce, market, "buy", {encode_u64(token_id), encode_amount(10 + token_id)});
        }
    }
};

}  // namespace workload
