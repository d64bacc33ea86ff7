#pragma once

// Wires a composed architecture onto one network. Internal to the harness.

#include <map>
#include <memory>
#include <set>

#include "w3sim/atam.hpp"

namespace w3sim::detail {

struct Submitted {
    std::optional<TxId> tx;    // direct submission
    std::optional<Digest> op;  // agent-routed op
};

class Stack {
public:
    Stack(const ArchitectureType& arch, const SimConfig& sim, const FaultPlan& faults, std::uint64_t seed);

    /// Funds every named identity in the payment token at genesis, then starts the network.
    void start(const std::vector<std::string>& funded, Amount each);

    WalletClient& wallet(const std::string& name);
    /// Opens the wallet session, and for agent access enrolls the user with the agent.
    void connect(const std::string& name);
    Submitted submit(const std::string& name, const ContractId& contract, std::string method, std::vector<Bytes> args,
                     Bytes inline_data = {});

    /// Pumps the agent and runs rounds until nothing is pending or max_rounds pass.
    void settle(std::uint64_t max_rounds);
    /// One round plus an agent pump.
    std::vector<Confirmation> step();

    bool inline_route(std::size_t size) const;

    struct OpStatus {
        bool confirmed = false;
        bool success = false;
        std::uint64_t tick = 0;
        TxId carrier{};  // the confirmed transaction that carried it
    };
    OpStatus status(const Submitted& s) const;
    void index_confirmations();

    SimulationTopology topo;
    std::uint64_t seed;
    ContractState genesis;
    AccountId provider{};
    ContractId token{}, nft{}, market{};
    std::unique_ptr<Network> net;
    std::unique_ptr<OffChainStore> store;
    std::unique_ptr<Agent> agent;
    std::map<std::string, WalletClient> wallets;
    std::set<std::string> enrolled;
    std::shared_ptr<std::set<TxId>> violations = std::make_shared<std::set<TxId>>();
    std::set<TxId> grant_txs;

private:
    FaultPlan faults_;
    KeyPair provider_keys_;
    Address provider_address_;
    std::map<TxId, OpStatus> tx_status_;
    std::map<Digest, OpStatus> op_status_;
};

}  // namespace w3sim::detail
