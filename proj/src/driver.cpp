#include "driver.hpp"

#include <algorithm>

#include "w3sim/error.hpp"

namespace w3sim::detail {

Stack::Stack(const ArchitectureType& arch, const SimConfig& sim, const FaultPlan& faults, std::uint64_t seed_)
    : seed(seed_), faults_(faults) {
    faults_.validate();
    SimConfig cfg = sim;
    cfg.agent_behavior = faults.agent_behavior;
    cfg.hybrid.behavior = faults.executor_behavior;
    cfg.hybrid.region = faults.tamper_region;
    cfg.consensus.seed = seed;
    cfg.consensus.crash_prob = faults.maintainer_crash_prob;
    if (faults.byzantine_maintainers > cfg.consensus.n_nodes)
        throw Error(Errc::InvalidConfig, "more byzantine maintainers than nodes");
    topo = compose(arch, cfg);
    provider_keys_ = generate_keypair(to_bytes("w3sim.provider"));
    provider_address_ = derive_address(provider_keys_.public_key, AddressScheme::Base16Eth);
    provider = provider_address_.payload;
}

WalletClient& Stack::wallet(const std::string& name) {
    auto it = wallets.find(name);
    if (it == wallets.end())
        it = wallets.emplace(name, WalletClient(generate_keypair(to_bytes("w3sim.user." + name)))).first;
    return it->second;
}

void Stack::start(const std::vector<std::string>& funded, Amount each) {
    const auto& cfg = topo.config;
    const Amount reserve = 1'000'000;
    token = deploy_contract(genesis, {make_contract_id(provider, "payment-token"), ContractKind::FungibleToken,
                                      provider, each * funded.size() + reserve, {}, {}});
    nft = deploy_contract(genesis, {make_contract_id(provider, "nft"), ContractKind::NonFungibleToken, provider, 0,
                                    {}, {}});
    market = deploy_contract(genesis, {make_contract_id(provider, "market"), ContractKind::NftMarket, provider, 0,
                                       nft, token});
    // Genesis allocation: the provider pays every participant up front.
    for (const auto& name : funded) {
        TxMetadata m{provider_address_, address_of(token, AddressScheme::Base16Eth), genesis.nonce(provider), 10'000'000, 0};
        TxPayload p{token, "transfer", {to_bytes(wallet(name).address().payload), encode_amount(each)}, {}};
        execute(genesis, build_transaction(provider_keys_.secret_key, m, std::move(p)));
    }

    net = std::make_unique<Network>(cfg.consensus, genesis);
    for (std::uint32_t i = 0; i < faults_.byzantine_maintainers; ++i)
        net->set_behavior(cfg.consensus.n_nodes - 1 - i, NodeBehavior::Byzantine, faults_.byzantine_mode);
    if (topo.hybrid_compute) {
        auto hy = cfg.hybrid;
        auto viol = violations;
        net->set_executor([hy, viol](const ContractState& s, const Transaction& tx, const ExecEnv& env) {
            auto r = execute_hybrid(s, tx, hy, env);
            if (r.receipt.success()) {
                // Oracle: the pure write set must match what the chain accepted.
                auto pure = dry_run(s, tx, env).writes;
                std::sort(pure.begin(), pure.end());
                if (pure != r.writes) viol->insert(tx.tx_id);
            }
            return r;
        });
    }
    if (topo.offchain_store) store = std::make_unique<OffChainStore>(cfg.storage_nodes, faults_.storage_crash_prob, seed);
    if (topo.uses_agent)
        agent = std::make_unique<Agent>(generate_keypair(to_bytes("w3sim.agent")), cfg.batch_size, cfg.flush_interval,
                                        cfg.agent_behavior);
}

void Stack::connect(const std::string& name) {
    auto& w = wallet(name);
    w.connect_wallet(*net, "nft-market");
    if (agent && enrolled.insert(name).second) grant_txs.insert(enroll(*net, w, *agent));
}

Submitted Stack::submit(const std::string& name, const ContractId& contract, std::string method,
                        std::vector<Bytes> args, Bytes inline_data) {
    auto& w = wallet(name);
    if (agent) {
        auto t = agent->submit_via_agent(w.address(), {contract, std::move(method), std::move(args), std::move(inline_data)});
        agent->pump(*net);
        return {std::nullopt, t.op_id};
    }
    TxPayload p{contract, std::move(method), std::move(args), std::move(inline_data)};
    return {w.submit_direct(*net, address_of(contract, AddressScheme::Base16Eth), std::move(p)), std::nullopt};
}

std::vector<Confirmation> Stack::step() {
    if (agent) agent->pump(*net);
    auto c = net->run_round();
    if (agent) agent->pump(*net);
    return c;
}

void Stack::settle(std::uint64_t max_rounds) {
    for (std::uint64_t r = 0; r < max_rounds; ++r) {
        if (net->pending() == 0 && (!agent || agent->buffered() == 0)) break;
        step();
    }
}

bool Stack::inline_route(std::size_t size) const {
    if (std::holds_alternative<OnChainPlan>(topo.plan)) return true;
    if (auto* h = std::get_if<HybridPlan>(&topo.plan)) return size <= h->inline_threshold;
    return false;
}

void Stack::index_confirmations() {
    tx_status_.clear();
    op_status_.clear();
    for (const auto& c : net->confirmations()) {
        tx_status_[c.tx.tx_id] = {true, c.receipt.success(), c.tick, c.tx.tx_id};
        for (const auto& op : c.receipt.ops)
            op_status_[op.op_id] = {true, c.receipt.success() && op.status == RevertReason::None, c.tick, c.tx.tx_id};
    }
}

Stack::OpStatus Stack::status(const Submitted& s) const {
    if (s.tx) {
        auto it = tx_status_.find(*s.tx);
        return it == tx_status_.end() ? OpStatus{} : it->second;
    }
    if (s.op) {
        auto it = op_status_.find(*s.op);
        return it == op_status_.end() ? OpStatus{} : it->second;
    }
    return {};
}

}  // namespace w3sim::detail
