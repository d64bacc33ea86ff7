#include "w3sim/access.hpp"

#include "w3sim/error.hpp"
#include "w3sim/storage.hpp"

namespace w3sim {

namespace {

std::uint64_t observed_nonce(const Network& net, const AccountId& account) {
    auto obs = net.observer();
    return obs ? net.node(*obs).state.nonce(account) : 0;
}

void submit_or_throw(Network& net, const Transaction& tx) {
    switch (net.submit(tx)) {
        case SubmitStatus::Accepted: return;
        case SubmitStatus::DuplicateTx: throw Error(Errc::DuplicateTx);
        case SubmitStatus::PoolFull: throw Error(Errc::PoolFull);
    }
}

}  // namespace

WalletClient::WalletClient(KeyPair keys, AddressScheme scheme)
    : keys_(keys), address_(derive_address(keys.public_key, scheme)) {}

const std::string& WalletClient::connect_wallet(Network& net, const std::string& service_id) {
    if (!session_ || session_key_ != keys_.public_key) {
        session_ = service_id + ":" + address_.text;
        session_key_ = keys_.public_key;
        nonce_ = std::max(nonce_, observed_nonce(net, address_.payload));
    }
    return *session_;
}

void WalletClient::rotate_key(const Bytes& seed) { keys_ = generate_keypair(seed); }

TxId WalletClient::submit_direct(Network& net, const Address& receiver, TxPayload payload, std::uint64_t gas_limit) {
    if (!session_) throw Error(Errc::NotConnected);
    if (payload.inline_data.size() > kInlineCap) throw Error(Errc::InlineTooLarge);
    TxMetadata m{address_, receiver, nonce_, gas_limit, net.now()};
    Transaction tx;
    if (keys_.public_key == session_key_) {
        tx = build_transaction(keys_.secret_key, m, std::move(payload));
    } else {
        // Stale session: the envelope still names the session key.
        tx.metadata = m;
        tx.payload = std::move(payload);
        tx.sender_key = session_key_;
        tx.signature = sign(keys_.secret_key, serialize(tx.metadata, tx.payload));
        tx.tx_id = compute_tx_id(tx.metadata, tx.payload, tx.signature);
    }
    if (validate_transaction(tx, nonce_) == TxCheck::InvalidSignature) throw Error(Errc::InvalidSignature);
    submit_or_throw(net, tx);
    ++nonce_;
    return tx.tx_id;
}

std::string_view to_string(AgentBehavior b) { return b == AgentBehavior::Honest ? "Honest" : "Withholding"; }

Agent::Agent(KeyPair keys, std::size_t batch_size, std::uint64_t flush_interval, AgentBehavior behavior)
    : keys_(keys),
      address_(derive_address(keys.public_key, AddressScheme::Base16Eth)),
      batch_size_(batch_size),
      flush_interval_(flush_interval),
      behavior_(behavior) {
    if (batch_size_ == 0) throw Error(Errc::InvalidConfig, "batch_size must be >= 1");
}

void Agent::register_user(const Address& user) {
    if (users_.insert(user.payload).second) next_seq_.try_emplace(user.payload, 0);
}

OpTicket Agent::submit_via_agent(const Address& user, UserOp op) {
    if (!registered(user)) throw Error(Errc::UnregisteredUser);
    if (op.inline_data.size() > kInlineCap) throw Error(Errc::InlineTooLarge);
    auto seq = next_seq_[user.payload]++;
    buffer_.push_back({user.payload, seq, op.contract, std::move(op.method), std::move(op.args),
                       std::move(op.inline_data)});
    return {w3sim::op_id(address_.payload, user.payload, seq), user.payload, seq};
}

std::optional<TxId> Agent::flush(Network& net) {
    if (buffer_.empty()) return std::nullopt;
    auto take = std::min(batch_size_, buffer_.size());
    std::vector<BundledOp> ops(std::make_move_iterator(buffer_.begin()),
                               std::make_move_iterator(buffer_.begin() + static_cast<std::ptrdiff_t>(take)));
    buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(take));
    waiting_since_.reset();

    if (!nonce_) nonce_ = observed_nonce(net, address_.payload);
    TxMetadata m{address_, address_of(ContractId{}, AddressScheme::Base16Eth), *nonce_, 10'000'000, net.now()};
    TxPayload p{ContractId{}, "multicall", encode_bundle(ops), {}};
    auto tx = build_transaction(keys_.secret_key, m, std::move(p));
    if (behavior_ == AgentBehavior::Withholding) return tx.tx_id;
    submit_or_throw(net, tx);
    ++*nonce_;
    ++emitted_;
    return tx.tx_id;
}

std::vector<TxId> Agent::pump(Network& net) {
    std::vector<TxId> out;
    while (buffer_.size() >= batch_size_)
        if (auto id = flush(net)) out.push_back(*id);
    if (buffer_.empty()) return out;
    if (!waiting_since_) waiting_since_ = net.now();
    if (net.now() >= *waiting_since_ + flush_interval_)
        if (auto id = flush(net)) out.push_back(*id);
    return out;
}

TxId enroll(Network& net, WalletClient& user, Agent& agent) {
    TxPayload p{ContractId{}, "grantAgent", {to_bytes(agent.address().payload)}, {}};
    auto id = user.submit_direct(net, agent.address(), std::move(p));
    agent.register_user(user.address());
    return id;
}

RetrievedState retrieve_state(const Network& net, std::uint32_t node_id, const AccountId& account,
                              const ContractId& contract) {
    const auto& node = net.node(node_id);
    auto it = node.last_touch.find({account, contract});
    if (it == node.last_touch.end()) throw Error(Errc::NoConfirmedState);
    const auto height = node.tx_height.at(it->second);
    const auto& block = node.chain.at(height);
    RetrievedState out;
    out.height = height;
    for (const auto& tx : block.txs)
        if (tx.tx_id == it->second) out.tx = tx;
    if (auto c = net.find_confirmed(it->second)) out.receipt = c->receipt;
    out.view = node.state.account_view(account, contract);
    return out;
}

}  // namespace w3sim
