#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "w3sim/consensus.hpp"

namespace w3sim {

/// Browser-wallet style client. A session must be open before submitting.
class WalletClient {
public:
    explicit WalletClient(KeyPair keys, AddressScheme scheme = AddressScheme::Base16Eth);

    const Address& address() const { return address_; }
    const KeyPair& keys() const { return keys_; }

    /// Opens a session for `service_id`; reconnecting returns the same session.
    const std::string& connect_wallet(Network& net, const std::string& service_id);
    bool connected() const { return session_.has_value(); }

    /// Replaces the signing key. The session keeps the old public key until reconnect.
    void rotate_key(const Bytes& seed);

    /// Builds, signs, validates and submits one transaction. Throws NotConnected,
    /// InlineTooLarge, InvalidSignature, DuplicateTx or PoolFull.
    TxId submit_direct(Network& net, const Address& receiver, TxPayload payload,
                       std::uint64_t gas_limit = 10'000'000);

    std::uint64_t next_nonce() const { return nonce_; }

private:
    KeyPair keys_;
    Address address_;
    std::optional<std::string> session_;
    PublicKey session_key_{};
    std::uint64_t nonce_ = 0;
};

enum class AgentBehavior { Honest, Withholding };
std::string_view to_string(AgentBehavior b);

struct UserOp {
    ContractId contract{};
    std::string method;
    std::vector<Bytes> args;
    Bytes inline_data;
};

struct OpTicket {
    Digest op_id{};
    AccountId originator{};
    std::uint64_t seq = 0;
};

/// Custodial agent that bundles registered users' operations into one
/// multicall transaction signed with its own key.
class Agent {
public:
    Agent(KeyPair keys, std::size_t batch_size = 10, std::uint64_t flush_interval = 5,
          AgentBehavior behavior = AgentBehavior::Honest);

    const Address& address() const { return address_; }
    AgentBehavior behavior() const { return behavior_; }
    std::size_t batch_size() const { return batch_size_; }
    std::size_t buffered() const { return buffer_.size(); }

    /// Accepts `user` locally. The user must also grant the agent on-chain (see enroll).
    void register_user(const Address& user);
    bool registered(const Address& user) const { return users_.contains(user.payload); }

    /// Buffers one op. Throws UnregisteredUser.
    OpTicket submit_via_agent(const Address& user, UserOp op);

    /// Emits one transaction carrying up to batch_size buffered ops. A
    /// withholding agent builds the same transaction but never submits it.
    std::optional<TxId> flush(Network& net);

    /// Flushes full batches, and a partial batch once it has waited
    /// flush_interval ticks. Returns the emitted tx ids.
    std::vector<TxId> pump(Network& net);

    std::uint64_t transactions_emitted() const { return emitted_; }

private:
    KeyPair keys_;
    Address address_;
    std::size_t batch_size_;
    std::uint64_t flush_interval_;
    AgentBehavior behavior_;
    std::set<AccountId> users_;
    std::map<AccountId, std::uint64_t> next_seq_;
    std::vector<BundledOp> buffer_;
    std::optional<std::uint64_t> nonce_;
    std::optional<std::uint64_t> waiting_since_;  // tick a partial batch was first seen
    std::uint64_t emitted_ = 0;
};

/// User submits grantAgent for `agent` and the agent registers the user.
TxId enroll(Network& net, WalletClient& user, Agent& agent);

/// Latest confirmed state relevant to (account, contract) on one node's view,
/// plus the transaction that produced it.
struct RetrievedState {
    std::map<Bytes, Bytes> view;
    Transaction tx;
    Receipt receipt;
    std::uint64_t height = 0;

    bool operator==(const RetrievedState& o) const {
        return view == o.view && tx.tx_id == o.tx.tx_id && height == o.height;
    }
};

/// Throws NoConfirmedState when no confirmed tx touched the pair on that node.
RetrievedState retrieve_state(const Network& net, std::uint32_t node, const AccountId& account,
                              const ContractId& contract);

}  // namespace w3sim
