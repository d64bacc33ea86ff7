#pragma once

#include <bitset>
#include <map>
#include <set>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "w3sim/txcraft.hpp"

namespace w3sim {

enum class ContractKind : std::uint8_t { FungibleToken, NonFungibleToken, NftMarket, HybridVerifier };

std::string_view to_string(ContractKind k);

struct ContractDef {
    ContractId contract_id{};
    ContractKind kind = ContractKind::FungibleToken;
    AccountId deployer{};
    Amount supply = 0;            // FungibleToken
    ContractId nft_contract{};    // NftMarket
    ContractId payment_token{};   // NftMarket
};

ContractId make_contract_id(const AccountId& deployer, std::string_view salt);

struct GasSchedule {
    std::uint64_t base_tx = 21000;
    std::uint64_t per_storage_write = 5000;
    std::uint64_t per_storage_read = 200;
    std::uint64_t per_event = 375;
    std::uint64_t per_inline_byte = 16;

    static GasSchedule zero() { return {0, 0, 0, 0, 0}; }
};

/// Metered work performed by one transaction.
struct GasCounters {
    std::uint64_t reads = 0;
    std::uint64_t writes = 0;
    std::uint64_t events = 0;
    std::uint64_t inline_bytes = 0;

    std::uint64_t cost(const GasSchedule& g) const {
        return g.base_tx + reads * g.per_storage_read + writes * g.per_storage_write +
               events * g.per_event + inline_bytes * g.per_inline_byte;
    }
};

enum class RevertReason : std::uint8_t {
    None,
    UnknownMethod,
    UnknownContract,
    OutOfGas,
    BadArguments,
    InsufficientBalance,
    InsufficientAllowance,
    NotOwner,
    NotMinted,
    DuplicateTokenId,
    NotListed,
    PriceMismatch,
    UnregisteredUser,
    BadSequence,
    CommitmentMismatch,
};

std::string_view to_string(RevertReason r);

struct Event {
    TxId tx_id{};
    ContractId contract{};
    std::string name;
    std::vector<std::pair<std::string, std::string>> fields;
};

/// Outcome of one user operation inside an agent bundle.
struct OpResult {
    Digest op_id{};
    AccountId originator{};
    ContractId contract{};
    std::string method;
    RevertReason status = RevertReason::None;
};

struct Receipt {
    TxId tx_id{};
    RevertReason status = RevertReason::None;
    std::uint64_t gas_used = 0;
    GasCounters counters;
    std::vector<Event> events;
    Bytes return_data;
    Digest new_state_root{};
    std::vector<OpResult> ops;
    /// (account, contract) pairs whose view this tx may have changed; the
    /// zero contract id stands for native balances.
    std::vector<std::pair<AccountId, ContractId>> touched;

    bool success() const { return status == RevertReason::None; }
};

/// Full state of one chain replica. Entries live in one ordered map keyed by
/// domain byte || contract-or-zero || key; state_root digests them in order.
/// Nonces and fee credits are bookkeeping kept outside the root.
class ContractState {
public:
    enum Domain : std::uint8_t { Registry = 0, Storage = 1, Native = 2, Agents = 3 };

    static Bytes full_key(Domain d, const ContractId& c, ByteView key);

    std::optional<Bytes> get(const Bytes& full) const;
    void put(const Bytes& full, std::optional<Bytes> value);
    const std::map<Bytes, Bytes>& entries() const { return entries_; }

    std::optional<ContractDef> contract(const ContractId& id) const;
    Amount native_balance(const AccountId& a) const;
    void set_native_balance(const AccountId& a, Amount v);

    std::uint64_t nonce(const AccountId& a) const;
    void bump_nonce(const AccountId& a) { ++nonces_[a]; }
    Amount fee_credit(const AccountId& a) const;
    void credit_fee(const AccountId& a, Amount v) { fee_credits_[a] += v; }

    const std::vector<Event>& event_log() const { return event_log_; }
    void append_events(const std::vector<Event>& ev) {
        event_log_.insert(event_log_.end(), ev.begin(), ev.end());
    }

    /// Two-level digest: entries are grouped into fixed buckets by key hash,
    /// each bucket digests its entries in key order, and the root digests the
    /// bucket digests in bucket order. Cached per bucket; see refresh_root().
    Digest state_root() const;

    /// Recomputes dirty buckets so later state_root() calls are O(buckets).
    void refresh_root();

    /// Entries of `contract` (or native balance when contract is zero) that
    /// belong to `account`: balances, allowances it granted, holdings, listings.
    std::map<Bytes, Bytes> account_view(const AccountId& account, const ContractId& contract) const;

private:
    static constexpr std::size_t kBuckets = 256;
    static std::size_t bucket_of(const Bytes& key);
    Digest bucket_digest(std::size_t b) const;

    std::map<Bytes, Bytes> entries_;
    std::array<std::set<Bytes>, kBuckets> bucket_keys_;
    std::array<Digest, kBuckets> bucket_digests_{};
    std::bitset<kBuckets> dirty_ = std::bitset<kBuckets>().set();
    std::map<AccountId, std::uint64_t> nonces_;
    std::map<AccountId, Amount> fee_credits_;
    std::vector<Event> event_log_;
};

using WriteSet = std::vector<std::pair<Bytes, std::optional<Bytes>>>;

struct ExecEnv {
    GasSchedule gas;
    AccountId proposer{};
};

struct ExecutionResult {
    Receipt receipt;
    WriteSet writes;  // empty when reverted
};

/// Registers a contract and runs its constructor. Throws DuplicateContract.
ContractId deploy_contract(ContractState& state, const ContractDef& def);

/// Pure execution against `pre`: computes receipt and write set, applies nothing.
ExecutionResult dry_run(const ContractState& pre, const Transaction& tx, const ExecEnv& env);

/// Applies a dry-run result: writes, sender nonce, events, fee credit, and
/// fills receipt.new_state_root.
Receipt apply(ContractState& state, const Transaction& tx, ExecutionResult result, const ExecEnv& env);

/// dry_run + apply.
Receipt execute(ContractState& state, const Transaction& tx, const ExecEnv& env = {});

/// Read-only call. Throws UnknownMethod, NotMinted, NotFound.
Bytes query_state(const ContractState& state, const ContractId& contract, std::string_view method,
                  const std::vector<Bytes>& args);

// Typed query helpers.
Amount balance_of(const ContractState& s, const ContractId& token, const AccountId& a);
Amount total_supply(const ContractState& s, const ContractId& token);
Amount allowance(const ContractState& s, const ContractId& token, const AccountId& owner,
                 const AccountId& spender);
std::optional<AccountId> owner_of(const ContractState& s, const ContractId& nft, std::uint64_t token_id);

// Agent bundles.
struct BundledOp {
    AccountId originator{};
    std::uint64_t seq = 0;
    ContractId contract{};
    std::string method;
    std::vector<Bytes> args;
    Bytes inline_data;
};

Digest op_id(const AccountId& agent, const AccountId& originator, std::uint64_t seq);
std::vector<Bytes> encode_bundle(const std::vector<BundledOp>& ops);
std::vector<BundledOp> decode_bundle(const std::vector<Bytes>& args);

/// Storage-key tags with the owning account right after the tag byte.
namespace keys {
inline constexpr std::uint8_t kBalance = 'B';
inline constexpr std::uint8_t kAllowance = 'A';
inline constexpr std::uint8_t kHolding = 'H';
inline constexpr std::uint8_t kSellerListing = 'M';
inline constexpr std::uint8_t kSupply = 'S';
inline constexpr std::uint8_t kOwner = 'O';
inline constexpr std::uint8_t kPointer = 'P';
inline constexpr std::uint8_t kListing = 'L';
inline constexpr std::uint8_t kCommitment = 'C';
}  // namespace keys

/// Exports the event log as newline-delimited JSON {tx_id, event_name, fields}.
std::string events_to_ndjson(const std::vector<Event>& events);

}  // namespace w3sim
