#pragma once

#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <unordered_map>
#include <vector>

#include "w3sim/contract_vm.hpp"
#include "w3sim/rng.hpp"

namespace w3sim {

enum class ConsensusRule { MajorityChain, BftQuorum };
enum class NodeBehavior { Honest, Crashed, Byzantine };
enum class ByzantineMode { Silent, Equivocate, Withhold };

std::string_view to_string(ConsensusRule r);
std::string_view to_string(NodeBehavior b);
std::string_view to_string(ByzantineMode m);

struct ConsensusConfig {
    ConsensusRule rule = ConsensusRule::BftQuorum;
    double fraction = 2.0 / 3.0;
    std::uint32_t confirm_depth = 6;  // MajorityChain only
    std::uint32_t n_nodes = 7;
    std::uint64_t block_interval = 10;
    std::uint64_t min_delay = 1;
    std::uint64_t max_delay = 4;
    std::uint64_t block_gas_limit = 3'000'000;  // room for several full agent bundles
    std::uint32_t max_block_txs = 200;
    std::size_t pool_capacity = 100'000;
    double crash_prob = 0.0;          // per node per tick, transient
    std::uint64_t crash_duration = 20;
    std::uint64_t fork_height = 0;    // MajorityChain coalition diverges above this height
    GasSchedule gas;
    std::uint64_t seed = 42;

    static ConsensusConfig bft(std::uint32_t n);
    static ConsensusConfig majority(std::uint32_t n, std::uint32_t k);

    /// Votes needed under BftQuorum: ceil(fraction * n).
    std::uint32_t quorum() const;
    /// Holders needed under MajorityChain: smallest count strictly above fraction * n.
    std::uint32_t majority_holders() const;
    /// Throws InvalidConfig unless 0 < fraction <= 1 and n_nodes >= 1.
    void validate() const;
};

struct Block {
    std::uint64_t height = 0;
    Digest parent_hash{};
    std::vector<Transaction> txs;
    Digest state_root{};
    std::uint32_t proposer = 0;
    std::uint64_t tick = 0;
    std::uint64_t salt = 0;  // distinguishes equivocated siblings

    Digest hash() const;
};

/// A confirmed (s', Tx') pair: the transaction, its receipt and the confirmed
/// state root after it.
struct Confirmation {
    std::uint64_t height = 0;
    std::uint64_t tick = 0;
    Transaction tx;
    Receipt receipt;
};

enum class SubmitStatus { Accepted, DuplicateTx, PoolFull };
std::string_view to_string(SubmitStatus s);

/// Executes one transaction against a pre-state without applying it.
using Executor = std::function<ExecutionResult(const ContractState&, const Transaction&, const ExecEnv&)>;

struct DigestHash {
    std::size_t operator()(const Digest& d) const noexcept {
        std::size_t h = 0;
        for (int i = 0; i < 8; ++i) h = h << 8 | d[static_cast<std::size_t>(i)];
        return h;
    }
};

struct MaintainerNode {
    std::uint32_t id = 0;
    KeyPair keys;
    AccountId account{};
    NodeBehavior behavior = NodeBehavior::Honest;
    ByzantineMode mode = ByzantineMode::Silent;
    std::uint64_t down_until = 0;

    // Locally final chain and the state it produced.
    std::vector<Block> chain;
    ContractState state;
    std::map<std::pair<AccountId, ContractId>, TxId> last_touch;
    std::unordered_map<TxId, std::uint64_t, DigestHash> tx_height;

    // MajorityChain view: hashes from genesis to the node's chosen tip.
    std::vector<Digest> tip_path;

    bool honest() const { return behavior == NodeBehavior::Honest; }
    bool up(std::uint64_t tick) const { return behavior != NodeBehavior::Crashed && tick >= down_until; }
};

class Network {
public:
    Network(ConsensusConfig config, const ContractState& genesis);

    const ConsensusConfig& config() const { return config_; }
    std::uint64_t now() const { return now_; }

    void set_behavior(std::uint32_t node, NodeBehavior b, ByzantineMode mode = ByzantineMode::Silent);
    void set_executor(Executor ex) { executor_ = std::move(ex); }

    SubmitStatus submit(const Transaction& tx);
    std::size_t pending() const { return pool_.size(); }
    /// A transaction still waiting in the pool, or null.
    const Transaction* pooled(const TxId& id) const;

    /// Advances one round (one BFT height attempt or one mining interval) and
    /// returns the transactions that became network-confirmed in it.
    std::vector<Confirmation> run_round();

    /// All honest nodes that are up agree on every block at height <= tip - depth.
    bool check_persistence() const;

    /// tx_id or bundled op id confirmed network-wide at or before tick `deadline`.
    bool check_liveness(const Digest& id, std::uint64_t deadline) const;

    std::optional<Confirmation> find_confirmed(const TxId& id) const;
    const std::vector<Confirmation>& confirmations() const { return confirmed_; }
    std::uint64_t confirmed_height() const { return confirmed_blocks_.empty() ? 0 : confirmed_blocks_.rbegin()->first; }
    /// Confirmed block hash per height at network level.
    const std::map<std::uint64_t, Digest>& confirmed_blocks() const { return confirmed_blocks_; }
    std::uint64_t safety_violations() const { return safety_violations_; }

    const MaintainerNode& node(std::uint32_t i) const { return nodes_.at(i); }
    std::uint32_t size() const { return static_cast<std::uint32_t>(nodes_.size()); }
    /// First honest node that is up at the current tick.
    std::optional<std::uint32_t> observer() const;
    const Block* block(const Digest& h) const;

    /// Newline-delimited JSON of a node's locally final chain.
    std::string dump_chain(std::uint32_t node) const;

private:
    void draw_crashes(std::uint64_t from, std::uint64_t to);
    std::uint64_t delay();
    Block build_block(const MaintainerNode& proposer, const Block& parent_or_genesis, bool include_txs,
                      std::uint64_t salt, const ContractState& base);
    const std::vector<Receipt>& commit(MaintainerNode& node, const Block& block);
    void sync_from_peer(MaintainerNode& node);
    std::vector<Confirmation> note_network_commit(const Block& block);
    void prune_pool(const ContractState& reference);
    std::vector<Confirmation> bft_round();
    std::vector<Confirmation> majority_round();
    void majority_receive(MaintainerNode& node, const Block& block);
    void majority_finalize(MaintainerNode& node);
    std::vector<Confirmation> majority_confirm();
    std::vector<Digest> path_to(const Digest& tip) const;
    ContractState state_at_tip(const MaintainerNode& node);
    bool in_coalition(const MaintainerNode& node) const {
        return node.behavior == NodeBehavior::Byzantine && node.mode == ByzantineMode::Equivocate;
    }

    ConsensusConfig config_;
    std::vector<MaintainerNode> nodes_;
    Executor executor_;
    Rng delay_rng_;
    Rng fault_rng_;
    Rng mine_rng_;
    std::uint64_t now_ = 0;
    std::uint64_t round_ = 0;
    std::uint64_t crash_drawn_until_ = 0;

    std::deque<Transaction> pool_;
    std::set<TxId> seen_;

    Digest genesis_hash_{};
    std::unordered_map<Digest, Block, DigestHash> blocks_;
    std::unordered_map<Digest, std::vector<Receipt>, DigestHash> block_receipts_;
    std::map<std::uint64_t, Digest> confirmed_blocks_;
    std::vector<Confirmation> confirmed_;
    std::unordered_map<Digest, std::size_t, DigestHash> confirmed_index_;
    std::unordered_map<Digest, std::uint64_t, DigestHash> op_confirm_tick_;
    std::uint64_t safety_violations_ = 0;
};

}  // namespace w3sim
