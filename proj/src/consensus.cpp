#include "w3sim/consensus.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "json.hpp"
#include "w3sim/digest.hpp"
#include "w3sim/error.hpp"

namespace w3sim {

std::string_view to_string(ConsensusRule r) {
    return r == ConsensusRule::BftQuorum ? "BftQuorum" : "MajorityChain";
}

std::string_view to_string(NodeBehavior b) {
    switch (b) {
        case NodeBehavior::Honest: return "Honest";
        case NodeBehavior::Crashed: return "Crashed";
        case NodeBehavior::Byzantine: return "Byzantine";
    }
    return "Unknown";
}

std::string_view to_string(ByzantineMode m) {
    switch (m) {
        case ByzantineMode::Silent: return "Silent";
        case ByzantineMode::Equivocate: return "Equivocate";
        case ByzantineMode::Withhold: return "Withhold";
    }
    return "Unknown";
}

std::string_view to_string(SubmitStatus s) {
    switch (s) {
        case SubmitStatus::Accepted: return "Accepted";
        case SubmitStatus::DuplicateTx: return "DuplicateTx";
        case SubmitStatus::PoolFull: return "PoolFull";
    }
    return "Unknown";
}

ConsensusConfig ConsensusConfig::bft(std::uint32_t n) {
    ConsensusConfig c;
    c.rule = ConsensusRule::BftQuorum;
    c.fraction = 2.0 / 3.0;
    c.n_nodes = n;
    return c;
}

ConsensusConfig ConsensusConfig::majority(std::uint32_t n, std::uint32_t k) {
    ConsensusConfig c;
    c.rule = ConsensusRule::MajorityChain;
    c.fraction = 0.51;
    c.confirm_depth = k;
    c.n_nodes = n;
    return c;
}

std::uint32_t ConsensusConfig::quorum() const {
    // Guard against 2/3 * 9 landing a hair above 6.
    return static_cast<std::uint32_t>(std::ceil(fraction * n_nodes - 1e-9));
}

std::uint32_t ConsensusConfig::majority_holders() const {
    return static_cast<std::uint32_t>(std::floor(fraction * n_nodes + 1e-9)) + 1;
}

void ConsensusConfig::validate() const {
    if (!(fraction > 0.0 && fraction <= 1.0)) throw Error(Errc::InvalidConfig, "fraction must be in (0, 1]");
    if (n_nodes < 1) throw Error(Errc::InvalidConfig, "n_nodes must be >= 1");
    if (min_delay > max_delay) throw Error(Errc::InvalidConfig, "min_delay > max_delay");
    if (2 * max_delay >= block_interval)
        throw Error(Errc::InvalidConfig, "block_interval must exceed two message delays");
}

Digest Block::hash() const {
    Hasher h;
    h.update("w3sim.block");
    ByteWriter w;
    w.u64(height).field(parent_hash).field(state_root).u32(proposer).u64(tick).u64(salt);
    w.u32(static_cast<std::uint32_t>(txs.size()));
    for (const auto& tx : txs) w.field(tx.tx_id);
    h.update(w.bytes());
    return h.finish();
}

Network::Network(ConsensusConfig config, const ContractState& genesis)
    : config_(std::move(config)),
      executor_(dry_run),
      delay_rng_(Rng::mix(config_.seed, 1)),
      fault_rng_(Rng::mix(config_.seed, 2)),
      mine_rng_(Rng::mix(config_.seed, 3)) {
    config_.validate();
    Block g;
    g.state_root = genesis.state_root();
    genesis_hash_ = g.hash();
    blocks_.emplace(genesis_hash_, g);
    nodes_.resize(config_.n_nodes);
    for (std::uint32_t i = 0; i < config_.n_nodes; ++i) {
        auto& n = nodes_[i];
        n.id = i;
        n.keys = generate_keypair(to_bytes("w3sim.maintainer." + std::to_string(i)));
        n.account = derive_address(n.keys.public_key, AddressScheme::Base16Eth).payload;
        n.chain.push_back(g);
        n.state = genesis;
        n.state.refresh_root();
        n.tip_path = {genesis_hash_};
    }
}

void Network::set_behavior(std::uint32_t node, NodeBehavior b, ByzantineMode mode) {
    auto& n = nodes_.at(node);
    n.behavior = b;
    n.mode = mode;
}

SubmitStatus Network::submit(const Transaction& tx) {
    if (seen_.contains(tx.tx_id)) return SubmitStatus::DuplicateTx;
    if (pool_.size() >= config_.pool_capacity) return SubmitStatus::PoolFull;
    seen_.insert(tx.tx_id);
    pool_.push_back(tx);
    return SubmitStatus::Accepted;
}

std::uint64_t Network::delay() { return delay_rng_.range(config_.min_delay, config_.max_delay); }

void Network::draw_crashes(std::uint64_t from, std::uint64_t to) {
    if (config_.crash_prob <= 0.0) return;
    for (std::uint64_t t = std::max(from, crash_drawn_until_); t < to; ++t) {
        for (auto& n : nodes_) {
            bool fire = fault_rng_.bernoulli(config_.crash_prob);
            if (fire && n.up(t)) n.down_until = t + config_.crash_duration;
        }
    }
    crash_drawn_until_ = std::max(crash_drawn_until_, to);
}

std::optional<std::uint32_t> Network::observer() const {
    for (const auto& n : nodes_)
        if (n.honest() && n.up(now_)) return n.id;
    return std::nullopt;
}

const Block* Network::block(const Digest& h) const {
    auto it = blocks_.find(h);
    return it == blocks_.end() ? nullptr : &it->second;
}

Block Network::build_block(const MaintainerNode& proposer, const Block& parent, bool include_txs, std::uint64_t salt,
                           const ContractState& base) {
    Block b;
    b.height = parent.height + 1;
    b.parent_hash = parent.hash();
    b.proposer = proposer.id;
    b.tick = now_;
    b.salt = salt;
    if (!include_txs) {
        b.state_root = base.state_root();
        return b;
    }
    ContractState work = base;
    ExecEnv env{config_.gas, proposer.account};
    std::uint64_t used = 0;
    for (const auto& tx : pool_) {
        if (b.txs.size() >= config_.max_block_txs) break;
        if (validate_transaction(tx, work.nonce(tx.metadata.sender.payload)) != TxCheck::Ok) continue;
        auto res = executor_(work, tx, env);
        if (used + res.receipt.gas_used > config_.block_gas_limit) break;
        used += res.receipt.gas_used;
        apply(work, tx, std::move(res), env);
        b.txs.push_back(tx);
    }
    b.state_root = work.state_root();
    return b;
}

const std::vector<Receipt>& Network::commit(MaintainerNode& node, const Block& block) {
    ExecEnv env{config_.gas, nodes_[block.proposer].account};
    std::vector<Receipt> receipts;
    receipts.reserve(block.txs.size());
    for (const auto& tx : block.txs) {
        auto rc = apply(node.state, tx, executor_(node.state, tx, env), env);
        for (const auto& key : rc.touched) node.last_touch[key] = tx.tx_id;
        node.tx_height[tx.tx_id] = block.height;
        receipts.push_back(std::move(rc));
    }
    node.chain.push_back(block);
    auto [it, fresh] = block_receipts_.try_emplace(block.hash(), std::move(receipts));
    return it->second;
}

void Network::prune_pool(const ContractState& reference) {
    std::deque<Transaction> keep;
    for (auto& tx : pool_) {
        if (confirmed_index_.contains(tx.tx_id)) continue;
        auto check = validate_transaction(tx, reference.nonce(tx.metadata.sender.payload));
        if (check == TxCheck::InvalidSignature || check == TxCheck::StaleNonce) continue;
        keep.push_back(std::move(tx));
    }
    pool_ = std::move(keep);
}

std::vector<Confirmation> Network::note_network_commit(const Block& block) {
    std::vector<Confirmation> out;
    auto h = block.hash();
    auto it = confirmed_blocks_.find(block.height);
    if (it != confirmed_blocks_.end()) {
        if (it->second != h) ++safety_violations_;
        return out;
    }
    confirmed_blocks_[block.height] = h;
    const auto& receipts = block_receipts_.at(h);
    for (std::size_t i = 0; i < block.txs.size(); ++i) {
        Confirmation c{block.height, now_, block.txs[i], receipts[i]};
        confirmed_index_[c.tx.tx_id] = confirmed_.size();
        for (const auto& op : c.receipt.ops) op_confirm_tick_.try_emplace(op.op_id, now_);
        out.push_back(c);
        confirmed_.push_back(std::move(c));
    }
    return out;
}

void Network::sync_from_peer(MaintainerNode& node) {
    const MaintainerNode* best = nullptr;
    for (const auto& p : nodes_) {
        if (&p == &node || !p.honest() || !p.up(now_)) continue;
        if (!best || p.chain.size() > best->chain.size()) best = &p;
    }
    if (!best || best->chain.size() <= node.chain.size()) return;
    // Only extend along the shared prefix.
    if (best->chain[node.chain.size() - 1].hash() != node.chain.back().hash()) return;
    for (std::size_t h = node.chain.size(); h < best->chain.size(); ++h) commit(node, best->chain[h]);
    if (config_.rule == ConsensusRule::MajorityChain && best->tip_path.size() > node.tip_path.size())
        node.tip_path = best->tip_path;
}

std::vector<Confirmation> Network::run_round() {
    auto out = config_.rule == ConsensusRule::BftQuorum ? bft_round() : majority_round();
    if (!out.empty())
        if (auto obs = observer()) prune_pool(nodes_[*obs].state);
    return out;
}

// ---- BFT quorum ----

std::vector<Confirmation> Network::bft_round() {
    const std::uint64_t t0 = now_;
    const std::uint64_t end = t0 + config_.block_interval;
    draw_crashes(t0, end);
    for (auto& n : nodes_)
        if (n.honest() && n.up(t0)) sync_from_peer(n);

    std::vector<Confirmation> out;
    const auto proposer_id = static_cast<std::uint32_t>(round_++ % nodes_.size());
    auto& proposer = nodes_[proposer_id];

    std::vector<Block> proposals;
    if (proposer.up(t0)) {
        const Block& parent = proposer.chain.back();
        if (proposer.honest()) {
            proposals.push_back(build_block(proposer, parent, true, 0, proposer.state));
        } else if (proposer.mode == ByzantineMode::Withhold) {
            proposals.push_back(build_block(proposer, parent, false, 0, proposer.state));
        } else if (proposer.mode == ByzantineMode::Equivocate) {
            proposals.push_back(build_block(proposer, parent, true, 0, proposer.state));
            proposals.push_back(build_block(proposer, parent, false, 1, proposer.state));
        }
    }
    for (const auto& b : proposals) blocks_.try_emplace(b.hash(), b);

    struct Msg {
        std::uint64_t tick;
        std::uint64_t seq;
        std::uint32_t to;
        std::uint32_t from;
        std::size_t proposal;
        bool vote;
        bool operator>(const Msg& o) const { return std::tie(tick, seq) > std::tie(o.tick, o.seq); }
    };
    std::priority_queue<Msg, std::vector<Msg>, std::greater<>> q;
    std::uint64_t seq = 0;
    for (std::uint32_t i = 0; i < nodes_.size(); ++i) {
        if (proposals.empty()) break;
        std::size_t which = proposals.size() == 2 ? (i % 2) : 0;
        if (i == proposer_id) which = 0;
        q.push({t0 + (i == proposer_id ? 0 : delay()), seq++, i, proposer_id, which, false});
    }

    const std::uint32_t quorum = config_.quorum();
    std::vector<std::vector<std::set<std::uint32_t>>> votes(nodes_.size(),
                                                            std::vector<std::set<std::uint32_t>>(proposals.size()));
    std::vector<std::vector<bool>> has(nodes_.size(), std::vector<bool>(proposals.size(), false));
    std::vector<bool> voted(nodes_.size(), false);
    std::vector<bool> committed(nodes_.size(), false);

    auto broadcast_vote = [&](std::uint32_t voter, std::size_t which, std::uint64_t tick) {
        for (std::uint32_t j = 0; j < nodes_.size(); ++j)
            q.push({tick + (j == voter ? 0 : delay()), seq++, j, voter, which, true});
    };
    auto try_commit = [&](std::uint32_t j, std::size_t which) {
        auto& n = nodes_[j];
        if (committed[j] || !has[j][which] || votes[j][which].size() < quorum) return;
        const Block& b = proposals[which];
        if (b.height != n.chain.back().height + 1 || b.parent_hash != n.chain.back().hash()) return;
        committed[j] = true;
        commit(n, b);
        if (n.honest()) {
            auto c = note_network_commit(b);
            out.insert(out.end(), c.begin(), c.end());
        }
    };

    while (!q.empty() && q.top().tick < end) {
        Msg m = q.top();
        q.pop();
        auto& n = nodes_[m.to];
        if (!n.up(m.tick)) continue;
        now_ = m.tick;
        if (!m.vote) {
            has[m.to][m.proposal] = true;
            const Block& b = proposals[m.proposal];
            bool extends = b.height == n.chain.back().height + 1 && b.parent_hash == n.chain.back().hash();
            if (n.honest() || n.mode == ByzantineMode::Withhold) {
                if (!voted[m.to] && extends) {
                    voted[m.to] = true;
                    broadcast_vote(m.to, m.proposal, m.tick);
                }
            } else if (n.mode == ByzantineMode::Equivocate) {
                broadcast_vote(m.to, m.proposal, m.tick);
                // Byzantine nodes also learn every sibling so they can vote for all of them.
                for (std::size_t k = 0; k < proposals.size(); ++k)
                    if (k != m.proposal && !has[m.to][k]) {
                        has[m.to][k] = true;
                        broadcast_vote(m.to, k, m.tick);
                    }
            }
            try_commit(m.to, m.proposal);
        } else {
            votes[m.to][m.proposal].insert(m.from);
            try_commit(m.to, m.proposal);
        }
    }
    now_ = end;
    return out;
}

// ---- majority chain ----

std::vector<Digest> Network::path_to(const Digest& tip) const {
    std::vector<Digest> path;
    Digest cur = tip;
    while (true) {
        path.push_back(cur);
        const Block& b = blocks_.at(cur);
        if (b.height == 0) break;
        cur = b.parent_hash;
    }
    std::reverse(path.begin(), path.end());
    return path;
}

ContractState Network::state_at_tip(const MaintainerNode& node) {
    ContractState s = node.state;
    for (std::size_t h = node.chain.size(); h < node.tip_path.size(); ++h) {
        const Block& b = blocks_.at(node.tip_path[h]);
        ExecEnv env{config_.gas, nodes_[b.proposer].account};
        for (const auto& tx : b.txs) apply(s, tx, executor_(s, tx, env), env);
    }
    return s;
}

void Network::majority_receive(MaintainerNode& node, const Block& block) {
    bool coalition_block = in_coalition(nodes_[block.proposer]) && block.height > config_.fork_height;
    if (in_coalition(node)) {
        // The coalition ignores honest blocks above the fork point.
        if (!coalition_block && block.height > config_.fork_height) return;
    }
    if (block.height + 1 <= node.tip_path.size()) return;  // longest chain only; ties keep current
    auto path = path_to(block.hash());
    // Finality lock: never reorganize below the locally final chain.
    const auto final_h = node.chain.size() - 1;
    if (path.size() <= final_h || path[final_h] != node.chain.back().hash()) return;
    node.tip_path = std::move(path);
}

void Network::majority_finalize(MaintainerNode& node) {
    const std::uint64_t k = config_.confirm_depth;
    while (node.chain.size() + k < node.tip_path.size()) commit(node, blocks_.at(node.tip_path[node.chain.size()]));
}

std::vector<Confirmation> Network::majority_confirm() {
    std::vector<Confirmation> out;
    const std::uint64_t k = config_.confirm_depth;
    const std::uint32_t needed = config_.majority_holders();
    for (std::uint64_t h = confirmed_height() + 1;; ++h) {
        std::map<Digest, std::uint32_t> holders;
        for (const auto& n : nodes_) {
            if (n.tip_path.size() <= h + k) continue;
            ++holders[n.tip_path[h]];
        }
        bool any = false;
        for (const auto& [hash, count] : holders) {
            if (count < needed) continue;
            any = true;
            auto c = note_network_commit(blocks_.at(hash));
            out.insert(out.end(), c.begin(), c.end());
        }
        if (!any) break;
    }
    return out;
}

std::vector<Confirmation> Network::majority_round() {
    const std::uint64_t t0 = now_;
    const std::uint64_t end = t0 + config_.block_interval;
    draw_crashes(t0, end);
    for (auto& n : nodes_)
        if (n.honest() && n.up(t0)) sync_from_peer(n);

    auto& miner = nodes_[mine_rng_.below(nodes_.size())];
    std::optional<Block> mined;
    if (miner.up(t0) && !(miner.behavior == NodeBehavior::Byzantine && miner.mode == ByzantineMode::Silent)) {
        bool with_txs = miner.honest() || miner.mode != ByzantineMode::Withhold;
        const Block& parent = blocks_.at(miner.tip_path.back());
        mined = build_block(miner, parent, with_txs, 0, state_at_tip(miner));
        blocks_.try_emplace(mined->hash(), *mined);
    }
    if (mined) {
        struct Delivery {
            std::uint64_t tick;
            std::uint32_t to;
        };
        std::vector<Delivery> deliveries;
        for (std::uint32_t i = 0; i < nodes_.size(); ++i)
            deliveries.push_back({t0 + (i == miner.id ? 0 : delay()), i});
        std::stable_sort(deliveries.begin(), deliveries.end(),
                         [](const Delivery& a, const Delivery& b) { return a.tick < b.tick; });
        for (const auto& d : deliveries) {
            auto& n = nodes_[d.to];
            if (!n.up(d.tick)) continue;
            // Coalition blocks above the fork point stay inside the coalition.
            if (in_coalition(miner) && mined->height > config_.fork_height && !in_coalition(n)) continue;
            now_ = d.tick;
            majority_receive(n, *mined);
        }
    }
    now_ = end;
    for (auto& n : nodes_) majority_finalize(n);
    return majority_confirm();
}

// ---- probes ----

bool Network::check_persistence() const {
    std::vector<const MaintainerNode*> honest;
    for (const auto& n : nodes_)
        if (n.honest() && n.up(now_)) honest.push_back(&n);
    if (honest.size() < 2) return true;
    std::size_t common = SIZE_MAX;
    for (auto* n : honest) common = std::min(common, n->chain.size());
    for (std::size_t h = 0; h < common; ++h) {
        auto ref = honest[0]->chain[h].hash();
        for (auto* n : honest)
            if (n->chain[h].hash() != ref) return false;
    }
    return true;
}

bool Network::check_liveness(const Digest& id, std::uint64_t deadline) const {
    if (auto it = confirmed_index_.find(id); it != confirmed_index_.end())
        return confirmed_[it->second].tick <= deadline;
    if (auto it = op_confirm_tick_.find(id); it != op_confirm_tick_.end()) return it->second <= deadline;
    return false;
}

const Transaction* Network::pooled(const TxId& id) const {
    for (const auto& tx : pool_)
        if (tx.tx_id == id) return &tx;
    return nullptr;
}

std::optional<Confirmation> Network::find_confirmed(const TxId& id) const {
    auto it = confirmed_index_.find(id);
    if (it == confirmed_index_.end()) return std::nullopt;
    return confirmed_[it->second];
}

std::string Network::dump_chain(std::uint32_t node) const {
    std::string out;
    for (const auto& b : nodes_.at(node).chain) {
        nlohmann::ordered_json j;
        j["height"] = b.height;
        j["hash"] = hex(b.hash());
        j["parent_hash"] = hex(b.parent_hash);
        j["proposer"] = b.proposer;
        j["tick"] = b.tick;
        j["state_root"] = hex(b.state_root);
        auto txs = nlohmann::ordered_json::array();
        for (const auto& tx : b.txs) txs.push_back(hex(tx.tx_id));
        j["txs"] = std::move(txs);
        out += j.dump();
        out += '\n';
    }
    return out;
}

}  // namespace w3sim
