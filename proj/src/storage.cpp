#include "w3sim/storage.hpp"

#include <algorithm>
#include <fstream>

#include "w3sim/digest.hpp"
#include "w3sim/error.hpp"

namespace w3sim {

ContentId content_id(ByteView data) {
    Hasher h;
    h.update("w3sim.cid");
    h.update(data);
    return {h.finish()};
}

void validate_plan(const StoragePlan& plan) {
    if (auto* o = std::get_if<OffChainPlan>(&plan); o && o->replicas == 0)
        throw Error(Errc::InvalidConfig, "replicas must be >= 1");
    if (auto* h = std::get_if<HybridPlan>(&plan)) {
        if (h->replicas == 0) throw Error(Errc::InvalidConfig, "replicas must be >= 1");
        if (h->inline_threshold == 0 || h->inline_threshold > kInlineCap)
            throw Error(Errc::InvalidConfig, "inline_threshold must be in [1, inline cap]");
    }
}

bool is_linked(const StorageRef& ref) { return std::holds_alternative<LinkedRef>(ref); }

void attach_hook(StorageRef& ref, const TxId& tx, std::optional<Digest> op) {
    std::visit(
        [&](auto& r) {
            r.hook_tx = tx;
            r.hook_op = op;
        },
        ref);
}

std::optional<TxId> hook_of(const StorageRef& ref) {
    return std::visit([](const auto& r) { return r.hook_tx; }, ref);
}

OffChainStore::OffChainStore(std::uint32_t n_nodes, double crash_prob, std::uint64_t seed)
    : nodes_(n_nodes), crash_prob_(crash_prob), rng_(Rng::mix(seed, 11)) {}

std::uint32_t OffChainStore::live_count() const {
    return static_cast<std::uint32_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const auto& n) { return n.up; }));
}

void OffChainStore::inject_failures() {
    for (auto& n : nodes_) n.up = !rng_.bernoulli(crash_prob_);
}

// Rendezvous hashing over live nodes: the top-r set for r is a prefix of the
// top-(r+1) set, so more replicas never lose a placement.
std::vector<std::uint32_t> OffChainStore::choose(const ContentId& cid, std::uint32_t replicas) const {
    std::vector<std::pair<Digest, std::uint32_t>> ranked;
    for (std::uint32_t i = 0; i < nodes_.size(); ++i) {
        if (!nodes_[i].up) continue;
        Hasher h;
        h.update(cid.digest);
        h.update(encode_u64(i));
        ranked.emplace_back(h.finish(), i);
    }
    if (ranked.size() < replicas)
        throw Error(Errc::InsufficientStorageNodes,
                    "need " + std::to_string(replicas) + " live nodes, have " + std::to_string(ranked.size()));
    std::sort(ranked.begin(), ranked.end());
    std::vector<std::uint32_t> out;
    for (std::uint32_t i = 0; i < replicas; ++i) out.push_back(ranked[i].second);
    return out;
}

StorageRef OffChainStore::put(ByteView data, const StoragePlan& plan) {
    validate_plan(plan);
    auto inline_ref = [&]() -> StorageRef {
        if (data.size() > kInlineCap)
            throw Error(Errc::InlineTooLarge, std::to_string(data.size()) + " bytes exceeds inline cap");
        return InlineRef{Bytes(data.begin(), data.end()), std::nullopt, std::nullopt};
    };
    std::uint32_t replicas = 0;
    if (std::holds_alternative<OnChainPlan>(plan)) return inline_ref();
    if (auto* h = std::get_if<HybridPlan>(&plan)) {
        if (data.size() <= h->inline_threshold) return inline_ref();
        replicas = h->replicas;
    } else {
        replicas = std::get<OffChainPlan>(plan).replicas;
    }
    if (data.empty()) throw Error(Errc::Malformed, "off-chain data must be non-empty");

    auto cid = content_id(data);
    if (!placement_.contains(cid)) {
        auto where = choose(cid, replicas);
        for (auto i : where) nodes_[i].blobs[cid] = Bytes(data.begin(), data.end());
        bytes_written_ += static_cast<std::uint64_t>(data.size()) * where.size();
        placement_[cid] = std::move(where);
    }
    return LinkedRef{cid, std::nullopt, std::nullopt};
}

Bytes OffChainStore::get(const StorageRef& ref) const {
    if (auto* in = std::get_if<InlineRef>(&ref)) return in->data;
    const auto& cid = std::get<LinkedRef>(ref).cid;
    auto it = placement_.find(cid);
    if (it == placement_.end()) throw Error(Errc::NotFound, "unknown cid");
    for (auto i : it->second)
        if (nodes_[i].up) return nodes_[i].blobs.at(cid);
    throw Error(Errc::AllReplicasDown);
}

const std::vector<std::uint32_t>& OffChainStore::placement(const ContentId& cid) const {
    auto it = placement_.find(cid);
    if (it == placement_.end()) throw Error(Errc::NotFound, "unknown cid");
    return it->second;
}

void OffChainStore::mutate(std::uint32_t node, const ContentId& cid, const std::function<void(Bytes&)>& fn) {
    auto& blobs = nodes_.at(node).blobs;
    auto it = blobs.find(cid);
    if (it == blobs.end()) throw Error(Errc::NotFound, "cid not stored on node");
    fn(it->second);
}

void OffChainStore::export_to(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    for (const auto& [cid, where] : placement_) {
        auto live = std::find_if(where.begin(), where.end(), [&](auto i) { return nodes_[i].up; });
        const auto& blob = nodes_[live == where.end() ? where.front() : *live].blobs.at(cid);
        std::ofstream f(dir / hex(cid.digest), std::ios::binary);
        f.write(reinterpret_cast<const char*>(blob.data()), static_cast<std::streamsize>(blob.size()));
    }
}

std::string_view to_string(Integrity i) {
    switch (i) {
        case Integrity::Verified: return "Verified";
        case Integrity::Tampered: return "Tampered";
        case Integrity::Unconfirmed: return "Unconfirmed";
    }
    return "Unknown";
}

Bytes hook_pointer(const StorageRef& ref) {
    if (auto* l = std::get_if<LinkedRef>(&ref)) return to_bytes(l->cid.digest);
    return {};
}

Bytes hook_inline(const StorageRef& ref) {
    if (auto* in = std::get_if<InlineRef>(&ref)) return in->data;
    return {};
}

Integrity verify_integrity(const StorageRef& ref, ByteView data, const Network& net) {
    auto hook = hook_of(ref);
    if (!hook) return Integrity::Unconfirmed;
    auto conf = net.find_confirmed(*hook);
    if (!conf) return Integrity::Unconfirmed;
    const auto* args = &conf->tx.payload.args;
    const auto* inline_data = &conf->tx.payload.inline_data;
    std::vector<BundledOp> ops;
    if (auto op = std::visit([](const auto& r) { return r.hook_op; }, ref)) {
        // The hook is one op of an agent bundle; only a successful op counts.
        bool applied = std::any_of(conf->receipt.ops.begin(), conf->receipt.ops.end(), [&](const OpResult& o) {
            return o.op_id == *op && o.status == RevertReason::None;
        });
        if (!applied) return Integrity::Unconfirmed;
        ops = decode_bundle(*args);
        auto it = std::find_if(ops.begin(), ops.end(), [&](const BundledOp& b) {
            return op_id(conf->tx.metadata.sender.payload, b.originator, b.seq) == *op;
        });
        if (it == ops.end()) return Integrity::Unconfirmed;
        args = &it->args;
        inline_data = &it->inline_data;
    }
    if (std::holds_alternative<InlineRef>(ref))
        return std::equal(data.begin(), data.end(), inline_data->begin(), inline_data->end()) ? Integrity::Verified
                                                                                               : Integrity::Tampered;
    // The hooked cid is whichever 32-byte argument the confirmed call carried.
    const auto& cid = std::get<LinkedRef>(ref).cid;
    const auto expected = to_bytes(cid.digest);
    bool hooked = std::any_of(args->begin(), args->end(), [&](const Bytes& a) { return a == expected; });
    if (!hooked) return Integrity::Tampered;
    return content_id(data) == cid ? Integrity::Verified : Integrity::Tampered;
}

}  // namespace w3sim
