#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <variant>
#include <vector>

#include "w3sim/consensus.hpp"
#include "w3sim/rng.hpp"

namespace w3sim {

/// Largest payload a single transaction may embed.
inline constexpr std::size_t kInlineCap = 1024;

struct ContentId {
    Digest digest{};
    bool operator==(const ContentId&) const = default;
    auto operator<=>(const ContentId&) const = default;
};

ContentId content_id(ByteView data);

struct OnChainPlan {};
struct OffChainPlan {
    std::uint32_t replicas = 3;
};
struct HybridPlan {
    std::size_t inline_threshold = 256;
    std::uint32_t replicas = 3;
};
using StoragePlan = std::variant<OnChainPlan, OffChainPlan, HybridPlan>;

/// Throws InvalidConfig on replicas == 0, threshold == 0 or threshold > cap.
void validate_plan(const StoragePlan& plan);

struct InlineRef {
    Bytes data;
    std::optional<TxId> hook_tx;
    std::optional<Digest> hook_op;  // set when the hook rides inside an agent bundle
};
struct LinkedRef {
    ContentId cid;
    std::optional<TxId> hook_tx;
    std::optional<Digest> hook_op;
};
using StorageRef = std::variant<InlineRef, LinkedRef>;

bool is_linked(const StorageRef& ref);
/// Records the transaction (and bundled op, if any) that carries the ref on-chain.
void attach_hook(StorageRef& ref, const TxId& tx, std::optional<Digest> op = std::nullopt);
std::optional<TxId> hook_of(const StorageRef& ref);

/// Simulated storage nodes with per-node availability and content-addressed placement.
class OffChainStore {
public:
    explicit OffChainStore(std::uint32_t n_nodes = 5, double crash_prob = 0.0, std::uint64_t seed = 42);

    /// OnChain yields Inline (InlineTooLarge above the cap). OffChain writes to
    /// `replicas` distinct live nodes (InsufficientStorageNodes). Hybrid inlines
    /// data up to the threshold and links the rest.
    StorageRef put(ByteView data, const StoragePlan& plan);

    /// Inline returns the payload. Linked reads the first live replica
    /// (AllReplicasDown, or NotFound for an unknown cid).
    Bytes get(const StorageRef& ref) const;

    std::uint32_t size() const { return static_cast<std::uint32_t>(nodes_.size()); }
    bool up(std::uint32_t node) const { return nodes_.at(node).up; }
    void set_up(std::uint32_t node, bool up) { nodes_.at(node).up = up; }
    std::uint32_t live_count() const;
    /// Redraws every node's availability with the configured crash probability.
    void inject_failures();

    const std::vector<std::uint32_t>& placement(const ContentId& cid) const;
    /// Direct access to a stored replica for fault injection.
    void mutate(std::uint32_t node, const ContentId& cid, const std::function<void(Bytes&)>& fn);

    /// Total bytes written across replicas, the provider-side storage cost basis.
    std::uint64_t bytes_written() const { return bytes_written_; }

    /// Writes one file per cid, named by its hex digest, read from the first live replica.
    void export_to(const std::filesystem::path& dir) const;

private:
    struct StorageNode {
        bool up = true;
        std::map<ContentId, Bytes> blobs;
    };
    std::vector<std::uint32_t> choose(const ContentId& cid, std::uint32_t replicas) const;

    std::vector<StorageNode> nodes_;
    std::map<ContentId, std::vector<std::uint32_t>> placement_;
    double crash_prob_;
    Rng rng_;
    std::uint64_t bytes_written_ = 0;
};

enum class Integrity { Verified, Tampered, Unconfirmed };
std::string_view to_string(Integrity i);

/// Linked: digest(data) against the cid carried by the confirmed hook tx.
/// Inline: byte equality with the confirmed tx's inline payload.
/// Unconfirmed until the hook tx is network-confirmed.
Integrity verify_integrity(const StorageRef& ref, ByteView data, const Network& net);

/// Bytes to place in a hook transaction: the cid digest for Linked, empty for Inline.
Bytes hook_pointer(const StorageRef& ref);
/// Inline payload to embed in the hook transaction.
Bytes hook_inline(const StorageRef& ref);

}  // namespace w3sim
