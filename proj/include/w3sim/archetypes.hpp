#pragma once

#include <string>
#include <tuple>

#include "w3sim/access.hpp"
#include "w3sim/consensus.hpp"
#include "w3sim/storage.hpp"

namespace w3sim {

enum class Access { A1, A2 };
enum class Compute { B1, B2 };
enum class StorageKind { C1, C2, C3 };

struct ArchitectureType {
    int type_id = 1;
    Access access = Access::A1;
    Compute compute = Compute::B1;
    StorageKind storage = StorageKind::C1;

    bool operator==(const ArchitectureType&) const = default;
    std::string name() const { return "Type" + std::to_string(type_id); }
    /// "(A1,B2,C3)"
    std::string tuple_string() const;
    /// Components that differ from the all-on-chain baseline.
    int modified_components() const;
};

ArchitectureType type_from_tuple(Access a, Compute b, StorageKind c);
std::tuple<Access, Compute, StorageKind> tuple_of(const ArchitectureType& t);
/// Throws InvalidConfig outside 1..12.
ArchitectureType type_from_id(int id);
/// Parses "A2,B1,C3" (parentheses and spaces optional). Throws InvalidConfig.
ArchitectureType parse_tuple(std::string_view text);
std::vector<ArchitectureType> all_types();

enum class ExecutorBehavior { Honest, Malicious };
/// Where a malicious executor plants its wrong write.
enum class TamperRegion { Checked, Unchecked, Random };

std::string_view to_string(ExecutorBehavior b);

struct HybridComputeConfig {
    double offchain_fraction = 0.5;
    ExecutorBehavior behavior = ExecutorBehavior::Honest;
    TamperRegion region = TamperRegion::Random;
};

/// What the off-chain executor did to one transaction.
struct HybridTrace {
    bool tampered = false;
    bool tamper_checked = false;  // tampered write sat in the on-chain checked region
    std::size_t checked = 0;
    std::size_t unchecked = 0;
};

/// Off-chain execution with an on-chain commitment check. Payment writes and
/// the first ceil((1 - offchain_fraction) * rest) other writes in key order are
/// recomputed on-chain. A claimed write set that disagrees inside that region
/// reverts with CommitmentMismatch; disagreement outside it goes through.
ExecutionResult execute_hybrid(const ContractState& state, const Transaction& tx, const HybridComputeConfig& cfg,
                               const ExecEnv& env = {}, HybridTrace* trace = nullptr);

struct SimConfig {
    ConsensusConfig consensus = ConsensusConfig::bft(7);
    std::size_t batch_size = 10;
    std::uint64_t flush_interval = 5;
    AgentBehavior agent_behavior = AgentBehavior::Honest;
    HybridComputeConfig hybrid;
    std::uint32_t storage_nodes = 5;
    double storage_crash_prob = 0.0;
    std::uint32_t replicas = 3;
    std::size_t inline_threshold = 256;
    double offchain_cost_per_byte = 1.0;  // charged to the service provider
    bool disable_agent = false;  // fault injection: route A2 traffic directly
};

struct SimulationTopology {
    ArchitectureType arch;
    /// The tuple actually wired, which differs from arch when a component is disabled.
    ArchitectureType effective;
    bool uses_agent = false;
    bool hybrid_compute = false;
    bool offchain_store = false;
    StoragePlan plan = OnChainPlan{};
    SimConfig config;
};

SimulationTopology compose(const ArchitectureType& arch, const SimConfig& config);

}  // namespace w3sim
