#include "w3sim/archetypes.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "w3sim/digest.hpp"
#include "w3sim/error.hpp"

namespace w3sim {

std::string ArchitectureType::tuple_string() const {
    std::string s = "(A";
    s += access == Access::A1 ? '1' : '2';
    s += ",B";
    s += compute == Compute::B1 ? '1' : '2';
    s += ",C";
    s += static_cast<char>('1' + static_cast<int>(storage));
    return s + ")";
}

int ArchitectureType::modified_components() const {
    return (access != Access::A1) + (compute != Compute::B1) + (storage != StorageKind::C1);
}

ArchitectureType type_from_tuple(Access a, Compute b, StorageKind c) {
    int id = 1 + static_cast<int>(c) + 3 * static_cast<int>(b) + 6 * static_cast<int>(a);
    return {id, a, b, c};
}

std::tuple<Access, Compute, StorageKind> tuple_of(const ArchitectureType& t) {
    return {t.access, t.compute, t.storage};
}

ArchitectureType type_from_id(int id) {
    if (id < 1 || id > 12) throw Error(Errc::InvalidConfig, "type id must be 1..12");
    int z = id - 1;
    return type_from_tuple(static_cast<Access>(z / 6), static_cast<Compute>((z / 3) % 2),
                           static_cast<StorageKind>(z % 3));
}

ArchitectureType parse_tuple(std::string_view text) {
    std::string clean;
    for (char ch : text)
        if (!std::isspace(static_cast<unsigned char>(ch)) && ch != '(' && ch != ')')
            clean += static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    if (clean.size() != 8 || clean[0] != 'A' || clean[2] != ',' || clean[3] != 'B' || clean[5] != ',' ||
        clean[6] != 'C')
        throw Error(Errc::InvalidConfig, "tuple must look like A1,B2,C3");
    int a = clean[1] - '1', b = clean[4] - '1', c = clean[7] - '1';
    if (a < 0 || a > 1 || b < 0 || b > 1 || c < 0 || c > 2) throw Error(Errc::InvalidConfig, "tuple out of range");
    return type_from_tuple(static_cast<Access>(a), static_cast<Compute>(b), static_cast<StorageKind>(c));
}

std::vector<ArchitectureType> all_types() {
    std::vector<ArchitectureType> out;
    for (int i = 1; i <= 12; ++i) out.push_back(type_from_id(i));
    return out;
}

std::string_view to_string(ExecutorBehavior b) { return b == ExecutorBehavior::Honest ? "Honest" : "Malicious"; }

namespace {

bool payment_write(const Bytes& key) {
    if (key.empty()) return false;
    if (key[0] == ContractState::Native) return true;
    return key[0] == ContractState::Storage && key.size() > 21 && key[21] == keys::kBalance;
}

Digest commit_writes(const WriteSet& w) {
    ByteWriter bw;
    bw.u32(static_cast<std::uint32_t>(w.size()));
    for (const auto& [k, v] : w) {
        bw.field(k).u8(v.has_value());
        if (v) bw.field(*v);
    }
    return digest(bw.bytes());
}

// Indices into a key-sorted write set that the chain recomputes itself.
std::vector<bool> checked_mask(const WriteSet& w, double offchain_fraction) {
    std::vector<bool> mask(w.size(), false);
    std::size_t rest = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (payment_write(w[i].first))
            mask[i] = true;
        else
            ++rest;
    }
    auto budget = static_cast<std::size_t>(std::ceil((1.0 - offchain_fraction) * static_cast<double>(rest) - 1e-9));
    for (std::size_t i = 0; i < w.size() && budget > 0; ++i)
        if (!mask[i]) {
            mask[i] = true;
            --budget;
        }
    return mask;
}

}  // namespace

ExecutionResult execute_hybrid(const ContractState& state, const Transaction& tx, const HybridComputeConfig& cfg,
                               const ExecEnv& env, HybridTrace* trace) {
    ExecutionResult pure = dry_run(state, tx, env);
    HybridTrace local;
    HybridTrace& tr = trace ? *trace : local;
    tr = {};
    if (!pure.receipt.success() || pure.writes.empty()) return pure;

    WriteSet honest = pure.writes;
    std::sort(honest.begin(), honest.end());
    const auto mask = checked_mask(honest, cfg.offchain_fraction);
    tr.checked = static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
    tr.unchecked = honest.size() - tr.checked;

    // Off-chain side: the executor posts a write set and its commitment.
    WriteSet claimed = honest;
    if (cfg.behavior == ExecutorBehavior::Malicious) {
        std::vector<std::size_t> pool;
        for (std::size_t i = 0; i < claimed.size(); ++i) {
            bool in_checked = mask[i];
            if (cfg.region == TamperRegion::Random || (cfg.region == TamperRegion::Checked) == in_checked)
                pool.push_back(i);
        }
        if (!pool.empty()) {
            // Deterministic per tx so every validator sees the same claim.
            const auto pick = pool[decode_u64(ByteView(tx.tx_id).subspan(0, 8)) % pool.size()];
            auto& value = claimed[pick].second;
            if (value && !value->empty())
                value->back() ^= 0x01;
            else
                value = Bytes{0xff};
            tr.tampered = true;
            tr.tamper_checked = mask[pick];
        }
    }
    const Digest commitment = commit_writes(claimed);

    // On-chain side: recompute the checked region, trust the rest of the claim.
    WriteSet verified = claimed;
    for (std::size_t i = 0; i < verified.size(); ++i)
        if (mask[i]) verified[i] = honest[i];
    ExecutionResult out;
    out.receipt = pure.receipt;
    auto& c = out.receipt.counters;
    c.writes -= std::min<std::uint64_t>(c.writes, tr.unchecked);
    c.reads += tr.unchecked;
    out.receipt.gas_used = c.cost(env.gas);
    if (commit_writes(verified) != commitment) {
        out.receipt.status = RevertReason::CommitmentMismatch;
        out.receipt.events.clear();
        out.receipt.ops.clear();
        out.receipt.return_data.clear();
        return out;
    }
    out.writes = std::move(verified);
    return out;
}

SimulationTopology compose(const ArchitectureType& arch, const SimConfig& config) {
    SimulationTopology t;
    t.arch = arch;
    t.config = config;
    auto access = arch.access;
    if (config.disable_agent) access = Access::A1;
    t.effective = type_from_tuple(access, arch.compute, arch.storage);
    t.uses_agent = access == Access::A2;
    t.hybrid_compute = arch.compute == Compute::B2;
    switch (arch.storage) {
        case StorageKind::C1: t.plan = OnChainPlan{}; break;
        case StorageKind::C2: t.plan = HybridPlan{config.inline_threshold, config.replicas}; break;
        case StorageKind::C3: t.plan = OffChainPlan{config.replicas}; break;
    }
    t.offchain_store = arch.storage != StorageKind::C1;
    validate_plan(t.plan);
    return t;
}

}  // namespace w3sim
