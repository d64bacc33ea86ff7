#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "w3sim/archetypes.hpp"

namespace w3sim {

// ---- scenario scripts ----

enum class StepKind { CreateIdentity, ConnectWallet, MintNft, ListNft, BuyNft, RetrieveState };
std::string_view to_string(StepKind k);

struct ScenarioStep {
    StepKind kind = StepKind::CreateIdentity;
    std::string actor;          // empty: both actors where it applies
    std::size_t data_size = 0;  // MintNft
    Amount price = 0;           // ListNft / BuyNft
};

struct ScenarioScript {
    std::string seller = "alice";
    std::string buyer = "bob";
    std::uint32_t repeat = 1;
    std::uint32_t pairs = 1;  // independent seller/buyer pairs sharing the repetitions
    std::vector<ScenarioStep> steps;
};

/// Line-oriented records: `<Step> key=value ...`, plus `repeat count=N`,
/// `actors seller=X buyer=Y` and `pairs count=N`. `#` starts a comment.
/// Throws InvalidConfig with the line number.
ScenarioScript parse_scenario(std::string_view text);
ScenarioScript load_scenario(const std::filesystem::path& path);
std::string to_text(const ScenarioScript& s);
/// The NFT sale: identities, wallets, mint 1000 bytes, list at 10, buy, retrieve; 200 repetitions.
ScenarioScript default_scenario();

// ---- configuration ----

struct FaultPlan {
    double maintainer_crash_prob = 0.0;
    std::uint32_t byzantine_maintainers = 0;
    ByzantineMode byzantine_mode = ByzantineMode::Silent;
    AgentBehavior agent_behavior = AgentBehavior::Honest;
    double storage_crash_prob = 0.0;
    ExecutorBehavior executor_behavior = ExecutorBehavior::Honest;
    TamperRegion tamper_region = TamperRegion::Random;
    double executor_fail_prob = 0.0;  // off-chain executor unavailable for an op

    /// Throws InvalidConfig unless probabilities lie in [0, 1].
    void validate() const;
};

/// Faults the sweep uses to measure the availability trend.
FaultPlan sweep_availability_faults();

/// `[section]` headers and `key = value` lines; `#` comments.
using ConfigFile = std::map<std::string, std::map<std::string, std::string>>;
ConfigFile parse_config(std::string_view text);
ConfigFile load_config(const std::filesystem::path& path);
/// Reads [faults]. Unknown keys throw InvalidConfig.
FaultPlan fault_plan_from(const ConfigFile& cfg);
/// Reads [consensus], [agent], [storage], [hybrid] and [gas] into `sim`.
void apply_config(const ConfigFile& cfg, SimConfig& sim);

// ---- metrics ----

struct RuleScores {
    int security = 0;
    int anonymity = 0;
    int confidentiality = 0;
    int availability = 0;
    int usability = 0;
    int gas = 0;
};
RuleScores rule_scores(const ArchitectureType& arch);

struct Stakeholders {
    int user = 0;
    int provider = 0;
    int maintainer = 0;
};
Stakeholders stakeholder_benefits(const ArchitectureType& arch);

struct MetricReport {
    ArchitectureType arch;
    ArchitectureType effective;
    std::uint64_t seed = 0;
    std::string status = "ok";
    std::string detail;

    std::uint64_t ops_attempted = 0;
    std::uint64_t ops_succeeded = 0;
    std::uint64_t ops_confirmed = 0;  // on-chain user ops that confirmed successfully
    std::uint64_t onchain_txs = 0;
    std::uint64_t ticks = 0;
    double tps = 0;                   // confirmed user ops per tick
    double tps_at_scale = 0;          // same workload doubled on a network twice the size
    double scalability_slope = 0;     // (tps_at_scale - tps) per added node
    std::uint64_t gas_total = 0;
    double gas_per_op = 0;
    double availability = 0;
    std::uint64_t security_violations = 0;
    double ops_per_tx = 0;
    double mean_latency = 0;
    std::uint64_t interaction_steps = 0;
    std::uint64_t offchain_bytes = 0;
    double offchain_storage_cost = 0;  // borne by the service provider

    RuleScores rules;
    Stakeholders stakeholders;
    nlohmann::ordered_json config;
};

nlohmann::ordered_json to_json(const MetricReport& r);

struct RunOptions {
    bool measure_scale = true;
};

/// Deterministic in (arch, script, faults, seed, sim). An inline-only route for
/// data above the inline cap yields status "ScenarioInfeasible".
MetricReport run_scenario(const ArchitectureType& arch, const ScenarioScript& script, const FaultPlan& faults,
                          std::uint64_t seed, const SimConfig& sim = {}, RunOptions opts = {});

// ---- ordinal matrix ----

enum class Column {
    Performance,
    Scalability,
    Gas,
    Security,
    Anonymity,
    Confidentiality,
    Availability,
    Usability,
    User,
    Provider,
    Maintainer
};
inline constexpr std::size_t kColumns = 11;
std::string_view to_string(Column c);

struct MatrixRow {
    std::string label;              // "1", "2/3", ...
    std::vector<int> type_ids;
    std::array<int, kColumns> cells{};
    /// Measured sign for Gas and Availability, kept beside their rule-scored cell.
    std::array<std::optional<int>, kColumns> trend{};
};

struct OrdinalMatrix {
    std::vector<MatrixRow> rows;
    const MatrixRow* row_for(int type_id) const;
};

OrdinalMatrix expected_table();

/// One row per report. Performance and scalability cells hold measured signs;
/// gas and availability hold rule scores plus a measured trend; the rest are rule-scored.
OrdinalMatrix compare(const std::vector<MetricReport>& reports, const MetricReport& baseline, double eps = 0.05);

struct Mismatch {
    int type_id = 0;
    Column column = Column::Performance;
    std::string kind;  // "exact" or "sign"
    int expected = 0;
    int measured = 0;
};
std::vector<Mismatch> check_against_reference(const OrdinalMatrix& measured);
std::string to_string(const Mismatch& m);

/// Rows laid out like the reference table: merged type groups, signed cells.
std::string render_markdown(const OrdinalMatrix& m, const std::vector<Mismatch>& mismatches = {});

struct SweepOptions {
    std::uint64_t seed = 42;
    std::uint32_t nodes = 7;
    unsigned jobs = 1;
    ScenarioScript script = default_scenario();
    FaultPlan run_faults;                                  // applied to every pass
    FaultPlan availability_faults = sweep_availability_faults();
    SimConfig sim;
};

struct SweepResult {
    std::vector<MetricReport> reports;  // type order 1..12
    OrdinalMatrix measured;
    std::vector<Mismatch> mismatches;
};

/// Runs all 12 types: a clean pass for throughput, gas and scale, then a pass
/// under availability faults whose success fraction becomes the report's availability.
SweepResult run_sweep(const SweepOptions& opts);

// ---- retrieval audit ----

struct RetrievalAudit {
    std::uint64_t confirmed = 0;  // user txs or bundled ops
    std::uint64_t checks = 0;
    std::uint64_t exact = 0;
    std::vector<std::string> failures;
};

/// Drives random token, NFT and market traffic through the composed
/// architecture and, after every round, compares retrieve_state on each honest
/// node against an independent replica that replays the confirmed order.
RetrievalAudit audit_retrieval(const ArchitectureType& arch, std::uint64_t min_confirmed, std::uint64_t seed,
                               const SimConfig& sim = {});

// ---- running example ----

struct DemoOutcome {
    bool supply_conserved = false;
    bool owner_is_buyer = false;
    bool integrity_verified = false;
    bool ok() const { return supply_conserved && owner_is_buyer && integrity_verified; }
};

/// Narrated NFT sale on the hybrid-storage stack, printing each protocol phase.
DemoOutcome run_demo(std::ostream& out, std::uint64_t seed);

}  // namespace w3sim
