#include <fstream>
#include <sstream>

#include "w3sim/atam.hpp"
#include "w3sim/error.hpp"

namespace w3sim {

namespace {

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::string strip_comment(std::string_view line) { return trim(line.substr(0, line.find('#'))); }

[[noreturn]] void bad(std::size_t line, const std::string& why) {
    // Config values are checked after parsing, where no line number is kept.
    if (line == 0) throw Error(Errc::InvalidConfig, why);
    throw Error(Errc::InvalidConfig, "line " + std::to_string(line) + ": " + why);
}

std::uint64_t to_u64(const std::string& v, std::size_t line) {
    std::size_t used = 0;
    unsigned long long x = 0;
    try {
        x = std::stoull(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != v.size() || v.empty() || v[0] == '-') bad(line, "expected unsigned integer, got '" + v + "'");
    return x;
}

double to_double(const std::string& v, std::size_t line) {
    std::size_t used = 0;
    double x = 0;
    try {
        x = std::stod(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != v.size() || v.empty()) bad(line, "expected number, got '" + v + "'");
    return x;
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    if (!f) throw Error(Errc::InvalidConfig, "cannot read " + p.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

const std::map<std::string, StepKind>& step_names() {
    static const std::map<std::string, StepKind> names{
        {"CreateIdentity", StepKind::CreateIdentity}, {"ConnectWallet", StepKind::ConnectWallet},
        {"MintNft", StepKind::MintNft},               {"ListNft", StepKind::ListNft},
        {"BuyNft", StepKind::BuyNft},                 {"RetrieveState", StepKind::RetrieveState},
    };
    return names;
}

}  // namespace

std::string_view to_string(StepKind k) {
    for (const auto& [name, kind] : step_names())
        if (kind == k) return name;
    return "Unknown";
}

ScenarioScript parse_scenario(std::string_view text) {
    ScenarioScript s;
    std::istringstream in{std::string(text)};
    std::string raw;
    std::size_t line = 0;
    bool listed = false;
    while (std::getline(in, raw)) {
        ++line;
        auto body = strip_comment(raw);
        if (body.empty()) continue;
        std::istringstream words(body);
        std::string head;
        words >> head;
        std::map<std::string, std::string> kv;
        for (std::string w; words >> w;) {
            auto eq = w.find('=');
            if (eq == std::string::npos || eq == 0) bad(line, "expected key=value, got '" + w + "'");
            kv[w.substr(0, eq)] = w.substr(eq + 1);
        }
        auto take = [&](const std::string& key) -> std::optional<std::string> {
            auto it = kv.find(key);
            if (it == kv.end()) return std::nullopt;
            auto v = it->second;
            kv.erase(it);
            return v;
        };
        if (head == "repeat") {
            auto c = take("count");
            if (!c) bad(line, "repeat needs count=");
            s.repeat = static_cast<std::uint32_t>(to_u64(*c, line));
            if (s.repeat == 0) bad(line, "repeat count must be >= 1");
        } else if (head == "pairs") {
            auto c = take("count");
            if (!c) bad(line, "pairs needs count=");
            s.pairs = static_cast<std::uint32_t>(to_u64(*c, line));
            if (s.pairs == 0) bad(line, "pairs count must be >= 1");
        } else if (head == "actors") {
            if (auto v = take("seller")) s.seller = *v;
            if (auto v = take("buyer")) s.buyer = *v;
            if (s.seller == s.buyer) bad(line, "seller and buyer must differ");
        } else {
            auto it = step_names().find(head);
            if (it == step_names().end()) bad(line, "unknown step '" + head + "'");
            ScenarioStep step;
            step.kind = it->second;
            if (auto v = take("actor")) step.actor = *v;
            if (step.kind == StepKind::MintNft) {
                auto v = take("data_size");
                if (!v) bad(line, "MintNft needs data_size=");
                step.data_size = to_u64(*v, line);
                if (step.data_size == 0) bad(line, "data_size must be >= 1");
            }
            if (step.kind == StepKind::ListNft || step.kind == StepKind::BuyNft) {
                auto v = take("price");
                if (v) step.price = to_u64(*v, line);
                else if (step.kind == StepKind::ListNft) bad(line, "ListNft needs price=");
            }
            if (step.kind == StepKind::ListNft) listed = true;
            if (step.kind == StepKind::BuyNft && !listed) bad(line, "BuyNft before any ListNft");
            s.steps.push_back(std::move(step));
        }
        if (!kv.empty()) bad(line, "unknown argument '" + kv.begin()->first + "'");
    }
    if (s.steps.empty()) throw Error(Errc::InvalidConfig, "scenario has no steps");
    // A buy without its own price pays the latest listed price.
    Amount last = 0;
    for (auto& st : s.steps) {
        if (st.kind == StepKind::ListNft) last = st.price;
        if (st.kind == StepKind::BuyNft && st.price == 0) st.price = last;
    }
    return s;
}

ScenarioScript load_scenario(const std::filesystem::path& path) { return parse_scenario(read_file(path)); }

std::string to_text(const ScenarioScript& s) {
    std::ostringstream out;
    out << "actors seller=" << s.seller << " buyer=" << s.buyer << "\n";
    out << "repeat count=" << s.repeat << "\n";
    out << "pairs count=" << s.pairs << "\n";
    for (const auto& st : s.steps) {
        out << to_string(st.kind);
        if (!st.actor.empty()) out << " actor=" << st.actor;
        if (st.kind == StepKind::MintNft) out << " data_size=" << st.data_size;
        if (st.kind == StepKind::ListNft || st.kind == StepKind::BuyNft) out << " price=" << amount_to_string(st.price);
        out << "\n";
    }
    return out.str();
}

ScenarioScript default_scenario() {
    return parse_scenario(R"(# Alice mints an NFT whose raw data lives per the storage route, lists it, Bob buys it.
actors seller=alice buyer=bob
repeat count=200
CreateIdentity
ConnectWallet
MintNft actor=alice data_size=1000
ListNft actor=alice price=10
BuyNft actor=bob
RetrieveState actor=bob
)");
}

void FaultPlan::validate() const {
    for (double p : {maintainer_crash_prob, storage_crash_prob, executor_fail_prob})
        if (!(p >= 0.0 && p <= 1.0)) throw Error(Errc::InvalidConfig, "fault probabilities must lie in [0, 1]");
}

FaultPlan sweep_availability_faults() {
    FaultPlan f;
    f.storage_crash_prob = 0.3;
    f.executor_fail_prob = 0.2;
    return f;
}

ConfigFile parse_config(std::string_view text) {
    ConfigFile cfg;
    std::istringstream in{std::string(text)};
    std::string raw, section;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        auto body = strip_comment(raw);
        if (body.empty()) continue;
        if (body.front() == '[') {
            if (body.back() != ']') bad(line, "unterminated section header");
            section = trim(std::string_view(body).substr(1, body.size() - 2));
            if (section.empty()) bad(line, "empty section name");
            cfg[section];
            continue;
        }
        auto eq = body.find('=');
        if (eq == std::string::npos) bad(line, "expected key = value");
        if (section.empty()) bad(line, "key outside a section");
        auto key = trim(std::string_view(body).substr(0, eq));
        auto value = trim(std::string_view(body).substr(eq + 1));
        if (key.empty()) bad(line, "empty key");
        cfg[section][key] = value;
    }
    return cfg;
}

ConfigFile load_config(const std::filesystem::path& path) { return parse_config(read_file(path)); }

namespace {

template <class Fn>
void each_key(const ConfigFile& cfg, const std::string& section, Fn&& fn) {
    auto it = cfg.find(section);
    if (it == cfg.end()) return;
    for (const auto& [k, v] : it->second)
        if (!fn(k, v)) throw Error(Errc::InvalidConfig, "unknown key [" + section + "] " + k);
}

}  // namespace

FaultPlan fault_plan_from(const ConfigFile& cfg) {
    FaultPlan f;
    each_key(cfg, "faults", [&](const std::string& k, const std::string& v) {
        if (k == "maintainer_crash_prob") f.maintainer_crash_prob = to_double(v, 0);
        else if (k == "byzantine_maintainers") f.byzantine_maintainers = static_cast<std::uint32_t>(to_u64(v, 0));
        else if (k == "byzantine_mode") {
            if (v == "silent") f.byzantine_mode = ByzantineMode::Silent;
            else if (v == "equivocate") f.byzantine_mode = ByzantineMode::Equivocate;
            else if (v == "withhold") f.byzantine_mode = ByzantineMode::Withhold;
            else throw Error(Errc::InvalidConfig, "byzantine_mode: silent|equivocate|withhold");
        } else if (k == "agent_behavior") {
            if (v == "honest") f.agent_behavior = AgentBehavior::Honest;
            else if (v == "withholding") f.agent_behavior = AgentBehavior::Withholding;
            else throw Error(Errc::InvalidConfig, "agent_behavior: honest|withholding");
        } else if (k == "storage_crash_prob") f.storage_crash_prob = to_double(v, 0);
        else if (k == "executor_behavior") {
            if (v == "honest") f.executor_behavior = ExecutorBehavior::Honest;
            else if (v == "malicious") f.executor_behavior = ExecutorBehavior::Malicious;
            else throw Error(Errc::InvalidConfig, "executor_behavior: honest|malicious");
        } else if (k == "tamper_region") {
            if (v == "checked") f.tamper_region = TamperRegion::Checked;
            else if (v == "unchecked") f.tamper_region = TamperRegion::Unchecked;
            else if (v == "random") f.tamper_region = TamperRegion::Random;
            else throw Error(Errc::InvalidConfig, "tamper_region: checked|unchecked|random");
        } else if (k == "executor_fail_prob") f.executor_fail_prob = to_double(v, 0);
        else return false;
        return true;
    });
    f.validate();
    return f;
}

void apply_config(const ConfigFile& cfg, SimConfig& sim) {
    for (const auto& [section, unused] : cfg)
        if (section != "faults" && section != "consensus" && section != "agent" && section != "storage" &&
            section != "hybrid" && section != "gas")
            throw Error(Errc::InvalidConfig, "unknown section [" + section + "]");
    auto& c = sim.consensus;
    each_key(cfg, "consensus", [&](const std::string& k, const std::string& v) {
        if (k == "rule") {
            if (v == "bft") {
                c.rule = ConsensusRule::BftQuorum;
                c.fraction = 2.0 / 3.0;
            } else if (v == "majority") {
                c.rule = ConsensusRule::MajorityChain;
                c.fraction = 0.51;
            } else {
                throw Error(Errc::InvalidConfig, "rule: bft|majority");
            }
        } else if (k == "fraction") c.fraction = to_double(v, 0);
        else if (k == "nodes") c.n_nodes = static_cast<std::uint32_t>(to_u64(v, 0));
        else if (k == "confirm_depth") c.confirm_depth = static_cast<std::uint32_t>(to_u64(v, 0));
        else if (k == "block_interval") c.block_interval = to_u64(v, 0);
        else if (k == "min_delay") c.min_delay = to_u64(v, 0);
        else if (k == "max_delay") c.max_delay = to_u64(v, 0);
        else if (k == "block_gas_limit") c.block_gas_limit = to_u64(v, 0);
        else if (k == "max_block_txs") c.max_block_txs = static_cast<std::uint32_t>(to_u64(v, 0));
        else if (k == "pool_capacity") c.pool_capacity = to_u64(v, 0);
        else if (k == "crash_duration") c.crash_duration = to_u64(v, 0);
        else return false;
        return true;
    });
    each_key(cfg, "agent", [&](const std::string& k, const std::string& v) {
        if (k == "batch_size") sim.batch_size = to_u64(v, 0);
        else if (k == "flush_interval") sim.flush_interval = to_u64(v, 0);
        else return false;
        return true;
    });
    each_key(cfg, "storage", [&](const std::string& k, const std::string& v) {
        if (k == "nodes") sim.storage_nodes = static_cast<std::uint32_t>(to_u64(v, 0));
        else if (k == "replicas") sim.replicas = static_cast<std::uint32_t>(to_u64(v, 0));
        else if (k == "inline_threshold") sim.inline_threshold = to_u64(v, 0);
        else if (k == "cost_per_byte") sim.offchain_cost_per_byte = to_double(v, 0);
        else return false;
        return true;
    });
    each_key(cfg, "hybrid", [&](const std::string& k, const std::string& v) {
        if (k == "offchain_fraction") sim.hybrid.offchain_fraction = to_double(v, 0);
        else return false;
        return true;
    });
    each_key(cfg, "gas", [&](const std::string& k, const std::string& v) {
        auto& g = c.gas;
        if (k == "base_tx") g.base_tx = to_u64(v, 0);
        else if (k == "per_storage_write") g.per_storage_write = to_u64(v, 0);
        else if (k == "per_storage_read") g.per_storage_read = to_u64(v, 0);
        else if (k == "per_event") g.per_event = to_u64(v, 0);
        else if (k == "per_inline_byte") g.per_inline_byte = to_u64(v, 0);
        else return false;
        return true;
    });
    c.validate();
    if (sim.batch_size == 0) throw Error(Errc::InvalidConfig, "batch_size must be >= 1");
    if (!(sim.hybrid.offchain_fraction >= 0.0 && sim.hybrid.offchain_fraction <= 1.0))
        throw Error(Errc::InvalidConfig, "offchain_fraction must lie in [0, 1]");
}

}  // namespace w3sim
