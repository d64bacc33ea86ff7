#include <algorithm>
#include <atomic>
#include <thread>

#include "driver.hpp"
#include "w3sim/error.hpp"

namespace w3sim {

using detail::Stack;
using detail::Submitted;

namespace {

struct Outcome {
    std::uint64_t attempted = 0;
    std::uint64_t succeeded = 0;
    std::uint64_t confirmed_ops = 0;
    std::uint64_t onchain_txs = 0;
    std::uint64_t ticks = 0;
    std::uint64_t gas_total = 0;
    std::uint64_t violations = 0;
    std::uint64_t steps = 0;
    std::uint64_t offchain_bytes = 0;
    double latency_sum = 0;

    double tps() const { return ticks == 0 ? 0.0 : static_cast<double>(confirmed_ops) / static_cast<double>(ticks); }
};

bool inline_route(const StoragePlan& plan, std::size_t size) {
    if (std::holds_alternative<OnChainPlan>(plan)) return true;
    if (auto* h = std::get_if<HybridPlan>(&plan)) return size <= h->inline_threshold;
    return false;
}

std::string pair_name(const std::string& base, std::uint32_t pair, std::uint32_t pairs) {
    return pairs == 1 ? base : base + "-" + std::to_string(pair);
}

Outcome simulate(const ArchitectureType& arch, const ScenarioScript& script, const FaultPlan& faults,
                 std::uint64_t seed, const SimConfig& sim) {
    Stack st(arch, sim, faults, seed);
    std::vector<std::string> funded;
    for (std::uint32_t p = 0; p < script.pairs; ++p) {
        funded.push_back(pair_name(script.seller, p, script.pairs));
        funded.push_back(pair_name(script.buyer, p, script.pairs));
    }
    Amount spend = 0;
    for (const auto& s : script.steps)
        if (s.kind == StepKind::BuyNft) spend += s.price;
    st.start(funded, spend * script.repeat + 1);

    Rng data_rng(Rng::mix(seed, 31));
    Rng fault_rng(Rng::mix(seed, 32));
    auto executor_up = [&] {
        if (!st.topo.hybrid_compute) return true;
        return !fault_rng.bernoulli(faults.executor_fail_prob);
    };

    struct Retrieval {
        std::string actor;
        std::optional<StorageRef> ref;
        Bytes data;
        std::optional<Submitted> hook;
    };
    Outcome o;
    std::vector<Submitted> onchain;
    std::vector<Retrieval> reads;

    for (std::uint32_t rep = 0; rep < script.repeat; ++rep) {
        const auto pair = rep % script.pairs;
        const auto seller = pair_name(script.seller, pair, script.pairs);
        const auto buyer = pair_name(script.buyer, pair, script.pairs);
        auto resolve = [&](const ScenarioStep& s, const std::string& fallback) {
            if (s.actor == script.seller) return seller;
            if (s.actor == script.buyer) return buyer;
            return s.actor.empty() ? fallback : pair_name(s.actor, pair, script.pairs);
        };
        const std::uint64_t token_id = rep;
        std::optional<StorageRef> ref;
        Bytes data;
        std::optional<Submitted> mint;
        bool listed = false;

        for (const auto& step : script.steps) {
            ++o.steps;
            try {
                switch (step.kind) {
                    case StepKind::CreateIdentity:
                        if (step.actor.empty()) {
                            st.wallet(seller);
                            st.wallet(buyer);
                        } else {
                            st.wallet(resolve(step, seller));
                        }
                        break;
                    case StepKind::ConnectWallet:
                        if (step.actor.empty()) {
                            st.connect(seller);
                            st.connect(buyer);
                        } else {
                            st.connect(resolve(step, seller));
                        }
                        break;
                    case StepKind::MintNft: {
                        ++o.attempted;
                        if (!executor_up()) break;
                        data.resize(step.data_size);
                        for (auto& b : data) b = static_cast<std::uint8_t>(data_rng.below(256));
                        if (inline_route(st.topo.plan, data.size())) {
                            ref = InlineRef{data, std::nullopt, std::nullopt};
                        } else {
                            st.store->inject_failures();
                            ref = st.store->put(data, st.topo.plan);
                        }
                        mint = st.submit(resolve(step, seller), st.nft, "mint",
                                         {encode_u64(token_id), hook_pointer(*ref)}, hook_inline(*ref));
                        onchain.push_back(*mint);
                        break;
                    }
                    case StepKind::ListNft:
                        ++o.attempted;
                        if (!mint || !executor_up()) break;
                        onchain.push_back(st.submit(resolve(step, seller), st.market, "list",
                                                    {encode_u64(token_id), encode_amount(step.price)}));
                        listed = true;
                        break;
                    case StepKind::BuyNft:
                        ++o.attempted;
                        if (!listed || !executor_up()) break;
                        onchain.push_back(st.submit(resolve(step, buyer), st.market, "buy",
                                                    {encode_u64(token_id), encode_amount(step.price)}));
                        break;
                    case StepKind::RetrieveState:
                        ++o.attempted;
                        reads.push_back({resolve(step, buyer), ref, data, mint});
                        break;
                }
            } catch (const Error&) {
                // A failed submission or storage write counts against availability.
                if (step.kind == StepKind::MintNft) {
                    ref.reset();
                    mint.reset();
                }
            }
        }
    }

    st.settle(100 + 10 * o.attempted);
    st.index_confirmations();

    std::uint64_t last = 0;
    for (const auto& s : onchain) {
        auto status = st.status(s);
        if (!status.success) continue;
        ++o.succeeded;
        ++o.confirmed_ops;
        o.latency_sum += static_cast<double>(status.tick);
        last = std::max(last, status.tick);
    }
    o.ticks = last;

    for (auto& r : reads) {
        auto obs = st.net->observer();
        if (!obs) continue;
        try {
            retrieve_state(*st.net, *obs, st.wallet(r.actor).address().payload, st.nft);
        } catch (const Error&) {
            continue;
        }
        if (!r.ref) {
            // Nothing minted this repetition; the state read alone succeeded.
            ++o.succeeded;
            continue;
        }
        auto status = st.status(*r.hook);
        if (!status.confirmed) continue;
        attach_hook(*r.ref, status.carrier, r.hook->op);
        Bytes got;
        try {
            if (is_linked(*r.ref)) st.store->inject_failures();
            got = is_linked(*r.ref) ? st.store->get(*r.ref) : r.data;
        } catch (const Error&) {
            continue;
        }
        if (verify_integrity(*r.ref, got, *st.net) == Integrity::Verified) ++o.succeeded;
    }

    for (const auto& c : st.net->confirmations()) {
        ++o.onchain_txs;
        o.gas_total += c.receipt.gas_used;
        if (st.violations->contains(c.tx.tx_id)) ++o.violations;
    }
    if (st.store) o.offchain_bytes = st.store->bytes_written();
    return o;
}

nlohmann::ordered_json snapshot(const ScenarioScript& script, const FaultPlan& f, const SimConfig& sim) {
    const auto& c = sim.consensus;
    nlohmann::ordered_json j;
    j["consensus"] = {{"rule", to_string(c.rule)},
                      {"fraction", c.fraction},
                      {"nodes", c.n_nodes},
                      {"confirm_depth", c.confirm_depth},
                      {"block_interval", c.block_interval},
                      {"min_delay", c.min_delay},
                      {"max_delay", c.max_delay},
                      {"block_gas_limit", c.block_gas_limit},
                      {"max_block_txs", c.max_block_txs}};
    j["gas"] = {{"base_tx", c.gas.base_tx},
                {"per_storage_write", c.gas.per_storage_write},
                {"per_storage_read", c.gas.per_storage_read},
                {"per_event", c.gas.per_event},
                {"per_inline_byte", c.gas.per_inline_byte}};
    j["agent"] = {{"batch_size", sim.batch_size}, {"flush_interval", sim.flush_interval}, {"disabled", sim.disable_agent}};
    j["storage"] = {{"nodes", sim.storage_nodes},
                    {"replicas", sim.replicas},
                    {"inline_threshold", sim.inline_threshold},
                    {"inline_cap", kInlineCap},
                    {"cost_per_byte", sim.offchain_cost_per_byte}};
    j["hybrid"] = {{"offchain_fraction", sim.hybrid.offchain_fraction}};
    j["faults"] = {{"maintainer_crash_prob", f.maintainer_crash_prob},
                   {"byzantine_maintainers", f.byzantine_maintainers},
                   {"byzantine_mode", to_string(f.byzantine_mode)},
                   {"agent_behavior", to_string(f.agent_behavior)},
                   {"storage_crash_prob", f.storage_crash_prob},
                   {"executor_behavior", to_string(f.executor_behavior)},
                   {"executor_fail_prob", f.executor_fail_prob}};
    j["scenario"] = to_text(script);
    return j;
}

}  // namespace

nlohmann::ordered_json to_json(const MetricReport& r) {
    nlohmann::ordered_json j;
    j["type"] = r.arch.type_id;
    j["tuple"] = r.arch.tuple_string();
    j["effective_tuple"] = r.effective.tuple_string();
    j["seed"] = r.seed;
    j["status"] = r.status;
    if (!r.detail.empty()) j["detail"] = r.detail;
    j["metrics"] = {{"tps", r.tps},
                    {"tps_at_scale", r.tps_at_scale},
                    {"scalability_slope", r.scalability_slope},
                    {"gas_total", r.gas_total},
                    {"gas_per_op", r.gas_per_op},
                    {"availability", r.availability},
                    {"security_violations", r.security_violations},
                    {"ops_attempted", r.ops_attempted},
                    {"ops_succeeded", r.ops_succeeded},
                    {"ops_confirmed", r.ops_confirmed},
                    {"onchain_txs", r.onchain_txs},
                    {"ops_per_tx", r.ops_per_tx},
                    {"ticks", r.ticks},
                    {"mean_latency", r.mean_latency},
                    {"interaction_steps", r.interaction_steps},
                    {"offchain_bytes", r.offchain_bytes},
                    {"offchain_storage_cost", r.offchain_storage_cost}};
    j["scores"] = {{"security", r.rules.security},
                   {"anonymity", r.rules.anonymity},
                   {"confidentiality", r.rules.confidentiality},
                   {"availability", r.rules.availability},
                   {"usability", r.rules.usability},
                   {"gas", r.rules.gas}};
    j["stakeholders"] = {{"user", r.stakeholders.user},
                         {"provider", r.stakeholders.provider},
                         {"maintainer", r.stakeholders.maintainer}};
    j["config"] = r.config;
    return j;
}

MetricReport run_scenario(const ArchitectureType& arch, const ScenarioScript& script, const FaultPlan& faults,
                          std::uint64_t seed, const SimConfig& sim, RunOptions opts) {
    faults.validate();
    SimConfig eff = sim;
    eff.agent_behavior = faults.agent_behavior;
    const auto topo = compose(arch, eff);

    MetricReport r;
    r.arch = arch;
    r.effective = topo.effective;
    r.seed = seed;
    r.rules = rule_scores(topo.effective);
    r.stakeholders = stakeholder_benefits(topo.effective);
    r.config = snapshot(script, faults, sim);

    for (const auto& s : script.steps)
        if (s.kind == StepKind::MintNft && inline_route(topo.plan, s.data_size) && s.data_size > kInlineCap) {
            r.status = std::string(to_string(Errc::ScenarioInfeasible));
            r.detail = std::to_string(s.data_size) + "-byte NFT data must go inline under " + arch.tuple_string() +
                       " but the inline cap is " + std::to_string(kInlineCap) + " bytes";
            return r;
        }

    const auto o = simulate(arch, script, faults, seed, sim);
    r.ops_attempted = o.attempted;
    r.ops_succeeded = o.succeeded;
    r.ops_confirmed = o.confirmed_ops;
    r.onchain_txs = o.onchain_txs;
    r.ticks = o.ticks;
    r.tps = o.tps();
    r.gas_total = o.gas_total;
    r.gas_per_op = o.confirmed_ops ? static_cast<double>(o.gas_total) / static_cast<double>(o.confirmed_ops) : 0.0;
    r.availability = o.attempted ? static_cast<double>(o.succeeded) / static_cast<double>(o.attempted) : 1.0;
    r.security_violations = o.violations;
    r.ops_per_tx = o.onchain_txs ? static_cast<double>(o.confirmed_ops) / static_cast<double>(o.onchain_txs) : 0.0;
    r.mean_latency = o.confirmed_ops ? o.latency_sum / static_cast<double>(o.confirmed_ops) : 0.0;
    r.interaction_steps = o.steps;
    r.offchain_bytes = o.offchain_bytes;
    r.offchain_storage_cost = static_cast<double>(o.offchain_bytes) * sim.offchain_cost_per_byte;

    if (opts.measure_scale) {
        SimConfig big = sim;
        big.consensus.n_nodes *= 2;
        ScenarioScript more = script;
        more.pairs *= 2;
        more.repeat *= 2;
        const auto o2 = simulate(arch, more, faults, seed, big);
        r.tps_at_scale = o2.tps();
        r.scalability_slope = (r.tps_at_scale - r.tps) / static_cast<double>(sim.consensus.n_nodes);
    }
    return r;
}

SweepResult run_sweep(const SweepOptions& opts) {
    SimConfig sim = opts.sim;
    sim.consensus.n_nodes = opts.nodes;
    FaultPlan faulted = opts.run_faults;
    faulted.storage_crash_prob = std::max(faulted.storage_crash_prob, opts.availability_faults.storage_crash_prob);
    faulted.executor_fail_prob = std::max(faulted.executor_fail_prob, opts.availability_faults.executor_fail_prob);

    const auto types = all_types();
    SweepResult out;
    out.reports.resize(types.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < types.size(); i = next++) {
            auto clean = run_scenario(types[i], opts.script, opts.run_faults, opts.seed, sim);
            auto stressed = run_scenario(types[i], opts.script, faulted, opts.seed, sim, {false});
            clean.availability = stressed.availability;
            clean.config["availability_pass"] = stressed.config["faults"];
            out.reports[i] = std::move(clean);
        }
    };
    const unsigned jobs = std::max(1u, std::min<unsigned>(opts.jobs, static_cast<unsigned>(types.size())));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    out.measured = compare(out.reports, out.reports.front());
    out.mismatches = check_against_reference(out.measured);
    return out;
}

}  // namespace w3sim
