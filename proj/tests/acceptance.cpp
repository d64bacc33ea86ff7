// One PASS/FAIL line per acceptance criterion. Exit status is the failure count.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <sstream>

#include "fixtures.hpp"
#include "workload.hpp"
#include "w3sim/atam.hpp"
#include "w3sim/error.hpp"

using namespace w3sim;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int prec = 1) {
    std::ostringstream s;
    s.setf(std::ios::fixed);
    s.precision(prec);
    s << v;
    return s.str();
}

// ---- 1 ----

Verdict secure_retrieval() {
    const auto t0 = std::chrono::steady_clock::now();
    std::uint64_t min_confirmed = ~0ull, checks = 0, exact = 0;
    std::string first_failure;
    for (const auto& t : all_types()) {
        auto a = audit_retrieval(t, 1000, 42);
        min_confirmed = std::min(min_confirmed, a.confirmed);
        checks += a.checks;
        exact += a.exact;
        if (first_failure.empty() && !a.failures.empty()) first_failure = t.name() + ": " + a.failures.front();
    }
    const double secs = seconds_since(t0);
    Verdict v;
    v.pass = min_confirmed >= 1000 && checks > 0 && exact == checks && first_failure.empty() && secs < 60;
    v.detail = "min confirmed/type " + std::to_string(min_confirmed) + ", exact " + std::to_string(exact) + "/" +
               std::to_string(checks) + ", " + fmt(secs) + " s" + (first_failure.empty() ? "" : "; " + first_failure);
    return v;
}

// ---- 2 ----

struct Ledger {
    fixture::User alice = fixture::user("acc-alice");
    fixture::User bob = fixture::user("acc-bob");
    ContractState genesis;
    ContractId token{};
    Ledger() {
        token = deploy_contract(genesis, {make_contract_id(alice.id(), "ft"), ContractKind::FungibleToken, alice.id(),
                                          1'000'000, {}, {}});
    }
    void feed(Network& net, int count) const {
        for (int i = 0; i < count; ++i)
            net.submit(fixture::call(alice, i, token, "transfer", {to_bytes(bob.id()), encode_amount(1)}));
    }
};

std::vector<std::uint32_t> pick(Rng& rng, std::uint32_t n, std::uint32_t f) {
    std::vector<std::uint32_t> ids(n);
    for (std::uint32_t i = 0; i < n; ++i) ids[i] = i;
    for (std::uint32_t i = 0; i < f; ++i) std::swap(ids[i], ids[i + rng.below(n - i)]);
    ids.resize(f);
    return ids;
}

Verdict bft_thresholds() {
    const Ledger l;
    int wrong = 0, safety = 0, runs = 0;
    std::string first;
    for (std::uint32_t n : {4u, 7u, 10u}) {
        const std::uint32_t tolerated = n - (2 * n + 2) / 3;  // n - ceil(2n/3)
        for (std::uint32_t f = 0; f <= n; ++f) {
            for (std::uint64_t seed = 0; seed < 100; ++seed) {
                Rng rng(seed * 1000 + n * 17 + f);
                const auto faulty = pick(rng, n, f);
                // Liveness: silent nodes withhold proposals and votes.
                auto cfg = ConsensusConfig::bft(n);
                cfg.seed = seed;
                Network net(cfg, l.genesis);
                for (auto i : faulty) net.set_behavior(i, NodeBehavior::Byzantine, ByzantineMode::Silent);
                l.feed(net, 3);
                for (std::uint32_t r = 0; r < 3 * n; ++r) net.run_round();
                ++runs;
                const bool confirmed = net.confirmations().size() == 3;
                if (confirmed != (f <= tolerated)) {
                    ++wrong;
                    if (first.empty()) first = "n=" + std::to_string(n) + " f=" + std::to_string(f);
                }
                if (f > tolerated) continue;
                // Safety: equivocators below threshold never split honest nodes.
                Network eq(cfg, l.genesis);
                for (auto i : faulty) eq.set_behavior(i, NodeBehavior::Byzantine, ByzantineMode::Equivocate);
                l.feed(eq, 3);
                for (std::uint32_t r = 0; r < 3 * n; ++r) {
                    eq.run_round();
                    if (!eq.check_persistence()) ++safety;
                }
                safety += static_cast<int>(eq.safety_violations());
                if (eq.confirmations().size() != 3) ++wrong;
            }
        }
    }
    // Majority chain: a coalition share decides which branch reaches k-deep confirmation.
    int branch_wrong = 0;
    for (auto [byz, adversarial_wins] : {std::pair{9u, false}, std::pair{11u, true}}) {
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            auto cfg = ConsensusConfig::majority(20, 3);
            cfg.seed = seed;
            Network net(cfg, l.genesis);
            Rng rng(seed + 5000 + byz);
            for (auto i : pick(rng, 20, byz)) net.set_behavior(i, NodeBehavior::Byzantine, ByzantineMode::Equivocate);
            l.feed(net, 3);
            for (int r = 0; r < 120; ++r) net.run_round();
            if (net.confirmed_height() == 0) {
                ++branch_wrong;
                continue;
            }
            const auto proposer = net.block(net.confirmed_blocks().at(1))->proposer;
            if (net.node(proposer).honest() == adversarial_wins) ++branch_wrong;
            if (!adversarial_wins) safety += static_cast<int>(net.safety_violations());
        }
    }
    Verdict v;
    v.pass = wrong == 0 && safety == 0 && branch_wrong == 0;
    v.detail = std::to_string(runs) + " BFT runs, threshold errors " + std::to_string(wrong) +
               ", majority branch errors " + std::to_string(branch_wrong) + "/200, safety violations " +
               std::to_string(safety) + (first.empty() ? "" : " (first at " + first + ")");
    return v;
}

// ---- 3 ----

Verdict table_reproduction() {
    const auto t0 = std::chrono::steady_clock::now();
    const std::string out = W3SIM_BINARY_DIR "/acceptance_matrix.md";
    const std::string cmd = std::string(W3SIM_CLI) + " matrix --seed 42 --nodes 7 --format markdown --out " + out;
    const int rc = std::system(cmd.c_str());
    const double secs = seconds_since(t0);
    std::ifstream f(out);
    const std::string md((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    Verdict v;
    v.pass = rc == 0 && secs < 120 && md.find("All cells agree") != std::string::npos;
    v.detail = "matrix exit " + std::to_string(rc) + ", " + fmt(secs) + " s";
    return v;
}

// ---- 4 ----

Verdict demo() {
    std::ostringstream out;
    const auto o = run_demo(out, 42);
    const auto text = out.str();
    bool ordered = true;
    std::size_t at = 0;
    for (int i = 1; i <= 5; ++i) {
        auto p = text.find("Π" + std::to_string(i), at);
        if (p == std::string::npos) ordered = false;
        else at = p;
    }
    Verdict v;
    v.pass = o.ok() && ordered;
    v.detail = std::string("supply ") + (o.supply_conserved ? "conserved" : "CHANGED") + ", owner " +
               (o.owner_is_buyer ? "buyer" : "NOT buyer") + ", integrity " +
               (o.integrity_verified ? "verified" : "FAILED") + ", phases " + (ordered ? "in order" : "out of order");
    return v;
}

// ---- 5 ----

Verdict replication() {
    constexpr std::uint32_t nodes = 7;
    OffChainStore store(nodes);
    Rng rng(55);
    std::vector<std::pair<StorageRef, Bytes>> objects;
    for (int i = 0; i < 40; ++i) {
        Bytes data(1 + rng.below(900));
        for (auto& b : data) b = static_cast<std::uint8_t>(rng.below(256));
        objects.emplace_back(store.put(data, OffChainPlan{3}), data);
    }
    int pair_fail = 0, triple_wrong = 0, triples_covering = 0;
    auto all_up = [&] {
        for (std::uint32_t i = 0; i < nodes; ++i) store.set_up(i, true);
    };
    for (const auto& [ref, data] : objects) {
        const auto& where = store.placement(std::get<LinkedRef>(ref).cid);
        for (std::uint32_t a = 0; a < nodes; ++a)
            for (std::uint32_t b = a + 1; b < nodes; ++b) {
                all_up();
                store.set_up(a, false);
                store.set_up(b, false);
                try {
                    if (store.get(ref) != data) ++pair_fail;
                } catch (const Error&) {
                    ++pair_fail;
                }
                for (std::uint32_t c = b + 1; c < nodes; ++c) {
                    store.set_up(c, false);
                    // Oracle: unreachable exactly when the failed set covers every replica.
                    std::set<std::uint32_t> down{a, b, c};
                    bool covered = std::all_of(where.begin(), where.end(), [&](auto n) { return down.contains(n); });
                    triples_covering += covered;
                    bool down_err = false;
                    try {
                        store.get(ref);
                    } catch (const Error& e) {
                        down_err = e.code() == Errc::AllReplicasDown;
                    }
                    if (down_err != covered) ++triple_wrong;
                    store.set_up(c, true);
                }
            }
    }
    all_up();

    // Tamper detection against an on-chain hook.
    ContractState genesis;
    auto owner = fixture::user("acc-owner");
    auto nft = deploy_contract(genesis, {make_contract_id(owner.id(), "nft"), ContractKind::NonFungibleToken,
                                         owner.id(), 0, {}, {}});
    Network net(ConsensusConfig::bft(4), genesis);
    auto [ref, data] = objects.front();
    auto mint = fixture::call(owner, 0, nft, "mint", {encode_u64(1), hook_pointer(ref)});
    net.submit(mint);
    for (int r = 0; r < 4; ++r) net.run_round();
    attach_hook(ref, mint.tx_id, std::nullopt);
    const auto cid = std::get<LinkedRef>(ref).cid;
    int mutations = 0, detected = 0;
    for (int trial = 0; mutations < 1000 && trial < 2000; ++trial) {
        for (auto n : store.placement(cid))
            store.mutate(n, cid, [&](Bytes& b) {
                b = data;
                if (trial % 5 == 0) b.push_back(static_cast<std::uint8_t>(trial));
                else b[rng.below(b.size())] ^= static_cast<std::uint8_t>(1 + rng.below(255));
            });
        auto served = store.get(ref);
        if (served == data) continue;
        ++mutations;
        detected += verify_integrity(ref, served, net) == Integrity::Tampered;
    }
    bool untouched_ok = false;
    for (auto n : store.placement(cid)) store.mutate(n, cid, [&](Bytes& b) { b = data; });
    untouched_ok = verify_integrity(ref, store.get(ref), net) == Integrity::Verified;

    Verdict v;
    v.pass = pair_fail == 0 && triple_wrong == 0 && triples_covering == static_cast<int>(objects.size()) &&
             mutations == 1000 && detected == 1000 && untouched_ok;
    v.detail = "2-node failures unserved " + std::to_string(pair_fail) + ", 3-node oracle disagreements " +
               std::to_string(triple_wrong) + ", tamper detected " + std::to_string(detected) + "/" +
               std::to_string(mutations);
    return v;
}

// ---- 6 ----

Verdict agent_batching() {
    ContractState genesis;
    auto provider = fixture::user("acc-provider");
    auto token = deploy_contract(genesis, {make_contract_id(provider.id(), "ft"), ContractKind::FungibleToken,
                                           provider.id(), 1'000'000, {}, {}});
    const auto user_keys = generate_keypair(to_bytes("acc-batch-user"));
    const auto user_id = derive_address(user_keys.public_key, AddressScheme::Base16Eth).payload;
    execute(genesis, fixture::call(provider, 0, token, "transfer", {to_bytes(user_id), encode_amount(1000)}));

    auto run = [&](AgentBehavior behavior, std::vector<TxId>& emitted, std::vector<OpTicket>& tickets) {
        auto net = std::make_unique<Network>(ConsensusConfig::bft(4), genesis);
        Agent agent(generate_keypair(to_bytes("acc-agent")), 10, 5, behavior);
        WalletClient user(user_keys);
        user.connect_wallet(*net, "acc");
        enroll(*net, user, agent);
        for (int r = 0; r < 4; ++r) net->run_round();
        for (int i = 0; i < 25; ++i)
            tickets.push_back(agent.submit_via_agent(user.address(),
                                                     {token, "transfer", {to_bytes(provider.id()), encode_amount(1)}, {}}));
        for (int tick = 0; tick < 30; ++tick) {
            for (auto id : agent.pump(*net)) emitted.push_back(id);
            net->run_round();
        }
        return net;
    };
    std::vector<TxId> honest_txs, withheld_txs;
    std::vector<OpTicket> honest_ops, withheld_ops;
    auto honest = run(AgentBehavior::Honest, honest_txs, honest_ops);
    auto withheld = run(AgentBehavior::Withholding, withheld_txs, withheld_ops);

    int honest_live = 0, withheld_live = 0;
    for (const auto& t : honest_ops) honest_live += honest->check_liveness(t.op_id, honest->now());
    for (const auto& t : withheld_ops) withheld_live += withheld->check_liveness(t.op_id, withheld->now());
    const bool withholding_hidden_elsewhere =
        withheld->check_persistence() && withheld->safety_violations() == 0 && withheld_txs.size() == 3;

    ScenarioScript s = default_scenario();
    s.repeat = 50;
    auto r1 = run_scenario(type_from_id(1), s, {}, 42, {}, {false});
    auto r7 = run_scenario(type_from_id(7), s, {}, 42, {}, {false});

    Verdict v;
    v.pass = honest_txs.size() == 3 && honest_live == 25 && r7.ops_per_tx > r1.ops_per_tx && withheld_live == 0 &&
             withholding_hidden_elsewhere;
    v.detail = "25 ops -> " + std::to_string(honest_txs.size()) + " txs, ops/tx Type7 " + fmt(r7.ops_per_tx, 2) +
               " vs Type1 " + fmt(r1.ops_per_tx, 2) + ", withheld ops live " + std::to_string(withheld_live) +
               "/25 (persistence " + (withholding_hidden_elsewhere ? "blind" : "NOT blind") + ")";
    return v;
}

// ---- 7 ----

Verdict hybrid_compute() {
    Rng rng(77);
    int diverged = 0, tampered = 0, rejected = 0;
    for (int w = 0; w < 1000; ++w) {
        workload::Market m(4, "acc-hy" + std::to_string(w % 7));
        ContractState pure = m.state;
        for (int k = 0; k < 8; ++k) {
            auto tx = m.random_tx(rng);
            HybridTrace trace;
            auto hy = apply(m.state, tx, execute_hybrid(m.state, tx, {}, {}, &trace), {});
            auto ref = execute(pure, tx, {});
            if (hy.status != ref.status || hy.new_state_root != ref.new_state_root ||
                hy.return_data != ref.return_data || hy.events.size() != ref.events.size())
                ++diverged;
        }
        // Malicious executor planting its write inside the checked region.
        for (int guard = 0; guard < 50; ++guard) {
            auto tx = m.random_tx(rng);
            auto pre = dry_run(m.state, tx, {});
            if (!pre.receipt.success() || pre.writes.empty()) continue;
            HybridTrace trace;
            auto before = m.state.state_root();
            auto rc = apply(m.state, tx,
                            execute_hybrid(m.state, tx, {0.5, ExecutorBehavior::Malicious, TamperRegion::Checked}, {},
                                           &trace),
                            {});
            tampered += trace.tampered;
            rejected += trace.tampered && rc.status == RevertReason::CommitmentMismatch && m.state.state_root() == before;
            break;
        }
    }
    Verdict v;
    v.pass = diverged == 0 && tampered == 1000 && rejected == tampered;
    v.detail = "honest divergences " + std::to_string(diverged) + "/8000 txs, checked tampering rejected " +
               std::to_string(rejected) + "/" + std::to_string(tampered);
    return v;
}

// ---- 8 ----

std::string base58_long_division(const Bytes& in) {
    static const char* alphabet = "123456789ABCDEFGHJKLMNPQRSTUVWXYZabcdefghijkmnopqrstuvwxyz";
    std::vector<int> num(in.begin(), in.end());
    std::string digits;
    std::size_t start = 0;
    while (start < num.size() && num[start] == 0) ++start;
    for (std::size_t s = start; s < num.size();) {
        int rem = 0;
        for (std::size_t i = s; i < num.size(); ++i) {
            int cur = rem * 256 + num[i];
            num[i] = cur / 58;
            rem = cur % 58;
        }
        digits.push_back(alphabet[rem]);
        while (s < num.size() && num[s] == 0) ++s;
    }
    std::string out(start, '1');
    out.append(digits.rbegin(), digits.rend());
    return out;
}

Verdict encoding_vectors() {
    int bad = 0;
    bad += encode_base58({}) != "";
    bad += encode_base58(Bytes{0}) != "1";
    bad += encode_base58(Bytes{0, 0, 1}) != "112";
    bad += base58_long_division(Bytes{0, 0, 1}) != "112";
    Rng rng(88);
    int checked = 0;
    for (int i = 0; i < 10'000; ++i) {
        Bytes b(rng.below(40));
        for (auto& x : b) x = static_cast<std::uint8_t>(rng.below(4) == 0 ? 0 : rng.below(256));
        const auto e58 = encode_base58(b);
        bad += e58 != base58_long_division(b);
        bad += decode_base58(e58) != b;
        bad += decode_base16(encode_base16(b)) != b;
        ++checked;
    }
    Verdict v;
    v.pass = bad == 0;
    v.detail = "fixed vectors + " + std::to_string(checked) + " random strings, disagreements " + std::to_string(bad);
    return v;
}

// ---- 9 ----

Verdict determinism() {
    const std::vector<std::string> flag_sets = {
        "--type 1 --seed 42",
        "--type 11 --seed 7 --nodes 10",
        "--tuple A2,B2,C3 --faults " W3SIM_SOURCE_DIR "/configs/byzantine.ini",
        "--type 6 --scenario " W3SIM_SOURCE_DIR "/scenarios/busy_market.txt --format markdown",
    };
    int differ = 0, failed = 0;
    for (std::size_t i = 0; i < flag_sets.size(); ++i) {
        std::string bodies[2];
        for (int k = 0; k < 2; ++k) {
            const std::string path = W3SIM_BINARY_DIR "/acceptance_det_" + std::to_string(i) + "_" + std::to_string(k);
            const std::string cmd = std::string(W3SIM_CLI) + " simulate " + flag_sets[i] + " --out " + path;
            if (std::system(cmd.c_str()) != 0) ++failed;
            std::ifstream f(path, std::ios::binary);
            bodies[k].assign(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
        }
        differ += bodies[0] != bodies[1] || bodies[0].empty();
    }
    Verdict v;
    v.pass = differ == 0 && failed == 0;
    v.detail = std::to_string(flag_sets.size()) + " flag sets run twice, differing " + std::to_string(differ) +
               ", failed runs " + std::to_string(failed);
    return v;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
        {"secure retrieval", secure_retrieval}, {"BFT thresholds", bft_thresholds},
        {"table reproduction", table_reproduction}, {"demo", demo},
        {"replication", replication},           {"agent batching", agent_batching},
        {"hybrid compute", hybrid_compute},     {"encoding vectors", encoding_vectors},
        {"determinism", determinism},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        failures += !v.pass;
        std::cout << (v.pass ? "PASS" : "FAIL") << "  " << (i + 1) << ". " << criteria[i].first << ": " << v.detail
                  << std::endl;
    }
    return failures;
}
