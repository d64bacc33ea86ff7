#include <set>

#include "driver.hpp"
#include "w3sim/error.hpp"

namespace w3sim {

RetrievalAudit audit_retrieval(const ArchitectureType& arch, std::uint64_t min_confirmed, std::uint64_t seed,
                               const SimConfig& sim) {
    detail::Stack st(arch, sim, FaultPlan{}, seed);
    std::vector<std::string> names;
    for (int i = 0; i < 6; ++i) names.push_back("audit-" + std::to_string(i));
    st.start(names, 1'000'000);
    for (const auto& n : names) st.connect(n);

    // Independent replica: pure execution of the confirmed order.
    ContractState replica = st.genesis;
    const ExecEnv env{st.topo.config.consensus.gas, {}};
    std::map<std::pair<AccountId, ContractId>, TxId> latest;
    std::map<TxId, Digest> root_after;

    Rng rng(Rng::mix(seed, 41));
    std::uint64_t next_token = 0;
    std::vector<std::pair<std::string, std::uint64_t>> owned;  // believed owner per minted token
    std::vector<std::uint64_t> listed;
    RetrievalAudit out;

    auto account = [&](const std::string& n) { return st.wallet(n).address().payload; };
    auto submit_random = [&] {
        const auto& who = names[rng.below(names.size())];
        const auto& other = names[rng.below(names.size())];
        switch (rng.below(7)) {
            case 6:
                st.submit(who, st.token, "transferFrom",
                          {to_bytes(account(other)), to_bytes(account(who)), encode_amount(rng.below(20))});
                break;
            case 0:
            case 1:
                st.submit(who, st.token, "transfer", {to_bytes(account(other)), encode_amount(rng.below(50))});
                break;
            case 2:
                st.submit(who, st.token, "approve", {to_bytes(account(other)), encode_amount(rng.below(50))});
                break;
            case 3: {
                Bytes data(1 + rng.below(kInlineCap));
                for (auto& b : data) b = static_cast<std::uint8_t>(rng.below(256));
                StorageRef ref = InlineRef{data, std::nullopt, std::nullopt};
                if (!st.inline_route(data.size())) ref = st.store->put(data, st.topo.plan);
                auto id = next_token++;
                st.submit(who, st.nft, "mint", {encode_u64(id), hook_pointer(ref)}, hook_inline(ref));
                owned.emplace_back(who, id);
                break;
            }
            case 4: {
                if (owned.empty()) return;
                auto [owner, id] = owned[rng.below(owned.size())];
                st.submit(owner, st.market, "list", {encode_u64(id), encode_amount(5)});
                listed.push_back(id);
                break;
            }
            default: {
                if (listed.empty()) return;
                auto id = listed[rng.below(listed.size())];
                st.submit(who, st.market, "buy", {encode_u64(id), encode_amount(5)});
                break;
            }
        }
    };

    auto check = [&](const std::pair<AccountId, ContractId>& key, std::uint32_t node) {
        ++out.checks;
        const auto& want_tx = latest.at(key);
        try {
            auto got = retrieve_state(*st.net, node, key.first, key.second);
            if (got.tx.tx_id == want_tx && got.view == replica.account_view(key.first, key.second) &&
                got.receipt.new_state_root == root_after.at(want_tx)) {
                ++out.exact;
                return;
            }
        } catch (const Error& e) {
            out.failures.push_back(std::string("node ") + std::to_string(node) + ": " + e.what());
            return;
        }
        if (out.failures.size() < 20)
            out.failures.push_back("node " + std::to_string(node) + " disagrees on " + hex(key.first) + "/" +
                                   hex(key.second));
    };

    for (std::uint64_t round = 0; out.confirmed < min_confirmed && round < 100'000; ++round) {
        for (int i = 0; i < 40; ++i) submit_random();
        auto confirmed = st.step();
        std::set<std::pair<AccountId, ContractId>> touched_now;
        for (const auto& c : confirmed) {
            auto rc = execute(replica, c.tx, env);
            if (rc.new_state_root != c.receipt.new_state_root && out.failures.size() < 20)
                out.failures.push_back("replica diverged at " + hex(c.tx.tx_id));
            root_after[c.tx.tx_id] = rc.new_state_root;
            for (const auto& k : rc.touched) {
                latest[k] = c.tx.tx_id;
                touched_now.insert(k);
            }
            if (st.grant_txs.contains(c.tx.tx_id)) continue;
            out.confirmed += c.tx.payload.method == "multicall" ? c.receipt.ops.size() : 1;
        }
        for (std::uint32_t n = 0; n < st.net->size(); ++n) {
            if (!st.net->node(n).honest() || !st.net->node(n).up(st.net->now())) continue;
            for (const auto& k : touched_now) check(k, n);
        }
        // Older confirmations must still read back until superseded.
        if (round % 10 == 9)
            if (auto obs = st.net->observer())
                for (const auto& [k, tx] : latest) check(k, *obs);
    }
    st.settle(1000);
    return out;
}

}  // namespace w3sim
