#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "w3sim/consensus.hpp"
#include "w3sim/error.hpp"

using namespace w3sim;
using fixture::call;

namespace {

struct World {
    fixture::User alice = fixture::user("cs-alice");
    fixture::User bob = fixture::user("cs-bob");
    ContractState genesis;
    ContractId token{};

    World() {
        token = deploy_contract(genesis, {make_contract_id(alice.id(), "ft"), ContractKind::FungibleToken,
                                          alice.id(), 1'000'000, {}, {}});
    }

    Transaction transfer(std::uint64_t nonce, Amount amt = 1) const {
        return call(alice, nonce, token, "transfer", {Bytes(bob.id().begin(), bob.id().end()), encode_amount(amt)});
    }
};

void feed(Network& net, const World& w, std::uint64_t count, std::uint64_t first_nonce = 0) {
    for (std::uint64_t i = 0; i < count; ++i) ASSERT_EQ(net.submit(w.transfer(first_nonce + i)), SubmitStatus::Accepted);
}

std::uint32_t bft_confirmable_max_faults(std::uint32_t n) {
    // Independent restatement: honest votes n - f must reach ceil(2n/3).
    std::uint32_t q = (2 * n + 2) / 3;
    return n - q;
}

}  // namespace

TEST(Consensus, QuorumArithmetic) {
    EXPECT_EQ(ConsensusConfig::bft(4).quorum(), 3u);
    EXPECT_EQ(ConsensusConfig::bft(7).quorum(), 5u);
    EXPECT_EQ(ConsensusConfig::bft(9).quorum(), 6u);
    EXPECT_EQ(ConsensusConfig::bft(10).quorum(), 7u);
    EXPECT_EQ(ConsensusConfig::majority(9, 3).majority_holders(), 5u);
    EXPECT_EQ(ConsensusConfig::majority(20, 3).majority_holders(), 11u);
}

TEST(Consensus, ConfigValidation) {
    auto c = ConsensusConfig::bft(4);
    c.fraction = 0;
    EXPECT_THROW(c.validate(), Error);
    c = ConsensusConfig::bft(0);
    EXPECT_THROW(c.validate(), Error);
    c = ConsensusConfig::bft(4);
    c.fraction = 1.0;
    EXPECT_NO_THROW(c.validate());
}

TEST(Consensus, SubmitStatuses) {
    World w;
    auto cfg = ConsensusConfig::bft(4);
    cfg.pool_capacity = 3;
    Network net(cfg, w.genesis);
    EXPECT_EQ(net.submit(w.transfer(0)), SubmitStatus::Accepted);
    EXPECT_EQ(net.submit(w.transfer(0)), SubmitStatus::DuplicateTx);
    EXPECT_EQ(net.submit(w.transfer(1)), SubmitStatus::Accepted);
    EXPECT_EQ(net.submit(w.transfer(2)), SubmitStatus::Accepted);
    EXPECT_EQ(net.submit(w.transfer(3)), SubmitStatus::PoolFull);
    EXPECT_EQ(net.pending(), 3u);
}

TEST(Consensus, BftOneSilentOfFourConfirms) {
    World w;
    Network net(ConsensusConfig::bft(4), w.genesis);
    net.set_behavior(1, NodeBehavior::Byzantine, ByzantineMode::Silent);
    feed(net, w, 5);
    for (int r = 0; r < 8; ++r) net.run_round();
    EXPECT_EQ(net.confirmations().size(), 5u);
    EXPECT_EQ(net.pending(), 0u);
    EXPECT_EQ(balance_of(net.node(0).state, w.token, w.bob.id()), 5);
    EXPECT_EQ(net.safety_violations(), 0u);
}

TEST(Consensus, BftTwoSilentOfFourNeverConfirms) {
    World w;
    Network net(ConsensusConfig::bft(4), w.genesis);
    net.set_behavior(1, NodeBehavior::Byzantine, ByzantineMode::Silent);
    net.set_behavior(2, NodeBehavior::Byzantine, ByzantineMode::Silent);
    feed(net, w, 5);
    for (int r = 0; r < 40; ++r) EXPECT_TRUE(net.run_round().empty());
    EXPECT_EQ(net.confirmed_height(), 0u);
    auto id = w.transfer(0).tx_id;
    EXPECT_FALSE(net.check_liveness(id, UINT64_MAX));
}

TEST(Consensus, BftThresholdSweep) {
    for (std::uint32_t n : {4u, 7u, 10u}) {
        for (std::uint32_t f = 0; f <= n / 2; ++f) {
            World w;
            Network net(ConsensusConfig::bft(n), w.genesis);
            for (std::uint32_t i = 0; i < f; ++i) net.set_behavior(i, NodeBehavior::Byzantine, ByzantineMode::Silent);
            feed(net, w, 3);
            for (std::uint32_t r = 0; r < 3 * n; ++r) net.run_round();
            bool expect = f <= bft_confirmable_max_faults(n);
            EXPECT_EQ(net.confirmations().size() == 3, expect) << "n=" << n << " f=" << f;
            EXPECT_EQ(net.safety_violations(), 0u);
        }
    }
}

TEST(Consensus, MajorityNineWithFourEquivocatorsConfirmsHonestBranch) {
    World w;
    auto cfg = ConsensusConfig::majority(9, 3);
    cfg.seed = 7;
    Network net(cfg, w.genesis);
    for (std::uint32_t i = 5; i < 9; ++i) net.set_behavior(i, NodeBehavior::Byzantine, ByzantineMode::Equivocate);
    feed(net, w, 4);
    std::uint64_t rounds = 0;
    while (net.confirmed_height() == 0 && rounds < 200) {
        net.run_round();
        ++rounds;
    }
    ASSERT_GE(net.confirmed_height(), 1u);
    // The first confirmed block sits 3 deep on the honest tip.
    const auto& honest = net.node(0);
    ASSERT_GE(honest.chain.size(), 2u);
    EXPECT_EQ(net.confirmed_blocks().at(1), honest.chain[1].hash());
    EXPECT_LT(honest.chain[1].proposer, 5u);
    for (int r = 0; r < 300; ++r) net.run_round();
    EXPECT_EQ(net.confirmations().size(), 4u);
    EXPECT_EQ(net.safety_violations(), 0u);
}

TEST(Consensus, MajorityShareDecidesWinningBranch) {
    for (auto [byz, coalition_wins] : {std::pair{9u, false}, std::pair{11u, true}}) {
        World w;
        auto cfg = ConsensusConfig::majority(20, 3);
        Network net(cfg, w.genesis);
        for (std::uint32_t i = 0; i < byz; ++i) net.set_behavior(i, NodeBehavior::Byzantine, ByzantineMode::Equivocate);
        for (int r = 0; r < 120; ++r) net.run_round();
        ASSERT_GE(net.confirmed_height(), 1u);
        auto proposer = net.block(net.confirmed_blocks().at(1))->proposer;
        EXPECT_EQ(proposer < byz, coalition_wins);
        EXPECT_EQ(net.safety_violations(), 0u);
    }
}

TEST(Consensus, PersistenceAllHonest) {
    World w;
    Network net(ConsensusConfig::bft(7), w.genesis);
    feed(net, w, 20);
    for (int r = 0; r < 10; ++r) net.run_round();
    EXPECT_TRUE(net.check_persistence());
    EXPECT_EQ(net.confirmed_height(), 10u);
}

TEST(Consensus, PersistenceWithCrashedNode) {
    World w;
    Network net(ConsensusConfig::bft(7), w.genesis);
    net.set_behavior(3, NodeBehavior::Crashed);
    feed(net, w, 20);
    for (int r = 0; r < 14; ++r) net.run_round();
    EXPECT_TRUE(net.check_persistence());
    EXPECT_EQ(net.confirmations().size(), 20u);
    EXPECT_EQ(net.node(3).chain.size(), 1u);
}

TEST(Consensus, PersistenceUnderEquivocationBelowQuorum) {
    World w;
    Network net(ConsensusConfig::bft(7), w.genesis);
    net.set_behavior(0, NodeBehavior::Byzantine, ByzantineMode::Equivocate);
    net.set_behavior(4, NodeBehavior::Byzantine, ByzantineMode::Equivocate);
    feed(net, w, 20);
    for (int r = 0; r < 30; ++r) {
        net.run_round();
        ASSERT_TRUE(net.check_persistence());
    }
    EXPECT_EQ(net.safety_violations(), 0u);
    EXPECT_EQ(net.confirmations().size(), 20u);
}

TEST(Consensus, LivenessProbes) {
    World w;
    Network net(ConsensusConfig::bft(4), w.genesis);
    feed(net, w, 1);
    auto id = w.transfer(0).tx_id;
    EXPECT_FALSE(net.check_liveness(id, 0));
    for (int r = 0; r < 3; ++r) net.run_round();
    EXPECT_TRUE(net.check_liveness(id, 1'000'000));
    EXPECT_FALSE(net.check_liveness(id, 0));
    EXPECT_FALSE(net.check_liveness(Digest{}, 1'000'000));
}

TEST(Consensus, WithholdingProposerIsBypassed) {
    World w;
    Network net(ConsensusConfig::bft(4), w.genesis);
    net.set_behavior(0, NodeBehavior::Byzantine, ByzantineMode::Withhold);
    feed(net, w, 3);
    net.run_round();  // round 0 belongs to the withholder
    EXPECT_TRUE(net.confirmations().empty());
    EXPECT_EQ(net.confirmed_height(), 1u);
    for (int r = 0; r < 4; ++r) net.run_round();
    EXPECT_EQ(net.confirmations().size(), 3u);
}

TEST(Consensus, SafetyAcrossSeeds) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        World w;
        auto cfg = ConsensusConfig::bft(7);
        cfg.seed = seed;
        cfg.crash_prob = 0.002;
        Network bft(cfg, w.genesis);
        bft.set_behavior(seed % 7, NodeBehavior::Byzantine, ByzantineMode::Equivocate);
        bft.set_behavior((seed + 3) % 7, NodeBehavior::Byzantine, ByzantineMode::Equivocate);
        feed(bft, w, 10);
        for (int r = 0; r < 20; ++r) bft.run_round();
        EXPECT_EQ(bft.safety_violations(), 0u) << "bft seed " << seed;
        EXPECT_TRUE(bft.check_persistence());

        auto mc = ConsensusConfig::majority(20, 3);
        mc.seed = seed;
        Network chain(mc, w.genesis);
        for (std::uint32_t i = 0; i < 9; ++i) chain.set_behavior(i, NodeBehavior::Byzantine, ByzantineMode::Equivocate);
        feed(chain, w, 10);
        for (int r = 0; r < 40; ++r) chain.run_round();
        EXPECT_EQ(chain.safety_violations(), 0u) << "chain seed " << seed;
    }
}

TEST(Consensus, HonestLogsAreLinearizable) {
    World w;
    auto cfg = ConsensusConfig::bft(7);
    cfg.crash_prob = 0.003;
    Network net(cfg, w.genesis);
    feed(net, w, 40);
    for (int r = 0; r < 60; ++r) net.run_round();
    std::vector<TxId> reference;
    for (const auto& c : net.confirmations()) reference.push_back(c.tx.tx_id);
    for (std::uint32_t i = 0; i < net.size(); ++i) {
        std::vector<TxId> log;
        for (const auto& b : net.node(i).chain)
            for (const auto& tx : b.txs) log.push_back(tx.tx_id);
        ASSERT_LE(log.size(), reference.size());
        EXPECT_TRUE(std::equal(log.begin(), log.end(), reference.begin())) << "node " << i;
    }
}

TEST(Consensus, DeterministicChain) {
    auto run = [] {
        World w;
        auto cfg = ConsensusConfig::majority(9, 3);
        cfg.seed = 99;
        cfg.crash_prob = 0.001;
        Network net(cfg, w.genesis);
        net.set_behavior(2, NodeBehavior::Byzantine, ByzantineMode::Withhold);
        feed(net, w, 15);
        for (int r = 0; r < 60; ++r) net.run_round();
        return net.dump_chain(*net.observer());
    };
    auto a = run();
    EXPECT_FALSE(a.empty());
    EXPECT_EQ(a, run());
}

TEST(Consensus, ChainDumpIsNdjson) {
    World w;
    Network net(ConsensusConfig::bft(4), w.genesis);
    feed(net, w, 2);
    net.run_round();
    auto dump = net.dump_chain(0);
    EXPECT_EQ(std::count(dump.begin(), dump.end(), '\n'), 2);
    EXPECT_NE(dump.find("\"height\":1"), std::string::npos);
}
