#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "w3sim/access.hpp"
#include "w3sim/error.hpp"
#include "w3sim/storage.hpp"

using namespace w3sim;

namespace {

template <class F>
Errc error_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return Errc::Malformed;
}

class AccessTest : public ::testing::Test {
protected:
    void SetUp() override {
        auto deployer = fixture::user("ac-deployer");
        token = deploy_contract(genesis, {make_contract_id(deployer.id(), "ft"), ContractKind::FungibleToken,
                                          alice.address().payload, 1'000'000, {}, {}});
        net = std::make_unique<Network>(ConsensusConfig::bft(4), genesis);
    }

    TxPayload transfer_to(const WalletClient& to, Amount amt) const {
        return {token, "transfer", {to_bytes(to.address().payload), encode_amount(amt)}, {}};
    }
    void settle(int rounds = 3) {
        for (int i = 0; i < rounds; ++i) net->run_round();
    }

    WalletClient alice{generate_keypair(to_bytes("ac-alice"))};
    WalletClient bob{generate_keypair(to_bytes("ac-bob"))};
    ContractState genesis;
    ContractId token{};
    std::unique_ptr<Network> net;
};

}  // namespace

TEST_F(AccessTest, SubmitRequiresSession) {
    EXPECT_EQ(error_of([&] { alice.submit_direct(*net, bob.address(), transfer_to(bob, 1)); }), Errc::NotConnected);
    alice.connect_wallet(*net, "nft-market");
    EXPECT_NO_THROW(alice.submit_direct(*net, bob.address(), transfer_to(bob, 1)));
}

TEST_F(AccessTest, ConnectIsIdempotent) {
    auto a = alice.connect_wallet(*net, "svc");
    auto b = alice.connect_wallet(*net, "svc");
    EXPECT_EQ(a, b);
    EXPECT_TRUE(alice.connected());
}

TEST_F(AccessTest, OneTransactionPerRequest) {
    alice.connect_wallet(*net, "svc");
    for (int i = 0; i < 7; ++i) alice.submit_direct(*net, bob.address(), transfer_to(bob, 1));
    EXPECT_EQ(net->pending(), 7u);
    settle();
    EXPECT_EQ(net->confirmations().size(), 7u);
    EXPECT_EQ(balance_of(net->node(0).state, token, bob.address().payload), 7);
}

TEST_F(AccessTest, KeyRotationWithoutReconnectSurfacesInvalidSignature) {
    alice.connect_wallet(*net, "svc");
    alice.rotate_key(to_bytes("ac-alice-rotated"));
    EXPECT_EQ(error_of([&] { alice.submit_direct(*net, bob.address(), transfer_to(bob, 1)); }),
              Errc::InvalidSignature);
    EXPECT_EQ(net->pending(), 0u);
}

TEST_F(AccessTest, InlineCapSurfaces) {
    alice.connect_wallet(*net, "svc");
    auto p = transfer_to(bob, 1);
    p.inline_data = Bytes(kInlineCap + 1, 7);
    EXPECT_EQ(error_of([&] { alice.submit_direct(*net, bob.address(), p); }), Errc::InlineTooLarge);
}

TEST_F(AccessTest, DuplicateSurfacesFromPool) {
    alice.connect_wallet(*net, "svc");
    auto cfg = ConsensusConfig::bft(4);
    cfg.pool_capacity = 1;
    Network small(cfg, genesis);
    alice.submit_direct(small, bob.address(), transfer_to(bob, 1));
    EXPECT_EQ(error_of([&] { alice.submit_direct(small, bob.address(), transfer_to(bob, 2)); }), Errc::PoolFull);
}

TEST_F(AccessTest, RetrieveBeforeConfirmation) {
    EXPECT_EQ(error_of([&] { retrieve_state(*net, 0, bob.address().payload, token); }), Errc::NoConfirmedState);
}

TEST_F(AccessTest, RetrieveReturnsConfirmedPair) {
    alice.connect_wallet(*net, "svc");
    auto id = alice.submit_direct(*net, bob.address(), transfer_to(bob, 42));
    settle();
    auto conf = net->find_confirmed(id);
    ASSERT_TRUE(conf);
    auto got = retrieve_state(*net, 0, bob.address().payload, token);
    EXPECT_EQ(got.tx.tx_id, id);
    EXPECT_EQ(got.receipt.new_state_root, conf->receipt.new_state_root);
    ASSERT_EQ(got.view.size(), 1u);
    EXPECT_EQ(decode_amount(got.view.begin()->second), 42);
    for (std::uint32_t n = 1; n < net->size(); ++n) EXPECT_EQ(retrieve_state(*net, n, bob.address().payload, token), got);
}

TEST_F(AccessTest, NewerConfirmationSupersedes) {
    alice.connect_wallet(*net, "svc");
    alice.submit_direct(*net, bob.address(), transfer_to(bob, 1));
    settle();
    auto second = alice.submit_direct(*net, bob.address(), transfer_to(bob, 2));
    settle();
    auto got = retrieve_state(*net, 0, bob.address().payload, token);
    EXPECT_EQ(got.tx.tx_id, second);
    EXPECT_EQ(decode_amount(got.view.begin()->second), 3);
}

class AgentTest : public AccessTest {
protected:
    void SetUp() override {
        AccessTest::SetUp();
        alice.connect_wallet(*net, "svc");
    }
    UserOp pay(const WalletClient& to, Amount amt) const {
        return {token, "transfer", {to_bytes(to.address().payload), encode_amount(amt)}};
    }
};

TEST_F(AgentTest, UnregisteredUserRejected) {
    Agent agent(generate_keypair(to_bytes("ac-agent")));
    EXPECT_EQ(error_of([&] { agent.submit_via_agent(alice.address(), pay(bob, 1)); }), Errc::UnregisteredUser);
}

TEST_F(AgentTest, TenOpsOneTransaction) {
    Agent agent(generate_keypair(to_bytes("ac-agent")), 10);
    enroll(*net, alice, agent);
    settle();
    for (int i = 0; i < 10; ++i) agent.submit_via_agent(alice.address(), pay(bob, 1));
    EXPECT_EQ(agent.pump(*net).size(), 1u);
    settle();
    EXPECT_EQ(agent.transactions_emitted(), 1u);
    EXPECT_EQ(balance_of(net->node(0).state, token, bob.address().payload), 10);
}

TEST_F(AgentTest, TwentyFiveOpsThreeTransactions) {
    Agent agent(generate_keypair(to_bytes("ac-agent")), 10, 5);
    enroll(*net, alice, agent);
    settle();
    std::vector<OpTicket> tickets;
    for (int i = 0; i < 25; ++i) {
        tickets.push_back(agent.submit_via_agent(alice.address(), pay(bob, 1)));
        agent.pump(*net);
    }
    EXPECT_EQ(agent.transactions_emitted(), 2u);
    EXPECT_EQ(agent.buffered(), 5u);
    net->run_round();
    agent.pump(*net);  // flush_interval elapsed
    settle();
    EXPECT_EQ(agent.transactions_emitted(), 3u);
    for (const auto& t : tickets) EXPECT_TRUE(net->check_liveness(t.op_id, net->now()));
    EXPECT_EQ(balance_of(net->node(0).state, token, bob.address().payload), 25);

    // Only the agent ever appears as an on-chain sender of bundles.
    for (const auto& c : net->confirmations())
        if (c.tx.payload.method == "multicall") EXPECT_EQ(c.tx.metadata.sender, agent.address());
}

TEST_F(AgentTest, BatchingConservesOps) {
    WalletClient carol{generate_keypair(to_bytes("ac-carol"))};
    carol.connect_wallet(*net, "svc");
    alice.submit_direct(*net, carol.address(), transfer_to(carol, 500));
    Agent agent(generate_keypair(to_bytes("ac-agent")), 4);
    enroll(*net, alice, agent);
    enroll(*net, carol, agent);
    settle();
    std::multiset<Digest> submitted, executed;
    Rng rng(9);
    for (int i = 0; i < 30; ++i) {
        auto& who = rng.bernoulli(0.5) ? alice : carol;
        submitted.insert(agent.submit_via_agent(who.address(), pay(bob, 1 + rng.below(5))).op_id);
        agent.pump(*net);
    }
    agent.flush(*net);
    agent.flush(*net);
    settle(4);
    for (const auto& c : net->confirmations())
        for (const auto& op : c.receipt.ops) {
            EXPECT_EQ(op.status, RevertReason::None);
            executed.insert(op.op_id);
        }
    EXPECT_EQ(submitted, executed);
}

TEST_F(AgentTest, WithholdingOnlyVisibleToLiveness) {
    Agent agent(generate_keypair(to_bytes("ac-agent")), 3, 5, AgentBehavior::Withholding);
    enroll(*net, alice, agent);
    settle();
    std::vector<OpTicket> tickets;
    for (int i = 0; i < 6; ++i) tickets.push_back(agent.submit_via_agent(alice.address(), pay(bob, 1)));
    std::vector<TxId> ids;
    EXPECT_NO_THROW(ids = agent.pump(*net));
    EXPECT_EQ(ids.size(), 2u);  // looks like a normal flush
    settle(10);
    for (const auto& t : tickets) EXPECT_FALSE(net->check_liveness(t.op_id, net->now()));
    EXPECT_TRUE(net->check_persistence());
    EXPECT_EQ(net->safety_violations(), 0u);
}
