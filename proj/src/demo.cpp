#include <ostream>

#include "driver.hpp"

namespace w3sim {

namespace {

void banner(std::ostream& out, int phase, std::string_view title) {
    out << "\n== Π" << phase << " " << title << " ==\n";
}

std::string short_hex(const Digest& d) { return hex(ByteView(d.data(), 8)) + "…"; }

}  // namespace

DemoOutcome run_demo(std::ostream& out, std::uint64_t seed) {
    const auto arch = type_from_tuple(Access::A1, Compute::B1, StorageKind::C2);
    SimConfig sim;
    sim.consensus = ConsensusConfig::bft(4);
    detail::Stack st(arch, sim, FaultPlan{}, seed);
    const std::string seller = "alice", buyer = "bob";
    const Amount price = 250;
    const std::uint64_t token_id = 1;

    banner(out, 1, "Identity Creation");
    st.start({seller, buyer}, 1'000);
    for (const auto& who : {seller, buyer}) {
        const auto& w = st.wallet(who);
        out << who << "  " << w.address().text << "  (base58 "
            << address_of(w.address().payload, AddressScheme::Base58Btc).text << ")\n";
    }
    out << "architecture " << arch.name() << " " << arch.tuple_string() << ", "
        << st.net->size() << " maintainers\n";

    const auto alice = st.wallet(seller).address().payload;
    const auto bob = st.wallet(buyer).address().payload;
    const auto supply_of = [&](const ContractState& s) {
        return balance_of(s, st.token, alice) + balance_of(s, st.token, bob) + balance_of(s, st.token, st.provider);
    };
    const Amount supply_before = supply_of(st.genesis);

    banner(out, 2, "Transaction Generation");
    st.connect(seller);
    st.connect(buyer);
    Bytes artwork(4096);
    Rng rng(Rng::mix(seed, 7));
    for (auto& b : artwork) b = static_cast<std::uint8_t>(rng.below(256));
    StorageRef ref = st.store->put(artwork, st.topo.plan);
    out << "artwork 4096 bytes stored off-chain, cid " << hex(std::get<LinkedRef>(ref).cid.digest) << "\n";
    out << "replicas on nodes";
    for (auto n : st.store->placement(std::get<LinkedRef>(ref).cid)) out << " " << n;
    out << "\n";
    const auto mint = st.submit(seller, st.nft, "mint", {encode_u64(token_id), hook_pointer(ref)}, hook_inline(ref));
    const auto list = st.submit(seller, st.market, "list", {encode_u64(token_id), encode_amount(price)});
    const auto buy = st.submit(buyer, st.market, "buy", {encode_u64(token_id), encode_amount(price)});
    out << "mint tx " << short_hex(*mint.tx) << "  (CID hook)\n";
    out << "list tx " << short_hex(*list.tx) << "  price " << amount_to_string(price) << "\n";
    out << "buy  tx " << short_hex(*buy.tx) << "\n";

    banner(out, 3, "Contract Execution");
    // Local preview against the confirmed state, before any block exists.
    ContractState preview = st.genesis;
    for (const auto& c : st.net->confirmations()) execute(preview, c.tx, {st.topo.config.consensus.gas, {}});
    Digest preview_root{};
    for (const auto& id : {*mint.tx, *list.tx, *buy.tx}) {
        const auto* tx = st.net->pooled(id);
        if (!tx) continue;
        auto rc = execute(preview, *tx, {st.topo.config.consensus.gas, {}});
        preview_root = rc.new_state_root;
        out << tx->payload.method << ": " << to_string(rc.status) << ", gas " << rc.gas_used;
        for (const auto& e : rc.events) out << ", " << e.name;
        out << "\n";
    }

    banner(out, 4, "State Consensus");
    st.settle(50);
    st.index_confirmations();
    for (const auto* s : {&mint, &list, &buy}) {
        auto c = st.net->find_confirmed(*s->tx);
        if (!c) {
            out << short_hex(*s->tx) << " not confirmed\n";
            continue;
        }
        out << c->tx.payload.method << " confirmed at height " << c->height << ", tick " << c->tick << ", "
            << to_string(c->receipt.status) << "\n";
    }
    const auto obs = st.net->observer();
    const auto& final_state = st.net->node(*obs).state;
    out << "state root " << hex(final_state.state_root())
        << (final_state.state_root() == preview_root ? "  (matches preview)" : "  (differs from preview)") << "\n";

    banner(out, 5, "Data Retrieval");
    DemoOutcome o;
    auto view = retrieve_state(*st.net, *obs, bob, st.nft);
    out << "buyer's latest NFT state from tx " << short_hex(view.tx.tx_id) << " at height " << view.height << "\n";
    auto owner = owner_of(final_state, st.nft, token_id);
    o.owner_is_buyer = owner && *owner == bob;
    out << "owner of token " << token_id << ": " << (owner ? address_of(*owner, AddressScheme::Base16Eth).text : "none")
        << (o.owner_is_buyer ? "  (buyer)" : "") << "\n";
    const Amount supply_after = supply_of(final_state);
    o.supply_conserved = supply_after == supply_before && total_supply(final_state, st.token) == supply_before;
    out << "balances: seller " << amount_to_string(balance_of(final_state, st.token, alice)) << ", buyer "
        << amount_to_string(balance_of(final_state, st.token, bob)) << "; supply "
        << amount_to_string(supply_after) << (o.supply_conserved ? " conserved" : " CHANGED") << "\n";
    attach_hook(ref, *mint.tx, std::nullopt);
    auto fetched = st.store->get(ref);
    auto integrity = verify_integrity(ref, fetched, *st.net);
    o.integrity_verified = integrity == Integrity::Verified;
    out << "artwork fetched (" << fetched.size() << " bytes), integrity " << to_string(integrity) << "\n";
    out << "\n" << (o.ok() ? "demo ok" : "demo FAILED") << "\n";
    return o;
}

}  // namespace w3sim
