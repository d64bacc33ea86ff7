#include "w3sim/contract_vm.hpp"

#include <algorithm>
#include <set>

#include "json.hpp"

#include "w3sim/digest.hpp"
#include "w3sim/error.hpp"

namespace w3sim {

namespace {

constexpr ContractId kZeroId{};

struct Revert {
    RevertReason reason;
};

Bytes skey(std::uint8_t tag) { return Bytes{tag}; }

Bytes skey(std::uint8_t tag, const AccountId& a) {
    Bytes k{tag};
    k.insert(k.end(), a.begin(), a.end());
    return k;
}

Bytes skey(std::uint8_t tag, const AccountId& a, const AccountId& b) {
    Bytes k = skey(tag, a);
    k.insert(k.end(), b.begin(), b.end());
    return k;
}

Bytes skey(std::uint8_t tag, std::uint64_t id) {
    Bytes k{tag};
    auto e = encode_u64(id);
    k.insert(k.end(), e.begin(), e.end());
    return k;
}

Bytes skey(std::uint8_t tag, const AccountId& a, std::uint64_t id) {
    Bytes k = skey(tag, a);
    auto e = encode_u64(id);
    k.insert(k.end(), e.begin(), e.end());
    return k;
}

bool account_scoped(std::uint8_t tag) {
    return tag == keys::kBalance || tag == keys::kAllowance || tag == keys::kHolding ||
           tag == keys::kSellerListing;
}

std::string acct_str(const AccountId& a) { return "0x" + hex(a); }

Bytes encode_def(const ContractDef& d) {
    return ByteWriter()
        .u8(static_cast<std::uint8_t>(d.kind))
        .field(d.deployer)
        .u128(d.supply)
        .field(d.nft_contract)
        .field(d.payment_token)
        .bytes();
}

ContractDef decode_def(const ContractId& id, ByteView b) {
    ByteReader r(b);
    ContractDef d;
    d.contract_id = id;
    d.kind = static_cast<ContractKind>(r.u8());
    d.deployer = to_account(r.field());
    d.supply = r.u128();
    d.nft_contract = to_account(r.field());
    d.payment_token = to_account(r.field());
    return d;
}

// Overlay over an immutable pre-state with gas metering.
class ExecContext {
public:
    ExecContext(const ContractState& pre, const TxId& tx_id) : pre_(pre), tx_id_(tx_id) {}

    std::optional<Bytes> read(const Bytes& full) {
        ++counters.reads;
        auto it = pending_.find(full);
        if (it != pending_.end()) return it->second;
        return pre_.get(full);
    }

    void write(const Bytes& full, std::optional<Bytes> value) {
        ++counters.writes;
        pending_[full] = std::move(value);
    }

    std::optional<Bytes> sread(const ContractId& c, const Bytes& key) {
        return read(ContractState::full_key(ContractState::Storage, c, key));
    }
    void swrite(const ContractId& c, const Bytes& key, std::optional<Bytes> value) {
        write(ContractState::full_key(ContractState::Storage, c, key), std::move(value));
    }

    Amount amount_at(const ContractId& c, const Bytes& key) {
        auto v = sread(c, key);
        return v ? decode_amount(*v) : 0;
    }

    std::optional<ContractDef> contract(const ContractId& id) {
        auto v = read(ContractState::full_key(ContractState::Registry, id, {}));
        if (!v) return std::nullopt;
        return decode_def(id, *v);
    }

    void emit(const ContractId& c, std::string name, std::vector<std::pair<std::string, std::string>> fields) {
        ++counters.events;
        events.push_back(Event{tx_id_, c, std::move(name), std::move(fields)});
    }

    struct Savepoint {
        std::map<Bytes, std::optional<Bytes>> pending;
        std::size_t events;
    };
    Savepoint save() const { return {pending_, events.size()}; }
    void restore(Savepoint sp) {
        pending_ = std::move(sp.pending);
        events.resize(sp.events);
    }

    WriteSet take_writes() {
        WriteSet out;
        out.reserve(pending_.size());
        for (auto& [k, v] : pending_) out.emplace_back(k, std::move(v));
        return out;
    }

    GasCounters counters;
    std::vector<Event> events;

private:
    const ContractState& pre_;
    TxId tx_id_;
    std::map<Bytes, std::optional<Bytes>> pending_;
};

const Bytes& arg(const std::vector<Bytes>& args, std::size_t i) {
    if (i >= args.size()) throw Revert{RevertReason::BadArguments};
    return args[i];
}

AccountId arg_account(const std::vector<Bytes>& args, std::size_t i) {
    const auto& a = arg(args, i);
    if (a.size() != 20) throw Revert{RevertReason::BadArguments};
    return to_account(a);
}

Amount arg_amount(const std::vector<Bytes>& args, std::size_t i) {
    const auto& a = arg(args, i);
    if (a.size() != 16) throw Revert{RevertReason::BadArguments};
    return decode_amount(a);
}

std::uint64_t arg_u64(const std::vector<Bytes>& args, std::size_t i) {
    const auto& a = arg(args, i);
    if (a.size() != 8) throw Revert{RevertReason::BadArguments};
    return decode_u64(a);
}

// ---- fungible token ----

void ft_move(ExecContext& cx, const ContractId& token, const AccountId& from, const AccountId& to, Amount value) {
    Amount from_bal = cx.amount_at(token, skey(keys::kBalance, from));
    if (from_bal < value) throw Revert{RevertReason::InsufficientBalance};
    if (from == to) {
        cx.emit(token, "Transfer",
                {{"from", acct_str(from)}, {"to", acct_str(to)}, {"value", amount_to_string(value)}});
        return;
    }
    Amount to_bal = cx.amount_at(token, skey(keys::kBalance, to));
    cx.swrite(token, skey(keys::kBalance, from),
              from_bal - value == 0 ? std::nullopt : std::optional<Bytes>(encode_amount(from_bal - value)));
    cx.swrite(token, skey(keys::kBalance, to), encode_amount(to_bal + value));
    cx.emit(token, "Transfer", {{"from", acct_str(from)}, {"to", acct_str(to)}, {"value", amount_to_string(value)}});
}

Bytes fungible(ExecContext& cx, const ContractDef& def, const AccountId& caller, const std::string& method,
               const std::vector<Bytes>& args) {
    const auto& id = def.contract_id;
    if (method == "totalSupply") return encode_amount(cx.amount_at(id, skey(keys::kSupply)));
    if (method == "balanceOf") return encode_amount(cx.amount_at(id, skey(keys::kBalance, arg_account(args, 0))));
    if (method == "allowance")
        return encode_amount(cx.amount_at(id, skey(keys::kAllowance, arg_account(args, 0), arg_account(args, 1))));
    if (method == "transfer") {
        ft_move(cx, id, caller, arg_account(args, 0), arg_amount(args, 1));
        return {};
    }
    if (method == "approve") {
        auto spender = arg_account(args, 0);
        auto value = arg_amount(args, 1);
        cx.swrite(id, skey(keys::kAllowance, caller, spender),
                  value == 0 ? std::nullopt : std::optional<Bytes>(encode_amount(value)));
        cx.emit(id, "Approval",
                {{"owner", acct_str(caller)}, {"spender", acct_str(spender)}, {"value", amount_to_string(value)}});
        return {};
    }
    if (method == "transferFrom") {
        auto from = arg_account(args, 0);
        auto to = arg_account(args, 1);
        auto value = arg_amount(args, 2);
        auto akey = skey(keys::kAllowance, from, caller);
        Amount allowed = cx.amount_at(id, akey);
        if (allowed < value) throw Revert{RevertReason::InsufficientAllowance};
        ft_move(cx, id, from, to, value);
        cx.swrite(id, akey, allowed - value == 0 ? std::nullopt : std::optional<Bytes>(encode_amount(allowed - value)));
        return {};
    }
    throw Revert{RevertReason::UnknownMethod};
}

// ---- non-fungible token ----

std::optional<AccountId> nft_owner(ExecContext& cx, const ContractId& nft, std::uint64_t token) {
    auto v = cx.sread(nft, skey(keys::kOwner, token));
    if (!v) return std::nullopt;
    return to_account(*v);
}

void nft_move(ExecContext& cx, const ContractId& nft, const AccountId& from, const AccountId& to,
              std::uint64_t token) {
    cx.swrite(nft, skey(keys::kOwner, token), to_bytes(to));
    cx.swrite(nft, skey(keys::kHolding, from, token), std::nullopt);
    cx.swrite(nft, skey(keys::kHolding, to, token), Bytes{1});
    cx.emit(nft, "Transfer", {{"from", acct_str(from)}, {"to", acct_str(to)}, {"tokenId", std::to_string(token)}});
}

Bytes non_fungible(ExecContext& cx, const ContractDef& def, const AccountId& caller, const std::string& method,
                   const std::vector<Bytes>& args) {
    const auto& id = def.contract_id;
    if (method == "ownerOf") {
        auto owner = nft_owner(cx, id, arg_u64(args, 0));
        if (!owner) throw Revert{RevertReason::NotMinted};
        return to_bytes(*owner);
    }
    if (method == "pointerOf") {
        auto p = cx.sread(id, skey(keys::kPointer, arg_u64(args, 0)));
        if (!p) throw Revert{RevertReason::NotMinted};
        return *p;
    }
    if (method == "mint") {
        auto token = arg_u64(args, 0);
        const auto& pointer = arg(args, 1);
        if (nft_owner(cx, id, token)) throw Revert{RevertReason::DuplicateTokenId};
        cx.swrite(id, skey(keys::kOwner, token), to_bytes(caller));
        cx.swrite(id, skey(keys::kHolding, caller, token), Bytes{1});
        cx.swrite(id, skey(keys::kPointer, token), pointer);
        cx.emit(id, "Transfer", {{"from", acct_str(AccountId{})}, {"to", acct_str(caller)},
                                 {"tokenId", std::to_string(token)}});
        return {};
    }
    if (method == "transferFrom") {
        auto from = arg_account(args, 0);
        auto to = arg_account(args, 1);
        auto token = arg_u64(args, 2);
        auto owner = nft_owner(cx, id, token);
        if (!owner) throw Revert{RevertReason::NotMinted};
        if (*owner != from || caller != from) throw Revert{RevertReason::NotOwner};
        nft_move(cx, id, from, to, token);
        return {};
    }
    throw Revert{RevertReason::UnknownMethod};
}

// ---- market ----

Bytes market(ExecContext& cx, const ContractDef& def, const AccountId& caller, const std::string& method,
             const std::vector<Bytes>& args) {
    const auto& id = def.contract_id;
    if (method == "listing") {
        auto v = cx.sread(id, skey(keys::kListing, arg_u64(args, 0)));
        if (!v) throw Revert{RevertReason::NotListed};
        return *v;
    }
    if (method == "list") {
        auto token = arg_u64(args, 0);
        auto price = arg_amount(args, 1);
        auto owner = nft_owner(cx, def.nft_contract, token);
        if (!owner) throw Revert{RevertReason::NotMinted};
        if (*owner != caller) throw Revert{RevertReason::NotOwner};
        cx.swrite(id, skey(keys::kListing, token), ByteWriter().raw(caller).u128(price).bytes());
        cx.swrite(id, skey(keys::kSellerListing, caller, token), encode_amount(price));
        cx.emit(id, "Listed", {{"seller", acct_str(caller)}, {"tokenId", std::to_string(token)},
                               {"price", amount_to_string(price)}});
        return {};
    }
    if (method == "buy") {
        auto token = arg_u64(args, 0);
        auto offered = arg_amount(args, 1);
        auto listing = cx.sread(id, skey(keys::kListing, token));
        if (!listing) throw Revert{RevertReason::NotListed};
        ByteReader r(*listing);
        auto seller = to_account(r.raw(20));
        auto price = r.u128();
        if (offered != price) throw Revert{RevertReason::PriceMismatch};
        auto owner = nft_owner(cx, def.nft_contract, token);
        if (!owner || *owner != seller) throw Revert{RevertReason::NotOwner};
        // Payment and ownership move together or not at all.
        ft_move(cx, def.payment_token, caller, seller, price);
        nft_move(cx, def.nft_contract, seller, caller, token);
        cx.swrite(id, skey(keys::kListing, token), std::nullopt);
        cx.swrite(id, skey(keys::kSellerListing, seller, token), std::nullopt);
        cx.emit(id, "Sale", {{"seller", acct_str(seller)}, {"buyer", acct_str(caller)},
                             {"tokenId", std::to_string(token)}, {"price", amount_to_string(price)}});
        return {};
    }
    throw Revert{RevertReason::UnknownMethod};
}

Bytes verifier(ExecContext& cx, const ContractDef& def, const AccountId& caller, const std::string& method,
               const std::vector<Bytes>& args) {
    const auto& id = def.contract_id;
    if (method == "commit") {
        const auto& d = arg(args, 0);
        if (d.size() != 32) throw Revert{RevertReason::BadArguments};
        Bytes key{keys::kCommitment};
        key.insert(key.end(), d.begin(), d.end());
        cx.swrite(id, key, to_bytes(caller));
        cx.emit(id, "Committed", {{"digest", hex(d)}, {"by", acct_str(caller)}});
        return {};
    }
    if (method == "isCommitted") {
        const auto& d = arg(args, 0);
        Bytes key{keys::kCommitment};
        key.insert(key.end(), d.begin(), d.end());
        return Bytes{static_cast<std::uint8_t>(cx.sread(id, key) ? 1 : 0)};
    }
    throw Revert{RevertReason::UnknownMethod};
}

Bytes dispatch(ExecContext& cx, const ContractId& contract, const AccountId& caller, const std::string& method,
               const std::vector<Bytes>& args) {
    auto def = cx.contract(contract);
    if (!def) throw Revert{RevertReason::UnknownContract};
    switch (def->kind) {
        case ContractKind::FungibleToken: return fungible(cx, *def, caller, method, args);
        case ContractKind::NonFungibleToken: return non_fungible(cx, *def, caller, method, args);
        case ContractKind::NftMarket: return market(cx, *def, caller, method, args);
        case ContractKind::HybridVerifier: return verifier(cx, *def, caller, method, args);
    }
    throw Revert{RevertReason::UnknownMethod};
}

void native_transfer(ExecContext& cx, const AccountId& from, const AccountId& to, Amount value) {
    auto fk = ContractState::full_key(ContractState::Native, kZeroId, from);
    auto tk = ContractState::full_key(ContractState::Native, kZeroId, to);
    auto fv = cx.read(fk);
    Amount fb = fv ? decode_amount(*fv) : 0;
    if (fb < value) throw Revert{RevertReason::InsufficientBalance};
    if (from == to) return;
    auto tv = cx.read(tk);
    Amount tb = tv ? decode_amount(*tv) : 0;
    cx.write(fk, fb - value == 0 ? std::nullopt : std::optional<Bytes>(encode_amount(fb - value)));
    cx.write(tk, encode_amount(tb + value));
    cx.emit(kZeroId, "NativeTransfer",
            {{"from", acct_str(from)}, {"to", acct_str(to)}, {"value", amount_to_string(value)}});
}

void multicall(ExecContext& cx, const AccountId& agent, const std::vector<Bytes>& args, Receipt& receipt) {
    std::vector<BundledOp> ops;
    try {
        ops = decode_bundle(args);
    } catch (const Error&) {
        throw Revert{RevertReason::BadArguments};
    }
    for (const auto& op : ops) {
        OpResult res{op_id(agent, op.originator, op.seq), op.originator, op.contract, op.method, RevertReason::None};
        // Embedded payloads are metered like tx-level inline data, even when the op reverts.
        cx.counters.inline_bytes += op.inline_data.size();
        auto sp = cx.save();
        try {
            auto gk = ContractState::full_key(ContractState::Agents, agent, op.originator);
            auto grant = cx.read(gk);
            if (!grant) throw Revert{RevertReason::UnregisteredUser};
            if (decode_u64(*grant) != op.seq) throw Revert{RevertReason::BadSequence};
            dispatch(cx, op.contract, op.originator, op.method, op.args);
            cx.write(gk, encode_u64(op.seq + 1));
        } catch (const Revert& r) {
            cx.restore(std::move(sp));
            res.status = r.reason;
        }
        receipt.touched.emplace_back(op.originator, op.contract);
        receipt.ops.push_back(std::move(res));
    }
}

}  // namespace

std::string_view to_string(ContractKind k) {
    switch (k) {
        case ContractKind::FungibleToken: return "FungibleToken";
        case ContractKind::NonFungibleToken: return "NonFungibleToken";
        case ContractKind::NftMarket: return "NftMarket";
        case ContractKind::HybridVerifier: return "HybridVerifier";
    }
    return "Unknown";
}

std::string_view to_string(RevertReason r) {
    switch (r) {
        case RevertReason::None: return "Success";
        case RevertReason::UnknownMethod: return "UnknownMethod";
        case RevertReason::UnknownContract: return "UnknownContract";
        case RevertReason::OutOfGas: return "OutOfGas";
        case RevertReason::BadArguments: return "BadArguments";
        case RevertReason::InsufficientBalance: return "InsufficientBalance";
        case RevertReason::InsufficientAllowance: return "InsufficientAllowance";
        case RevertReason::NotOwner: return "NotOwner";
        case RevertReason::NotMinted: return "NotMinted";
        case RevertReason::DuplicateTokenId: return "DuplicateTokenId";
        case RevertReason::NotListed: return "NotListed";
        case RevertReason::PriceMismatch: return "PriceMismatch";
        case RevertReason::UnregisteredUser: return "UnregisteredUser";
        case RevertReason::BadSequence: return "BadSequence";
        case RevertReason::CommitmentMismatch: return "CommitmentMismatch";
    }
    return "Unknown";
}

ContractId make_contract_id(const AccountId& deployer, std::string_view salt) {
    auto d = Hasher().update("w3sim.contract").update(deployer).update(salt).finish();
    ContractId id{};
    std::copy_n(d.begin(), id.size(), id.begin());
    return id;
}

// ---- ContractState ----

Bytes ContractState::full_key(Domain d, const ContractId& c, ByteView key) {
    Bytes k;
    k.reserve(1 + c.size() + key.size());
    k.push_back(d);
    k.insert(k.end(), c.begin(), c.end());
    k.insert(k.end(), key.begin(), key.end());
    return k;
}

std::optional<Bytes> ContractState::get(const Bytes& full) const {
    auto it = entries_.find(full);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void ContractState::put(const Bytes& full, std::optional<Bytes> value) {
    auto b = bucket_of(full);
    if (value) {
        entries_[full] = std::move(*value);
        bucket_keys_[b].insert(full);
    } else {
        if (entries_.erase(full) == 0) return;
        bucket_keys_[b].erase(full);
    }
    dirty_.set(b);
}

std::size_t ContractState::bucket_of(const Bytes& key) {
    // FNV-1a; only needs to be fixed, not cryptographic.
    std::uint32_t h = 2166136261u;
    for (auto c : key) h = (h ^ c) * 16777619u;
    return h % kBuckets;
}

Digest ContractState::bucket_digest(std::size_t b) const {
    Hasher h;
    std::uint8_t len[4];
    auto put_len = [&](std::size_t n) {
        for (int i = 0; i < 4; ++i) len[i] = static_cast<std::uint8_t>(n >> (24 - 8 * i));
        h.update(ByteView(len, 4));
    };
    for (const auto& k : bucket_keys_[b]) {
        const auto& v = entries_.at(k);
        put_len(k.size());
        h.update(k);
        put_len(v.size());
        h.update(v);
    }
    return h.finish();
}

void ContractState::refresh_root() {
    for (std::size_t b = 0; b < kBuckets; ++b)
        if (dirty_.test(b)) bucket_digests_[b] = bucket_digest(b);
    dirty_.reset();
}

std::optional<ContractDef> ContractState::contract(const ContractId& id) const {
    auto v = get(full_key(Registry, id, {}));
    if (!v) return std::nullopt;
    return decode_def(id, *v);
}

Amount ContractState::native_balance(const AccountId& a) const {
    auto v = get(full_key(Native, kZeroId, a));
    return v ? decode_amount(*v) : 0;
}

void ContractState::set_native_balance(const AccountId& a, Amount v) {
    put(full_key(Native, kZeroId, a), v == 0 ? std::nullopt : std::optional<Bytes>(encode_amount(v)));
}

std::uint64_t ContractState::nonce(const AccountId& a) const {
    auto it = nonces_.find(a);
    return it == nonces_.end() ? 0 : it->second;
}

Amount ContractState::fee_credit(const AccountId& a) const {
    auto it = fee_credits_.find(a);
    return it == fee_credits_.end() ? 0 : it->second;
}

Digest ContractState::state_root() const {
    Hasher h;
    h.update("w3sim.state");
    for (std::size_t b = 0; b < kBuckets; ++b) {
        if (dirty_.test(b))
            h.update(bucket_digest(b));
        else
            h.update(bucket_digests_[b]);
    }
    return h.finish();
}

std::map<Bytes, Bytes> ContractState::account_view(const AccountId& account, const ContractId& contract) const {
    std::map<Bytes, Bytes> out;
    if (contract == kZeroId) {
        auto k = full_key(Native, kZeroId, account);
        if (auto v = get(k)) out.emplace(k, *v);
        return out;
    }
    for (std::uint8_t tag : {keys::kAllowance, keys::kBalance, keys::kHolding, keys::kSellerListing}) {
        auto prefix = full_key(Storage, contract, skey(tag, account));
        for (auto it = entries_.lower_bound(prefix); it != entries_.end(); ++it) {
            const auto& k = it->first;
            if (k.size() < prefix.size() || !std::equal(prefix.begin(), prefix.end(), k.begin())) break;
            out.emplace(it->first, it->second);
        }
    }
    return out;
}

// ---- execution ----

ContractId deploy_contract(ContractState& state, const ContractDef& def) {
    auto rk = ContractState::full_key(ContractState::Registry, def.contract_id, {});
    if (state.get(rk)) throw Error(Errc::DuplicateContract);
    state.put(rk, encode_def(def));
    if (def.kind == ContractKind::FungibleToken) {
        state.put(ContractState::full_key(ContractState::Storage, def.contract_id, skey(keys::kSupply)),
                  encode_amount(def.supply));
        if (def.supply > 0)
            state.put(ContractState::full_key(ContractState::Storage, def.contract_id,
                                              skey(keys::kBalance, def.deployer)),
                      encode_amount(def.supply));
    }
    return def.contract_id;
}

ExecutionResult dry_run(const ContractState& pre, const Transaction& tx, const ExecEnv& env) {
    ExecutionResult out;
    Receipt& rc = out.receipt;
    rc.tx_id = tx.tx_id;
    ExecContext cx(pre, tx.tx_id);
    cx.counters.inline_bytes = tx.payload.inline_data.size();
    const auto& sender = tx.metadata.sender.payload;
    const auto& p = tx.payload;
    try {
        if (!p.contract_id) {
            if (!p.method.empty() || p.args.size() != 1) throw Revert{RevertReason::UnknownMethod};
            native_transfer(cx, sender, tx.metadata.receiver.payload, arg_amount(p.args, 0));
            rc.touched.emplace_back(tx.metadata.receiver.payload, kZeroId);
        } else if (p.method == "grantAgent") {
            auto agent = arg_account(p.args, 0);
            auto gk = ContractState::full_key(ContractState::Agents, agent, sender);
            if (!cx.read(gk)) cx.write(gk, encode_u64(0));
        } else if (p.method == "multicall") {
            multicall(cx, sender, p.args, rc);
        } else {
            rc.return_data = dispatch(cx, *p.contract_id, sender, p.method, p.args);
        }
        rc.gas_used = cx.counters.cost(env.gas);
        if (rc.gas_used > tx.metadata.gas_limit) throw Revert{RevertReason::OutOfGas};
        rc.events = std::move(cx.events);
        out.writes = cx.take_writes();
    } catch (const Revert& r) {
        rc.status = r.reason;
        rc.gas_used = std::min(cx.counters.cost(env.gas), tx.metadata.gas_limit);
        rc.events.clear();
        rc.ops.clear();
        rc.return_data.clear();
        out.writes.clear();
    }
    rc.counters = cx.counters;
    rc.touched.emplace_back(sender, p.contract_id.value_or(kZeroId));
    // Every account-scoped key written is a touched view.
    for (const auto& [k, v] : out.writes) {
        if (k.size() < 21) continue;
        ContractId c{};
        std::copy_n(k.begin() + 1, 20, c.begin());
        if (k[0] == ContractState::Native) {
            rc.touched.emplace_back(to_account(ByteView(k).subspan(21)), kZeroId);
        } else if (k[0] == ContractState::Storage && k.size() >= 42 && account_scoped(k[21])) {
            rc.touched.emplace_back(to_account(ByteView(k).subspan(22, 20)), c);
        }
    }
    std::sort(rc.touched.begin(), rc.touched.end());
    rc.touched.erase(std::unique(rc.touched.begin(), rc.touched.end()), rc.touched.end());
    return out;
}

Receipt apply(ContractState& state, const Transaction& tx, ExecutionResult result, const ExecEnv& env) {
    for (auto& [k, v] : result.writes) state.put(k, std::move(v));
    state.bump_nonce(tx.metadata.sender.payload);
    state.credit_fee(env.proposer, result.receipt.gas_used);
    state.append_events(result.receipt.events);
    state.refresh_root();
    result.receipt.new_state_root = state.state_root();
    return std::move(result.receipt);
}

Receipt execute(ContractState& state, const Transaction& tx, const ExecEnv& env) {
    return apply(state, tx, dry_run(state, tx, env), env);
}

Bytes query_state(const ContractState& state, const ContractId& contract, std::string_view method,
                  const std::vector<Bytes>& args) {
    static const std::set<std::string, std::less<>> read_only = {
        "totalSupply", "balanceOf", "allowance", "ownerOf", "pointerOf", "listing", "isCommitted"};
    if (!read_only.contains(method)) throw Error(Errc::UnknownMethod, std::string(method));
    ExecContext cx(state, TxId{});
    try {
        return dispatch(cx, contract, AccountId{}, std::string(method), args);
    } catch (const Revert& r) {
        switch (r.reason) {
            case RevertReason::NotMinted: throw Error(Errc::NotMinted);
            case RevertReason::UnknownMethod: throw Error(Errc::UnknownMethod, std::string(method));
            default: throw Error(Errc::NotFound, std::string(to_string(r.reason)));
        }
    }
}

Amount balance_of(const ContractState& s, const ContractId& token, const AccountId& a) {
    return decode_amount(query_state(s, token, "balanceOf", {to_bytes(a)}));
}

Amount total_supply(const ContractState& s, const ContractId& token) {
    return decode_amount(query_state(s, token, "totalSupply", {}));
}

Amount allowance(const ContractState& s, const ContractId& token, const AccountId& owner, const AccountId& spender) {
    return decode_amount(query_state(s, token, "allowance", {to_bytes(owner), to_bytes(spender)}));
}

std::optional<AccountId> owner_of(const ContractState& s, const ContractId& nft, std::uint64_t token_id) {
    try {
        return to_account(query_state(s, nft, "ownerOf", {encode_u64(token_id)}));
    } catch (const Error& e) {
        if (e.code() == Errc::NotMinted) return std::nullopt;
        throw;
    }
}

Digest op_id(const AccountId& agent, const AccountId& originator, std::uint64_t seq) {
    return Hasher().update("w3sim.op").update(agent).update(originator).update(encode_u64(seq)).finish();
}

std::vector<Bytes> encode_bundle(const std::vector<BundledOp>& ops) {
    std::vector<Bytes> out;
    out.reserve(ops.size());
    for (const auto& op : ops) {
        ByteWriter w;
        w.field(op.originator).u64(op.seq).field(op.contract).field(op.method);
        w.u32(static_cast<std::uint32_t>(op.args.size()));
        for (const auto& a : op.args) w.field(a);
        w.field(op.inline_data);
        out.push_back(std::move(w).bytes());
    }
    return out;
}

std::vector<BundledOp> decode_bundle(const std::vector<Bytes>& args) {
    std::vector<BundledOp> ops;
    ops.reserve(args.size());
    for (const auto& a : args) {
        ByteReader r(a);
        BundledOp op;
        op.originator = to_account(r.field());
        op.seq = r.u64();
        op.contract = to_account(r.field());
        op.method = r.str();
        auto n = r.u32();
        for (std::uint32_t i = 0; i < n; ++i) op.args.push_back(r.field());
        op.inline_data = r.field();
        if (!r.done()) throw Error(Errc::Malformed, "trailing bytes in bundled op");
        ops.push_back(std::move(op));
    }
    return ops;
}

std::string events_to_ndjson(const std::vector<Event>& events) {
    std::string out;
    for (const auto& e : events) {
        nlohmann::ordered_json j;
        j["tx_id"] = hex(e.tx_id);
        j["event_name"] = e.name;
        nlohmann::ordered_json fields = nlohmann::ordered_json::object();
        fields["contract"] = "0x" + hex(e.contract);
        for (const auto& [k, v] : e.fields) fields[k] = v;
        j["fields"] = std::move(fields);
        out += j.dump();
        out += '\n';
    }
    return out;
}

}  // namespace w3sim
