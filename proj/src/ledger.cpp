#include "roboecon/ledger.hpp"

#include <istream>
#include <ostream>

namespace roboecon {

using nlohmann::json;

std::string_view to_string(Memo memo) {
  switch (memo) {
    case Memo::Endowment: return "Endowment";
    case Memo::Escrow: return "Escrow";
    case Memo::Settlement: return "Settlement";
    case Memo::Refund: return "Refund";
    case Memo::Sweep: return "Sweep";
  }
  return "Escrow";
}

Memo memo_from_string(std::string_view name) {
  for (auto m : {Memo::Endowment, Memo::Escrow, Memo::Settlement, Memo::Refund, Memo::Sweep})
    if (to_string(m) == name) return m;
  throw std::invalid_argument("unknown memo: " + std::string(name));
}

std::string_view to_string(RejectReason reason) {
  switch (reason) {
    case RejectReason::None: return "None";
    case RejectReason::BadHeight: return "BadHeight";
    case RejectReason::PrevHashMismatch: return "PrevHashMismatch";
    case RejectReason::HashMismatch: return "HashMismatch";
    case RejectReason::InsufficientWork: return "InsufficientWork";
    case RejectReason::NegativeAmount: return "NegativeAmount";
    case RejectReason::EndowmentOutsideGenesis: return "EndowmentOutsideGenesis";
    case RejectReason::MissingContractRef: return "MissingContractRef";
    case RejectReason::DuplicateTransaction: return "DuplicateTransaction";
    case RejectReason::AccountKindConflict: return "AccountKindConflict";
    case RejectReason::BadSignature: return "BadSignature";
    case RejectReason::InsufficientFunds: return "InsufficientFunds";
  }
  return "None";
}

// ---- canonical form --------------------------------------------------------

json to_json(const AccountId& id) {
  return json{{"kind", std::string(to_string(id.kind))}, {"label", id.label}};
}

AccountId account_from_json(const json& j) {
  return {account_kind_from_string(j.at("kind").get<std::string>()), j.at("label").get<std::string>()};
}

namespace {

json unsigned_tx_json(const Transaction& tx) {
  json j{{"tx_id", tx.tx_id},
         {"from", to_json(tx.from)},
         {"to", to_json(tx.to)},
         {"amount", tx.amount},
         {"memo", std::string(to_string(tx.memo))}};
  j["contract_ref"] = tx.contract_ref ? json(*tx.contract_ref) : json(nullptr);
  return j;
}

std::string dump_canonical(const json& j) {
  // nlohmann::json stores objects in a std::map, so keys come out sorted.
  return j.dump(-1, ' ', false, json::error_handler_t::strict);
}

json transactions_json(const std::vector<Transaction>& txs) {
  json arr = json::array();
  for (const auto& tx : txs) arr.push_back(to_json(tx));
  return arr;
}

// Canonical block bytes are prefix + decimal(nonce) + suffix; the split lets
// the miner hash the prefix once.
struct SplitSerialization {
  std::string prefix;
  std::string suffix;
};

SplitSerialization split_serialize(const Block& block) {
  SplitSerialization s;
  s.prefix = "{\"height\":" + std::to_string(block.height) +
             ",\"miner\":" + dump_canonical(to_json(block.miner)) + ",\"nonce\":";
  s.suffix = ",\"pow_difficulty\":" + std::to_string(block.pow_difficulty) + ",\"prev_hash\":\"" +
             to_hex(block.prev_hash) +
             "\",\"transactions\":" + dump_canonical(transactions_json(block.transactions)) + "}";
  return s;
}

}  // namespace

json to_json(const Transaction& tx) {
  json j = unsigned_tx_json(tx);
  j["authorization"] = to_hex(tx.authorization);
  return j;
}

Transaction transaction_from_json(const json& j) {
  Transaction tx;
  tx.tx_id = j.at("tx_id").get<std::string>();
  tx.from = account_from_json(j.at("from"));
  tx.to = account_from_json(j.at("to"));
  tx.amount = j.at("amount").get<Cents>();
  tx.memo = memo_from_string(j.at("memo").get<std::string>());
  if (const auto& ref = j.at("contract_ref"); !ref.is_null()) tx.contract_ref = ref.get<std::string>();
  tx.authorization = from_hex(j.at("authorization").get<std::string>());
  return tx;
}

std::string signing_payload(const Transaction& tx) { return dump_canonical(unsigned_tx_json(tx)); }

std::string canonical_serialize(const Block& block) {
  json j{{"height", block.height},
         {"prev_hash", to_hex(block.prev_hash)},
         {"transactions", transactions_json(block.transactions)},
         {"nonce", block.nonce},
         {"pow_difficulty", block.pow_difficulty},
         {"miner", to_json(block.miner)}};
  return dump_canonical(j);
}

Digest compute_block_hash(const Block& block) { return sha256(canonical_serialize(block)); }

json to_json(const Block& block) {
  json j = json::parse(canonical_serialize(block));
  j["block_hash"] = to_hex(block.block_hash);
  return j;
}

Block block_from_json(const json& j) {
  Block b;
  b.height = j.at("height").get<std::uint64_t>();
  b.prev_hash = digest_from_hex(j.at("prev_hash").get<std::string>());
  for (const auto& t : j.at("transactions")) b.transactions.push_back(transaction_from_json(t));
  b.nonce = j.at("nonce").get<std::uint64_t>();
  b.pow_difficulty = j.at("pow_difficulty").get<int>();
  b.miner = account_from_json(j.at("miner"));
  b.block_hash = digest_from_hex(j.at("block_hash").get<std::string>());
  return b;
}

// ---- mining -----------------------------------------------------------------

Block mine_block(std::vector<Transaction> transactions, std::uint64_t height,
                 const Digest& prev_hash, int difficulty, const AccountId& miner,
                 std::uint64_t nonce_bound) {
  if (difficulty < 0 || difficulty > 256)
    throw std::invalid_argument("pow difficulty must be within [0, 256]");
  Block block;
  block.height = height;
  block.prev_hash = prev_hash;
  block.transactions = std::move(transactions);
  block.pow_difficulty = difficulty;
  block.miner = miner;

  const auto parts = split_serialize(block);
  Sha256Stream prefix;
  prefix.update(parts.prefix);
  for (std::uint64_t nonce = 0; nonce < nonce_bound; ++nonce) {
    Sha256Stream s = prefix;
    s.update(std::to_string(nonce));
    s.update(parts.suffix);
    Digest d = s.finish();
    if (leading_zero_bits(d) >= difficulty) {
      block.nonce = nonce;
      block.block_hash = d;
      return block;
    }
  }
  throw LedgerError(LedgerErrc::MiningExhausted,
                    "no nonce below " + std::to_string(nonce_bound) + " meets difficulty " +
                        std::to_string(difficulty));
}

// ---- transaction rules --------------------------------------------------------

namespace {

struct StateView {
  const std::map<AccountId, Cents>& balances;
  const std::map<std::string, AccountKind>& kinds;
  const std::set<std::string>& tx_ids;
};

// Staged effects of the transactions checked so far in one block.
struct Scratch {
  std::map<AccountId, Cents> balances;
  std::map<std::string, AccountKind> kinds;
  std::set<std::string> tx_ids;
  Cents minted = 0;

  Cents balance(const StateView& base, const AccountId& id) const {
    if (auto it = balances.find(id); it != balances.end()) return it->second;
    if (auto it = base.balances.find(id); it != base.balances.end()) return it->second;
    return 0;
  }
  void set_balance(const AccountId& id, Cents v) { balances[id] = v; }
};

struct TxCheck {
  RejectReason reason = RejectReason::None;
  std::string detail;
};

bool requires_contract_ref(Memo m) {
  return m == Memo::Escrow || m == Memo::Settlement || m == Memo::Refund;
}

TxCheck check_kind(const AccountId& id, const StateView& base, Scratch& scratch) {
  std::optional<AccountKind> known;
  if (auto it = scratch.kinds.find(id.label); it != scratch.kinds.end()) known = it->second;
  else if (auto it2 = base.kinds.find(id.label); it2 != base.kinds.end()) known = it2->second;
  if (known && *known != id.kind)
    return {RejectReason::AccountKindConflict, "label " + id.label + " already has kind " +
                                                   std::string(to_string(*known))};
  scratch.kinds[id.label] = id.kind;
  return {};
}

TxCheck check_and_stage(const Transaction& tx, bool genesis, const StateView& base, Scratch& scratch,
                        const SignatureScheme* signatures) {
  if (tx.amount < 0) return {RejectReason::NegativeAmount, tx.tx_id};
  if (tx.memo == Memo::Endowment && !genesis)
    return {RejectReason::EndowmentOutsideGenesis, tx.tx_id};
  if (requires_contract_ref(tx.memo) && !tx.contract_ref)
    return {RejectReason::MissingContractRef, tx.tx_id};
  if (base.tx_ids.contains(tx.tx_id) || scratch.tx_ids.contains(tx.tx_id))
    return {RejectReason::DuplicateTransaction, tx.tx_id};
  if (auto c = check_kind(tx.from, base, scratch); c.reason != RejectReason::None) return c;
  if (auto c = check_kind(tx.to, base, scratch); c.reason != RejectReason::None) return c;
  if (signatures != nullptr && !signatures->verify(tx.from, signing_payload(tx), tx.authorization))
    return {RejectReason::BadSignature, tx.tx_id + " not authorized by " + to_string(tx.from)};

  const Cents from_balance = scratch.balance(base, tx.from);
  if (tx.memo == Memo::Endowment) {
    scratch.set_balance(tx.from, from_balance);
    scratch.minted += tx.amount;
  } else {
    if (from_balance < tx.amount)
      return {RejectReason::InsufficientFunds,
              tx.tx_id + ": " + to_string(tx.from) + " has " + std::to_string(from_balance) +
                  ", needs " + std::to_string(tx.amount)};
    scratch.set_balance(tx.from, from_balance - tx.amount);
  }
  scratch.set_balance(tx.to, scratch.balance(base, tx.to) + tx.amount);
  scratch.tx_ids.insert(tx.tx_id);
  return {};
}

}  // namespace

// ---- chain ------------------------------------------------------------------

std::optional<AccountKind> Chain::kind_of(const std::string& label) const {
  if (auto it = kinds_.find(label); it != kinds_.end()) return it->second;
  return std::nullopt;
}

std::vector<const Transaction*> Chain::transactions_for_contract(const std::string& contract_id) const {
  std::vector<const Transaction*> out;
  if (auto it = by_contract_.find(contract_id); it != by_contract_.end())
    for (const auto& loc : it->second) out.push_back(&blocks_[loc.height].transactions[loc.index]);
  return out;
}

ValidationVerdict validate_block(const Block& block, const Chain& chain,
                                 const ValidationOptions& options) {
  const auto h = block.height;
  if (h != chain.size())
    return ValidationVerdict::reject(RejectReason::BadHeight, chain.size(),
                                     "expected height " + std::to_string(chain.size()) + ", got " +
                                         std::to_string(h));
  if (block.prev_hash != chain.tip_hash())
    return ValidationVerdict::reject(RejectReason::PrevHashMismatch, h, "prev_hash does not link");
  if (compute_block_hash(block) != block.block_hash)
    return ValidationVerdict::reject(RejectReason::HashMismatch, h, "block_hash does not match contents");
  if (block.pow_difficulty < 0 || leading_zero_bits(block.block_hash) < block.pow_difficulty)
    return ValidationVerdict::reject(RejectReason::InsufficientWork, h, "proof of work not satisfied");

  StateView base{chain.balances_, chain.kinds_, chain.tx_ids_};
  Scratch scratch;
  for (const auto& tx : block.transactions) {
    auto c = check_and_stage(tx, h == 0, base, scratch, options.signatures);
    if (c.reason != RejectReason::None) return ValidationVerdict::reject(c.reason, h, c.detail);
  }
  return ValidationVerdict::accept();
}

void Chain::apply(const Block& block) {
  StateView base{balances_, kinds_, tx_ids_};
  Scratch scratch;
  for (std::size_t i = 0; i < block.transactions.size(); ++i) {
    const auto& tx = block.transactions[i];
    check_and_stage(tx, block.height == 0, base, scratch, nullptr);
    if (tx.contract_ref) by_contract_[*tx.contract_ref].push_back({block.height, i});
  }
  for (auto& [id, v] : scratch.balances) balances_[id] = v;
  for (auto& [label, k] : scratch.kinds) kinds_[label] = k;
  tx_ids_.insert(scratch.tx_ids.begin(), scratch.tx_ids.end());
  endowment_total_ += scratch.minted;
  blocks_.push_back(block);
}

void Chain::append(Block block, const ValidationOptions& options) {
  auto verdict = validate_block(block, *this, options);
  if (!verdict.accepted())
    throw LedgerError(LedgerErrc::RejectedBlock, "block " + std::to_string(block.height) +
                                                     " rejected: " + std::string(to_string(verdict.reason)) +
                                                     " (" + verdict.detail + ")");
  apply(block);
}

Chain append_block(Chain chain, Block block, const ValidationOptions& options) {
  chain.append(std::move(block), options);
  return chain;
}

ValidationVerdict validate_chain(const std::vector<Block>& blocks, const ValidationOptions& options) {
  Chain replay;
  for (const auto& block : blocks) {
    auto verdict = validate_block(block, replay, options);
    if (!verdict.accepted()) return verdict;
    replay.append(block, ValidationOptions{});  // already validated
  }
  return ValidationVerdict::accept();
}

Cents balance_of(const Chain& chain, const AccountId& account) {
  auto it = chain.balances().find(account);
  if (it == chain.balances().end())
    throw LedgerError(LedgerErrc::UnknownAccount, "unknown account " + to_string(account));
  return it->second;
}

// ---- export -------------------------------------------------------------------

void write_chain_jsonl(const std::vector<Block>& blocks, std::ostream& out) {
  for (const auto& b : blocks) out << dump_canonical(to_json(b)) << '\n';
}

std::vector<Block> read_chain_jsonl(std::istream& in) {
  std::vector<Block> blocks;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      blocks.push_back(block_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      throw LedgerError(LedgerErrc::MalformedExport,
                        "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (blocks.empty()) throw LedgerError(LedgerErrc::MalformedExport, "export contains no blocks");
  return blocks;
}

// ---- ledger -------------------------------------------------------------------

Ledger::Ledger(const SignatureScheme& signatures, LedgerConfig config)
    : signatures_(signatures), config_(std::move(config)) {
  if (config_.max_tx_per_block == 0) throw std::invalid_argument("max_tx_per_block must be positive");
}

Transaction Ledger::make_transaction(const AccountId& from, const AccountId& to, Cents amount, Memo memo,
                                     std::optional<std::string> contract_ref) {
  Transaction tx;
  tx.tx_id = "tx-" + std::to_string(next_tx_++);
  tx.from = from;
  tx.to = to;
  tx.amount = amount;
  tx.memo = memo;
  tx.contract_ref = std::move(contract_ref);
  tx.authorization = signatures_.sign(from, signing_payload(tx));
  return tx;
}

const Block& Ledger::create_genesis(const std::vector<Endowment>& endowments) {
  if (!chain_.empty()) throw std::logic_error("genesis already created");
  std::vector<Transaction> txs;
  for (const auto& e : endowments)
    txs.push_back(make_transaction(e.issuer, e.recipient, e.amount, Memo::Endowment));
  auto block = mine_block(std::move(txs), 0, kZeroDigest, config_.pow_difficulty, config_.miner,
                          config_.nonce_bound);
  chain_.append(block, ValidationOptions{&signatures_});
  effective_ = chain_.balances();
  effective_kinds_ = chain_.kinds();
  effective_ids_ = chain_.tx_ids();
  return chain_.blocks().back();
}

void Ledger::submit(const Transaction& tx) {
  if (chain_.empty()) throw std::logic_error("submit before genesis");
  StateView view{effective_, effective_kinds_, effective_ids_};
  Scratch scratch;
  auto c = check_and_stage(tx, false, view, scratch, &signatures_);
  if (c.reason == RejectReason::InsufficientFunds)
    throw LedgerError(LedgerErrc::InsufficientFunds, c.detail);
  if (c.reason != RejectReason::None)
    throw LedgerError(LedgerErrc::InvalidTransaction,
                      std::string(to_string(c.reason)) + ": " + c.detail);
  for (auto& [id, v] : scratch.balances) effective_[id] = v;
  for (auto& [label, k] : scratch.kinds) effective_kinds_[label] = k;
  effective_ids_.insert(tx.tx_id);
  pending_.push_back(tx);
}

std::vector<Block> Ledger::flush() {
  std::vector<Block> mined;
  std::size_t start = 0;
  while (start < pending_.size()) {
    const auto n = std::min(config_.max_tx_per_block, pending_.size() - start);
    std::vector<Transaction> batch(pending_.begin() + static_cast<std::ptrdiff_t>(start),
                                   pending_.begin() + static_cast<std::ptrdiff_t>(start + n));
    auto block = mine_block(std::move(batch), chain_.size(), chain_.tip_hash(), config_.pow_difficulty,
                            config_.miner, config_.nonce_bound);
    chain_.append(block, ValidationOptions{&signatures_});
    mined.push_back(std::move(block));
    start += n;
  }
  pending_.clear();
  return mined;
}

Cents Ledger::effective_balance(const AccountId& account) const {
  auto it = effective_.find(account);
  return it == effective_.end() ? 0 : it->second;
}

}  // namespace roboecon
