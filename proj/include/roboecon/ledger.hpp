#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "roboecon/account.hpp"
#include "roboecon/crypto.hpp"

namespace roboecon {

enum class Memo { Endowment, Escrow, Settlement, Refund, Sweep };

std::string_view to_string(Memo memo);
Memo memo_from_string(std::string_view name);

struct Transaction {
  std::string tx_id;
  AccountId from;
  AccountId to;
  Cents amount = 0;
  std::optional<std::string> contract_ref;
  Memo memo = Memo::Escrow;
  Bytes authorization;

  bool operator==(const Transaction&) const = default;
};

struct Block {
  std::uint64_t height = 0;
  Digest prev_hash{};
  std::vector<Transaction> transactions;
  std::uint64_t nonce = 0;
  int pow_difficulty = 0;
  AccountId miner;
  Digest block_hash{};

  bool operator==(const Block&) const = default;
};

inline constexpr Digest kZeroDigest{};
inline constexpr std::uint64_t kDefaultNonceBound = std::uint64_t{1} << 32;

enum class LedgerErrc {
  UnknownAccount,
  MiningExhausted,
  RejectedBlock,
  InsufficientFunds,
  InvalidTransaction,
  MalformedExport,
};

class LedgerError : public std::runtime_error {
 public:
  LedgerError(LedgerErrc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  LedgerErrc code() const noexcept { return code_; }

 private:
  LedgerErrc code_;
};

// ---- canonical form ------------------------------------------------------

nlohmann::json to_json(const AccountId& id);
AccountId account_from_json(const nlohmann::json& j);

/// Transaction object including its authorization.
nlohmann::json to_json(const Transaction& tx);
Transaction transaction_from_json(const nlohmann::json& j);

/// Bytes covered by a transaction's authorization (everything but the signature).
std::string signing_payload(const Transaction& tx);

/// Canonical JSON of every block field except block_hash: sorted keys, no
/// whitespace, digests and signatures as lowercase hex.
std::string canonical_serialize(const Block& block);
Digest compute_block_hash(const Block& block);

/// Export form: canonical fields plus block_hash.
nlohmann::json to_json(const Block& block);
Block block_from_json(const nlohmann::json& j);

// ---- mining --------------------------------------------------------------

/// Deterministic proof-of-work: nonces are tried in ascending order from 0 and
/// the first whose block hash has >= difficulty leading zero bits is kept.
Block mine_block(std::vector<Transaction> transactions, std::uint64_t height,
                 const Digest& prev_hash, int difficulty, const AccountId& miner,
                 std::uint64_t nonce_bound = kDefaultNonceBound);

// ---- validation ----------------------------------------------------------

enum class RejectReason {
  None,
  BadHeight,
  PrevHashMismatch,
  HashMismatch,
  InsufficientWork,
  NegativeAmount,
  EndowmentOutsideGenesis,
  MissingContractRef,
  DuplicateTransaction,
  AccountKindConflict,
  BadSignature,
  InsufficientFunds,
};

std::string_view to_string(RejectReason reason);

struct ValidationVerdict {
  RejectReason reason = RejectReason::None;
  std::optional<std::uint64_t> height;  // failing height on reject
  std::string detail;

  bool accepted() const noexcept { return reason == RejectReason::None; }
  static ValidationVerdict accept() { return {}; }
  static ValidationVerdict reject(RejectReason r, std::uint64_t h, std::string detail) {
    return {r, h, std::move(detail)};
  }
};

struct ValidationOptions {
  /// nullptr skips authorization checks (offline verification without keys).
  const SignatureScheme* signatures = nullptr;
};

/// Locator of a committed transaction.
struct TxLocation {
  std::uint64_t height;
  std::size_t index;
};

/// Append-only chain with a materialized balance view.
class Chain {
 public:
  Chain() = default;

  const std::vector<Block>& blocks() const noexcept { return blocks_; }
  std::size_t size() const noexcept { return blocks_.size(); }
  bool empty() const noexcept { return blocks_.empty(); }
  Digest tip_hash() const { return blocks_.empty() ? kZeroDigest : blocks_.back().block_hash; }

  const std::map<AccountId, Cents>& balances() const noexcept { return balances_; }
  bool has_account(const AccountId& id) const { return balances_.contains(id); }
  bool has_transaction(const std::string& tx_id) const { return tx_ids_.contains(tx_id); }
  const std::map<std::string, AccountKind>& kinds() const noexcept { return kinds_; }
  const std::set<std::string>& tx_ids() const noexcept { return tx_ids_; }
  /// Kind of a known label, if any.
  std::optional<AccountKind> kind_of(const std::string& label) const;

  /// Committed transactions that reference a contract, in chain order.
  std::vector<const Transaction*> transactions_for_contract(const std::string& contract_id) const;

  Cents total_endowment() const noexcept { return endowment_total_; }

  /// Validates and appends; throws LedgerError(RejectedBlock) on reject.
  void append(Block block, const ValidationOptions& options = {});

  friend ValidationVerdict validate_block(const Block&, const Chain&, const ValidationOptions&);

 private:
  void apply(const Block& block);

  std::vector<Block> blocks_;
  std::map<AccountId, Cents> balances_;
  std::map<std::string, AccountKind> kinds_;
  std::set<std::string> tx_ids_;
  std::map<std::string, std::vector<TxLocation>> by_contract_;
  Cents endowment_total_ = 0;
};

ValidationVerdict validate_block(const Block& block, const Chain& chain,
                                 const ValidationOptions& options = {});

/// Returns a chain with the block appended; throws LedgerError(RejectedBlock).
Chain append_block(Chain chain, Block block, const ValidationOptions& options = {});

/// Replays every block against its prefix.
ValidationVerdict validate_chain(const std::vector<Block>& blocks,
                                 const ValidationOptions& options = {});

/// Throws LedgerError(UnknownAccount).
Cents balance_of(const Chain& chain, const AccountId& account);

// ---- export --------------------------------------------------------------

/// One block per line, in height order.
void write_chain_jsonl(const std::vector<Block>& blocks, std::ostream& out);
/// Throws LedgerError(MalformedExport) naming the offending line.
std::vector<Block> read_chain_jsonl(std::istream& in);

// ---- ledger with pending pool ---------------------------------------------

struct Endowment {
  AccountId issuer;  // the owning human
  AccountId recipient;
  Cents amount = 0;
};

struct LedgerConfig {
  int pow_difficulty = 0;
  std::size_t max_tx_per_block = 16;
  AccountId miner = AccountId::human("miner");
  std::uint64_t nonce_bound = kDefaultNonceBound;
};

/// Chain plus a pool of admitted-but-unmined transactions. Admission checks
/// signatures and funds against the effective (chain + pool) balances, so a
/// flushed pool always mines into valid blocks.
class Ledger {
 public:
  Ledger(const SignatureScheme& signatures, LedgerConfig config);

  /// Mines block 0 from endowment transactions. Endowments credit the
  /// recipient without debiting the issuer; this is the only minting point.
  const Block& create_genesis(const std::vector<Endowment>& endowments);

  /// Builds and signs a transaction with the next sequential id.
  Transaction make_transaction(const AccountId& from, const AccountId& to, Cents amount, Memo memo,
                               std::optional<std::string> contract_ref = std::nullopt);

  /// Admits a transaction to the pool; throws LedgerError on invalid input.
  void submit(const Transaction& tx);

  /// Mines every pending transaction into blocks of at most max_tx_per_block.
  std::vector<Block> flush();

  const Chain& chain() const noexcept { return chain_; }
  const std::vector<Transaction>& pending() const noexcept { return pending_; }
  const LedgerConfig& config() const noexcept { return config_; }
  const SignatureScheme& signatures() const noexcept { return signatures_; }

  /// Balance including pending transactions; unknown accounts read as 0.
  Cents effective_balance(const AccountId& account) const;
  const std::map<AccountId, Cents>& effective_balances() const noexcept { return effective_; }

 private:
  const SignatureScheme& signatures_;
  LedgerConfig config_;
  Chain chain_;
  std::vector<Transaction> pending_;
  std::map<AccountId, Cents> effective_;
  std::map<std::string, AccountKind> effective_kinds_;
  std::set<std::string> effective_ids_;
  std::uint64_t next_tx_ = 1;
};

}  // namespace roboecon
