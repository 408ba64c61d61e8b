#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "roboecon/ledger.hpp"
#include "roboecon/netsim.hpp"

namespace roboecon {

struct ServiceSpec {
  std::string task_kind;
  std::map<std::string, double> parameters;
  std::string required_capability;
  Tick work_duration = 1;
  double success_probability = 1.0;

  /// Throws ContractError(InvalidSpec).
  void validate() const;
};

struct ServiceOutcome {
  bool success = false;
  std::string report;       // provider-generated work report
  Digest evidence_digest{};  // SHA-256 of report
  Bytes provider_signature;  // over the outcome payload
};

enum class ContractState {
  Created,
  Accepted,
  Executed,
  Delivered,
  Validated,
  Rejected,
  Settled,
  Refunded,
  Expired,
};

std::string_view to_string(ContractState state);
bool is_terminal(ContractState state);
/// States in which the escrow account must hold exactly the price.
bool holds_escrow(ContractState state);

/// Protocol steps 1..6 of a robot-to-robot interaction; failure exits are negative.
enum class ProtocolStep : int {
  Create = 1,
  Accept = 2,
  Execute = 3,
  Deliver = 4,
  Validate = 5,
  Pay = 6,
  PeerReject = -1,
  Refund = -2,
  Expire = -3,
};

inline bool is_failure(ProtocolStep step) { return static_cast<int>(step) < 0; }

struct ContractEvent {
  Tick time = 0;
  AccountId actor;
  ProtocolStep step = ProtocolStep::Create;
  ContractState state_after = ContractState::Created;
  std::string detail;
};

struct SmartContract {
  std::string contract_id;
  AccountId customer;
  std::optional<AccountId> provider;
  AccountId escrow_account;
  Cents price = 0;
  ServiceSpec spec;
  ContractState state = ContractState::Created;
  Tick deadline = 0;
  std::vector<ContractEvent> event_log;

  Bytes terms_signature;  // customer's signature over the terms
  std::optional<Cents> winning_bid;
  std::optional<ServiceOutcome> outcome;
  std::optional<std::string> escrow_tx;
  std::optional<std::string> payout_tx;  // settlement or refund
};

enum class ContractErrc {
  UnknownContract,
  InvalidSpec,
  InsufficientFunds,
  NonRobotCustomer,
  NonRobotProvider,
  SelfDealing,
  CapabilityMismatch,
  Expired,
  AlreadyAccepted,
  WrongCaller,
  NotAccepted,
  NotExecuted,
  NotDelivered,
  NotValidated,
  NotRefundable,
  NoPeers,
  Terminal,
};

std::string_view to_string(ContractErrc code);

class ContractError : public std::runtime_error {
 public:
  ContractError(ContractErrc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ContractErrc code() const noexcept { return code_; }

 private:
  ContractErrc code_;
};

/// Canonical bytes the customer signs at creation.
std::string terms_payload(const SmartContract& contract);
/// Canonical bytes the provider signs when submitting a result.
std::string outcome_payload(const std::string& contract_id, bool success, const Digest& evidence);

ServiceOutcome make_outcome(const std::string& contract_id, const AccountId& provider, bool success,
                            std::string report, const SignatureScheme& signatures);

/// The three checks an honest validator performs on a delivered contract.
struct VoteCheck {
  bool signatures_ok = false;
  bool escrow_on_chain = false;
  bool evidence_ok = false;

  bool approve() const noexcept { return signatures_ok && escrow_on_chain && evidence_ok; }
};

VoteCheck check_contract(const SmartContract& contract, const Chain& replica,
                         const SignatureScheme& signatures);
/// FaultyReject peers always vote no; honest peers vote per check_contract.
bool cast_vote(const PeerNode& peer, const SmartContract& contract, const SignatureScheme& signatures);
/// approvals > total / 2
constexpr bool strict_majority(std::size_t approvals, std::size_t total) {
  return 2 * approvals > total;
}

struct Bid {
  AccountId provider;
  Cents amount = 0;
  std::set<std::string> capabilities;
};

struct AwardResult {
  std::optional<AccountId> winner;
  /// Every other bidder with the error its acceptance attempt produced.
  std::vector<std::pair<AccountId, ContractErrc>> losers;
};

/// Registry and executor of every contract in a simulation. Money moves only
/// through the ledger: escrow at acceptance, then exactly one of settlement or
/// refund.
class ContractBook {
 public:
  using Observer = std::function<void(const SmartContract&, const ContractEvent&)>;

  explicit ContractBook(Ledger& ledger);

  const SmartContract& create_contract(const AccountId& customer, ServiceSpec spec, Cents price,
                                       Tick deadline, Tick now);

  /// Step 2. Funds escrow from the customer.
  const SmartContract& accept_contract(const std::string& id, const AccountId& provider,
                                       const std::set<std::string>& capabilities, Tick now,
                                       std::optional<Cents> bid = std::nullopt);

  /// Concurrent acceptances in one tick: tried in (bid, provider label) order,
  /// the first success wins and every later bidder gets AlreadyAccepted.
  AwardResult resolve_acceptances(const std::string& id, std::vector<Bid> bids, Tick now);

  const SmartContract& submit_result(const std::string& id, const AccountId& caller,
                                     ServiceOutcome outcome, Tick now);
  const SmartContract& deliver_response(const std::string& id, Tick now);

  /// Polls every peer synchronously and applies the strict-majority rule.
  const SmartContract& quorum_validate(const std::string& id, std::span<const PeerNode> peers,
                                       Tick now);
  /// Applies an already-collected tally.
  const SmartContract& apply_quorum(const std::string& id, std::size_t approvals, std::size_t total,
                                    Tick now);

  const SmartContract& settle(const std::string& id, Tick now);
  const SmartContract& refund(const std::string& id, Tick now);

  const SmartContract& get(const std::string& id) const;
  const std::map<std::string, SmartContract>& contracts() const noexcept { return contracts_; }
  const SignatureScheme& signatures() const noexcept { return ledger_.signatures(); }

  void set_observer(Observer observer) { observer_ = std::move(observer); }

 private:
  SmartContract& mutable_get(const std::string& id);
  void require_live(const SmartContract& c) const;
  void record(SmartContract& c, Tick now, const AccountId& actor, ProtocolStep step,
              ContractState next, std::string detail);

  Ledger& ledger_;
  std::map<std::string, SmartContract> contracts_;
  std::uint64_t next_id_ = 1;
  Observer observer_;
};

}  // namespace roboecon
