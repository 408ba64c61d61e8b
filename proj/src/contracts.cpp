#include "roboecon/contracts.hpp"

#include <algorithm>
#include <cstdio>

namespace roboecon {

using nlohmann::json;

std::string_view to_string(ContractState state) {
  switch (state) {
    case ContractState::Created: return "Created";
    case ContractState::Accepted: return "Accepted";
    case ContractState::Executed: return "Executed";
    case ContractState::Delivered: return "Delivered";
    case ContractState::Validated: return "Validated";
    case ContractState::Rejected: return "Rejected";
    case ContractState::Settled: return "Settled";
    case ContractState::Refunded: return "Refunded";
    case ContractState::Expired: return "Expired";
  }
  return "Created";
}

bool is_terminal(ContractState state) {
  return state == ContractState::Settled || state == ContractState::Refunded ||
         state == ContractState::Expired;
}

bool holds_escrow(ContractState state) {
  return state == ContractState::Accepted || state == ContractState::Executed ||
         state == ContractState::Delivered || state == ContractState::Validated ||
         state == ContractState::Rejected;
}

std::string_view to_string(ContractErrc code) {
  switch (code) {
    case ContractErrc::UnknownContract: return "UnknownContract";
    case ContractErrc::InvalidSpec: return "InvalidSpec";
    case ContractErrc::InsufficientFunds: return "InsufficientFunds";
    case ContractErrc::NonRobotCustomer: return "NonRobotCustomer";
    case ContractErrc::NonRobotProvider: return "NonRobotProvider";
    case ContractErrc::SelfDealing: return "SelfDealing";
    case ContractErrc::CapabilityMismatch: return "CapabilityMismatch";
    case ContractErrc::Expired: return "Expired";
    case ContractErrc::AlreadyAccepted: return "AlreadyAccepted";
    case ContractErrc::WrongCaller: return "WrongCaller";
    case ContractErrc::NotAccepted: return "NotAccepted";
    case ContractErrc::NotExecuted: return "NotExecuted";
    case ContractErrc::NotDelivered: return "NotDelivered";
    case ContractErrc::NotValidated: return "NotValidated";
    case ContractErrc::NotRefundable: return "NotRefundable";
    case ContractErrc::NoPeers: return "NoPeers";
    case ContractErrc::Terminal: return "Terminal";
  }
  return "UnknownContract";
}

void ServiceSpec::validate() const {
  if (!(success_probability >= 0.0 && success_probability <= 1.0))
    throw ContractError(ContractErrc::InvalidSpec, "success_probability outside [0, 1]");
  if (work_duration == 0) throw ContractError(ContractErrc::InvalidSpec, "work_duration must be positive");
  if (required_capability.empty())
    throw ContractError(ContractErrc::InvalidSpec, "required_capability is empty");
}

namespace {

json spec_json(const ServiceSpec& spec) {
  json params = json::object();
  for (const auto& [k, v] : spec.parameters) params[k] = v;
  return json{{"task_kind", spec.task_kind},
              {"parameters", params},
              {"required_capability", spec.required_capability},
              {"work_duration", spec.work_duration},
              {"success_probability", spec.success_probability}};
}

[[noreturn]] void fail(ContractErrc code, const SmartContract& c, const std::string& why) {
  throw ContractError(code, c.contract_id + ": " + why);
}

}  // namespace

std::string terms_payload(const SmartContract& c) {
  json j{{"contract_id", c.contract_id},
         {"customer", to_json(c.customer)},
         {"escrow_account", to_json(c.escrow_account)},
         {"price", c.price},
         {"deadline", c.deadline},
         {"spec", spec_json(c.spec)}};
  return j.dump();
}

std::string outcome_payload(const std::string& contract_id, bool success, const Digest& evidence) {
  json j{{"contract_id", contract_id}, {"success", success}, {"evidence_digest", to_hex(evidence)}};
  return j.dump();
}

ServiceOutcome make_outcome(const std::string& contract_id, const AccountId& provider, bool success,
                            std::string report, const SignatureScheme& signatures) {
  ServiceOutcome out;
  out.success = success;
  out.report = std::move(report);
  out.evidence_digest = sha256(out.report);
  out.provider_signature =
      signatures.sign(provider, outcome_payload(contract_id, success, out.evidence_digest));
  return out;
}

VoteCheck check_contract(const SmartContract& c, const Chain& replica,
                         const SignatureScheme& signatures) {
  VoteCheck v;
  v.signatures_ok = signatures.verify(c.customer, terms_payload(c), c.terms_signature);
  if (c.outcome && c.provider)
    v.signatures_ok = v.signatures_ok &&
                      signatures.verify(*c.provider,
                                        outcome_payload(c.contract_id, c.outcome->success,
                                                        c.outcome->evidence_digest),
                                        c.outcome->provider_signature);
  else
    v.signatures_ok = false;

  for (const Transaction* tx : replica.transactions_for_contract(c.contract_id)) {
    if (tx->memo == Memo::Escrow && tx->from == c.customer && tx->to == c.escrow_account &&
        tx->amount == c.price) {
      v.escrow_on_chain = true;
      break;
    }
  }

  v.evidence_ok = c.outcome && c.outcome->success && sha256(c.outcome->report) == c.outcome->evidence_digest;
  return v;
}

bool cast_vote(const PeerNode& peer, const SmartContract& contract, const SignatureScheme& signatures) {
  if (peer.honesty() == Honesty::FaultyReject) return false;
  return check_contract(contract, peer.replica(), signatures).approve();
}

// ---- book --------------------------------------------------------------------

ContractBook::ContractBook(Ledger& ledger) : ledger_(ledger) {}

const SmartContract& ContractBook::get(const std::string& id) const {
  auto it = contracts_.find(id);
  if (it == contracts_.end()) throw ContractError(ContractErrc::UnknownContract, "unknown contract " + id);
  return it->second;
}

SmartContract& ContractBook::mutable_get(const std::string& id) {
  return const_cast<SmartContract&>(std::as_const(*this).get(id));
}

void ContractBook::require_live(const SmartContract& c) const {
  if (is_terminal(c.state))
    fail(ContractErrc::Terminal, c, "contract is " + std::string(to_string(c.state)));
}

void ContractBook::record(SmartContract& c, Tick now, const AccountId& actor, ProtocolStep step,
                          ContractState next, std::string detail) {
  if (!c.event_log.empty() && now < c.event_log.back().time)
    throw std::logic_error(c.contract_id + ": event time went backwards");
  c.state = next;
  c.event_log.push_back(ContractEvent{now, actor, step, next, std::move(detail)});
  if (observer_) observer_(c, c.event_log.back());
}

const SmartContract& ContractBook::create_contract(const AccountId& customer, ServiceSpec spec,
                                                   Cents price, Tick deadline, Tick now) {
  if (customer.kind != AccountKind::Robot)
    throw ContractError(ContractErrc::NonRobotCustomer, to_string(customer) + " is not a robot");
  spec.validate();
  if (price < 0) throw ContractError(ContractErrc::InvalidSpec, "negative price");
  if (deadline <= now) throw ContractError(ContractErrc::Expired, "deadline not in the future");
  const Cents balance = ledger_.effective_balance(customer);
  if (balance < price)
    throw ContractError(ContractErrc::InsufficientFunds, to_string(customer) + " has " +
                                                             std::to_string(balance) + ", price " +
                                                             std::to_string(price));
  char buf[32];
  std::snprintf(buf, sizeof buf, "c-%06llu", static_cast<unsigned long long>(next_id_++));
  SmartContract c;
  c.contract_id = buf;
  c.customer = customer;
  c.escrow_account = AccountId::contract("escrow/" + c.contract_id);
  c.price = price;
  c.spec = std::move(spec);
  c.deadline = deadline;
  c.terms_signature = ledger_.signatures().sign(customer, terms_payload(c));
  auto& stored = contracts_.emplace(c.contract_id, std::move(c)).first->second;
  record(stored, now, customer, ProtocolStep::Create, ContractState::Created,
         "price " + std::to_string(price) + " for " + stored.spec.task_kind);
  return stored;
}

const SmartContract& ContractBook::accept_contract(const std::string& id, const AccountId& provider,
                                                   const std::set<std::string>& capabilities, Tick now,
                                                   std::optional<Cents> bid) {
  auto& c = mutable_get(id);
  require_live(c);
  if (c.state != ContractState::Created) fail(ContractErrc::AlreadyAccepted, c, "already accepted");
  if (provider.kind != AccountKind::Robot)
    fail(ContractErrc::NonRobotProvider, c, to_string(provider) + " is not a robot");
  if (provider == c.customer) fail(ContractErrc::SelfDealing, c, "provider is the customer");
  if (!capabilities.contains(c.spec.required_capability))
    fail(ContractErrc::CapabilityMismatch, c,
         to_string(provider) + " lacks capability " + c.spec.required_capability);
  if (now >= c.deadline) fail(ContractErrc::Expired, c, "deadline passed");

  auto tx = ledger_.make_transaction(c.customer, c.escrow_account, c.price, Memo::Escrow, c.contract_id);
  try {
    ledger_.submit(tx);
  } catch (const LedgerError& e) {
    if (e.code() == LedgerErrc::InsufficientFunds) fail(ContractErrc::InsufficientFunds, c, e.what());
    throw;
  }
  c.provider = provider;
  c.winning_bid = bid;
  c.escrow_tx = tx.tx_id;
  record(c, now, provider, ProtocolStep::Accept, ContractState::Accepted, "escrow " + tx.tx_id);
  return c;
}

AwardResult ContractBook::resolve_acceptances(const std::string& id, std::vector<Bid> bids, Tick now) {
  std::sort(bids.begin(), bids.end(), [](const Bid& a, const Bid& b) {
    if (a.amount != b.amount) return a.amount < b.amount;
    return a.provider.label < b.provider.label;
  });
  AwardResult result;
  for (const auto& bid : bids) {
    try {
      accept_contract(id, bid.provider, bid.capabilities, now, bid.amount);
      result.winner = bid.provider;
    } catch (const ContractError& e) {
      result.losers.emplace_back(bid.provider, e.code());
    }
  }
  return result;
}

const SmartContract& ContractBook::submit_result(const std::string& id, const AccountId& caller,
                                                 ServiceOutcome outcome, Tick now) {
  auto& c = mutable_get(id);
  require_live(c);
  if (c.state != ContractState::Accepted) fail(ContractErrc::NotAccepted, c, "not in Accepted state");
  if (!c.provider || caller != *c.provider) fail(ContractErrc::WrongCaller, c, to_string(caller) + " is not the provider");
  if (now >= c.deadline) fail(ContractErrc::Expired, c, "deadline passed");
  const bool ok = outcome.success;
  const auto digest = to_hex(outcome.evidence_digest);
  c.outcome = std::move(outcome);
  record(c, now, caller, ProtocolStep::Execute, ContractState::Executed,
         std::string(ok ? "success" : "failure") + " evidence " + digest);
  return c;
}

const SmartContract& ContractBook::deliver_response(const std::string& id, Tick now) {
  auto& c = mutable_get(id);
  require_live(c);
  if (c.state != ContractState::Executed) fail(ContractErrc::NotExecuted, c, "not in Executed state");
  if (now >= c.deadline) fail(ContractErrc::Expired, c, "deadline passed");
  record(c, now, c.customer, ProtocolStep::Deliver, ContractState::Delivered, "response received");
  return c;
}

const SmartContract& ContractBook::quorum_validate(const std::string& id, std::span<const PeerNode> peers,
                                                   Tick now) {
  const auto& c = get(id);
  require_live(c);
  if (c.state != ContractState::Delivered) fail(ContractErrc::NotDelivered, c, "not in Delivered state");
  if (peers.empty()) fail(ContractErrc::NoPeers, c, "no validator peers");
  std::size_t approvals = 0;
  for (const auto& peer : peers)
    if (cast_vote(peer, c, ledger_.signatures())) ++approvals;
  return apply_quorum(id, approvals, peers.size(), now);
}

const SmartContract& ContractBook::apply_quorum(const std::string& id, std::size_t approvals,
                                                std::size_t total, Tick now) {
  auto& c = mutable_get(id);
  require_live(c);
  if (c.state != ContractState::Delivered) fail(ContractErrc::NotDelivered, c, "not in Delivered state");
  if (total == 0) fail(ContractErrc::NoPeers, c, "no validator peers");
  const std::string tally = std::to_string(approvals) + "/" + std::to_string(total) + " approve";
  if (strict_majority(approvals, total))
    record(c, now, c.escrow_account, ProtocolStep::Validate, ContractState::Validated, tally);
  else
    record(c, now, c.escrow_account, ProtocolStep::PeerReject, ContractState::Rejected, tally);
  return c;
}

const SmartContract& ContractBook::settle(const std::string& id, Tick now) {
  auto& c = mutable_get(id);
  require_live(c);
  if (c.state != ContractState::Validated) fail(ContractErrc::NotValidated, c, "not in Validated state");
  auto tx = ledger_.make_transaction(c.escrow_account, *c.provider, c.price, Memo::Settlement, c.contract_id);
  ledger_.submit(tx);
  c.payout_tx = tx.tx_id;
  record(c, now, c.escrow_account, ProtocolStep::Pay, ContractState::Settled, "settlement " + tx.tx_id);
  return c;
}

const SmartContract& ContractBook::refund(const std::string& id, Tick now) {
  auto& c = mutable_get(id);
  require_live(c);
  const bool past_deadline = now >= c.deadline;
  if (c.state == ContractState::Created && past_deadline) {
    record(c, now, c.escrow_account, ProtocolStep::Expire, ContractState::Expired, "no provider before deadline");
    return c;
  }
  const bool in_progress = c.state == ContractState::Accepted || c.state == ContractState::Executed ||
                           c.state == ContractState::Delivered;
  const bool refundable = c.state == ContractState::Rejected || (in_progress && past_deadline);
  if (!refundable)
    fail(ContractErrc::NotRefundable, c, "cannot refund from " + std::string(to_string(c.state)));
  const std::string why = c.state == ContractState::Rejected ? "peers rejected" : "deadline passed";
  auto tx = ledger_.make_transaction(c.escrow_account, c.customer, c.price, Memo::Refund, c.contract_id);
  ledger_.submit(tx);
  c.payout_tx = tx.tx_id;
  record(c, now, c.escrow_account, ProtocolStep::Refund, ContractState::Refunded, why + ", refund " + tx.tx_id);
  return c;
}

}  // namespace roboecon
