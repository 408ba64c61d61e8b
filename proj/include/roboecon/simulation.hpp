#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "roboecon/bus.hpp"
#include "roboecon/contracts.hpp"
#include "roboecon/ledger.hpp"
#include "roboecon/scenario.hpp"

namespace roboecon {

struct AgentOutcome {
  std::string label;
  std::string owner;
  RolePolicy role = RolePolicy::Dual;
  Cents final_balance = 0;
  std::size_t contracts_created = 0;
  std::size_t tasks_skipped = 0;  // released while the wallet could not cover them
  std::size_t jobs_settled = 0;   // as provider
  Cents spent = 0;                // settled purchases
  Cents earned = 0;               // settled sales
  Cents swept = 0;                // moved to the owner
};

struct OwnerOutcome {
  std::string label;
  Cents balance = 0;
  std::vector<std::string> robots;
  std::vector<AssetId> assets;
};

struct SimulationResult {
  std::string scenario;
  std::uint64_t seed = 0;
  Tick end_time = 0;
  std::uint64_t events = 0;
  std::vector<SmartContract> contracts;  // by contract id
  std::vector<Block> chain;
  Digest final_hash{};
  std::map<AccountId, Cents> balances;
  Cents genesis_total = 0;
  std::vector<AgentOutcome> agents;
  std::vector<OwnerOutcome> owners;
  NetStats net;
  BusStats bus;
  bool replicas_converged = false;

  std::size_t count(ContractState state) const;
  /// Sum of prices of Settled contracts.
  Cents settled_spend() const;
};

/// Runs the scenario until the event queue drains. Tasks are released only
/// before config.duration; contracts already open run to a terminal state.
///
/// When `trace` is given, one JSON object per line is written for every fired
/// event and every contract step. Throws SimError(ScenarioFatal) when a block
/// cannot be delivered or a runtime invariant (conservation, escrow
/// reconciliation, human-only ownership) is violated.
SimulationResult run_simulation(const ScenarioConfig& config, std::ostream* trace = nullptr);

}  // namespace roboecon
