#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "roboecon/econ.hpp"
#include "roboecon/scenario.hpp"
#include "roboecon/simulation.hpp"

namespace roboecon {

/// Closed-form comparison of manual and robotic cleaning.
struct EconSummary {
  ManualCost manual;
  RobotCost robot;
  BudgetShare manual_shares;
  BudgetShare robot_shares;
  DisplacementReport displacement;
};

EconSummary evaluate_econ(const EconParams& params);

struct CapabilitySpend {
  std::string capability;
  std::size_t settled = 0;
  Cents spend = 0;
  CostBuckets buckets;
};

struct SimulationSummary {
  std::size_t contracts = 0;
  std::map<std::string, std::size_t> by_state;
  Cents settled_spend = 0;
  CostBuckets buckets;
  BudgetShare shares;
  std::vector<CapabilitySpend> by_capability;
  std::size_t blocks = 0;
  std::string final_hash;
  bool replicas_converged = false;
  Cents genesis_total = 0;
  Cents final_total = 0;
  Tick end_time = 0;
  std::uint64_t events = 0;
  NetStats net;
  BusStats bus;
  std::vector<AgentOutcome> agents;
  std::vector<OwnerOutcome> owners;
  /// Set when the scenario carries cost models: settled spend and its
  /// decomposition equal the closed-form robot budget exactly.
  std::optional<bool> matches_closed_form;
};

struct ScenarioReport {
  std::string scenario;
  std::uint64_t seed = 0;
  std::optional<EconSummary> econ;
  std::optional<SimulationSummary> simulation;
};

/// Throws ConfigError when the scenario has no econ section.
ScenarioReport econ_only_report(const ScenarioConfig& config);

/// Splits every settled contract's price into cost buckets using the weights
/// of its capability. Throws EconError(IncompleteTrace) if any contract is
/// still open.
ScenarioReport simulate_and_decompose(const SimulationResult& result, const ScenarioConfig& config);

nlohmann::json to_json(const ScenarioReport& report);
/// Two-panel budget table (manual vs robot) plus the simulation summary.
std::string render_table(const ScenarioReport& report);

/// "$15,600.00" style rendering of integer cents.
std::string format_dollars(Cents cents);

}  // namespace roboecon
