#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "roboecon/agents.hpp"
#include "roboecon/econ.hpp"
#include "roboecon/netsim.hpp"

namespace roboecon {

inline constexpr std::string_view kScenarioSchema = "roboecon.scenario/1";

/// Config problem tied to a JSON field path and, for syntax errors, a line.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message, std::optional<std::size_t> line = std::nullopt);
  const std::string& field() const noexcept { return field_; }
  std::optional<std::size_t> line() const noexcept { return line_; }

 private:
  std::string field_;
  std::optional<std::size_t> line_;
};

struct OwnerSpec {
  std::string label;
  std::vector<AssetId> assets;
};

struct RobotSpec {
  std::string label;
  std::string owner;
  Cents endowment = 0;
  RolePolicy role = RolePolicy::Dual;
  std::set<std::string> capabilities;
  Cents wallet_floor = 0;
  double bid_margin = 0.0;
  std::size_t capacity = 1;
};

struct CapabilitySpec {
  Cents unit_cost = 0;  // per tick of work
  CostWeights cost_weights{1, 0, 0};
};

struct PeerMix {
  std::size_t honest = 3;
  std::size_t faulty_reject = 0;

  std::size_t total() const noexcept { return honest + faulty_reject; }
};

struct LedgerParams {
  std::size_t max_tx_per_block = 16;
  Tick block_interval = 5;
};

struct MarketParams {
  Tick bid_window = 10;
  Tick request_timeout = 60;
  Tick vote_timeout = 240;
  Tick vote_recheck_interval = 5;
  int vote_recheck_limit = 8;
};

/// Inclusive integer range; lo == hi for a fixed value.
struct IntRange {
  std::int64_t lo = 0;
  std::int64_t hi = 0;
};

/// Emits `count` tasks at start + k * interval for every slot k whose
/// position within a `cycle`-slot period is below `active` (e.g. 5 of 7 days).
struct TaskSchedule {
  Tick start = 0;
  Tick interval = 1;
  std::size_t count = 1;
  std::size_t cycle = 1;
  std::size_t active = 1;

  std::vector<Tick> release_times() const;
};

struct TaskStream {
  std::string customer;
  std::string task_kind;
  std::string capability;
  std::map<std::string, double> parameters;
  IntRange price;
  IntRange work_duration;
  double success_probability = 1.0;
  Tick deadline_offset = 1;
  TaskSchedule schedule;
};

struct EconParams {
  ManualCostModel manual;
  RobotCostModel robot;
};

struct ScenarioConfig {
  std::string name = "scenario";
  std::uint64_t seed = 0;
  Tick duration = 0;
  double tick_seconds = 1.0;
  std::vector<OwnerSpec> owners;
  std::vector<RobotSpec> robots;
  std::map<std::string, CapabilitySpec> capabilities;
  PeerMix peers;
  LinkModel link;
  int pow_difficulty = 0;
  LedgerParams ledger;
  MarketParams market;
  std::vector<TaskStream> contracts;
  std::optional<EconParams> econ;

  /// Cross-field checks; throws ConfigError.
  void validate() const;
};

/// Parses and validates; unknown fields are errors.
ScenarioConfig parse_scenario(std::string_view text);
ScenarioConfig load_scenario(const std::filesystem::path& path);

/// Canonical cleaner economy: one customer robot buying 260 daily cleanings a
/// year from one provider robot at the closed-form robot cost per cleaning.
ScenarioConfig cleaner_scenario(std::uint64_t seed = 42);

}  // namespace roboecon
