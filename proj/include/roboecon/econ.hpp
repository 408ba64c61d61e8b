#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "roboecon/account.hpp"

namespace roboecon {

enum class EconErrc { InvariantViolation, ComponentMismatch, IncompleteTrace };

class EconError : public std::runtime_error {
 public:
  EconError(EconErrc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  EconErrc code() const noexcept { return code_; }

 private:
  EconErrc code_;
};

/// Manual cleaning priced per square metre per cleaning.
struct ManualCostModel {
  Cents unit_cost = 0;  // per m^2 per cleaning
  std::int64_t area_m2 = 0;
  std::int64_t frequency_per_week = 0;
  std::int64_t weeks_per_year = 0;
  Cents consumables_annual = 0;
};

struct RobotCostModel {
  std::int64_t maintenance_minutes_per_day = 0;
  Cents specialist_hourly_wage = 0;
  std::int64_t days_per_week = 0;
  std::int64_t weeks_per_year = 0;
  Cents consumables_repair_annual = 0;
  Cents robot_price = 0;
  std::int64_t depreciation_years = 1;
  /// Capital cost beyond straight-line depreciation (insurance, financing).
  Cents capital_carrying_annual = 0;
};

/// $0.10/m^2, 600 m^2, 5 cleanings a week, 52 weeks, $1,200 consumables.
ManualCostModel cleaner_manual_model();
/// 20 min/day at $30/h, 5 days, 52 weeks, $1,200 consumables and repair,
/// $45,000 robot over 4 years plus $550/yr carrying cost.
RobotCostModel cleaner_robot_model();

struct ManualCost {
  Cents total = 0;
  Cents labor = 0;
  Cents consumables = 0;
};

struct RobotCost {
  Cents total = 0;
  Cents labor = 0;
  Cents consumables = 0;
  Cents capital = 0;
};

/// total = unit_cost * area * frequency * weeks; labor is the residual after
/// consumables. Throws EconError(InvariantViolation) on negative inputs or
/// consumables exceeding the total.
ManualCost annual_manual_cost(const ManualCostModel& model);

/// labor = minutes/60 * wage * days * weeks; capital = price / years +
/// carrying. Fractional cents round half away from zero.
RobotCost annual_robot_cost(const RobotCostModel& model);

struct BudgetShare {
  double labor_share = 0.0;
  double consumables_share = 0.0;
  double capital_share = 0.0;
  bool degenerate = false;  // total was zero

  double sum() const noexcept { return labor_share + consumables_share + capital_share; }
};

/// Throws EconError(ComponentMismatch) unless the components add up to total.
BudgetShare budget_shares(Cents total, Cents labor, Cents consumables, Cents capital);
inline BudgetShare budget_shares(const ManualCost& c) { return budget_shares(c.total, c.labor, c.consumables, 0); }
inline BudgetShare budget_shares(const RobotCost& c) {
  return budget_shares(c.total, c.labor, c.consumables, c.capital);
}

struct DisplacementReport {
  Cents displaced_labor_cost = 0;
  Cents new_highskill_labor_cost = 0;
  Cents capital_retribution = 0;
  Cents net_cost_delta = 0;  // robot total - manual total
};

DisplacementReport displacement_report(const ManualCostModel& manual, const RobotCostModel& robot);

/// Relative weights for splitting spend into cost buckets.
struct CostWeights {
  std::int64_t labor = 0;
  std::int64_t consumables = 0;
  std::int64_t capital = 0;

  std::int64_t total() const noexcept { return labor + consumables + capital; }
};

struct CostBuckets {
  Cents labor = 0;
  Cents consumables = 0;
  Cents capital = 0;

  Cents total() const noexcept { return labor + consumables + capital; }
  bool operator==(const CostBuckets&) const = default;
};

/// Proportional split with largest-remainder rounding, so the buckets always
/// add back to amount exactly.
CostBuckets split_by_weights(Cents amount, const CostWeights& weights);

}  // namespace roboecon
