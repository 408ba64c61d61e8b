#include "roboecon/econ.hpp"

#include <algorithm>
#include <array>

namespace roboecon {

ManualCostModel cleaner_manual_model() {
  return ManualCostModel{.unit_cost = 10,
                         .area_m2 = 600,
                         .frequency_per_week = 5,
                         .weeks_per_year = 52,
                         .consumables_annual = 1'200'00};
}

RobotCostModel cleaner_robot_model() {
  return RobotCostModel{.maintenance_minutes_per_day = 20,
                        .specialist_hourly_wage = 30'00,
                        .days_per_week = 5,
                        .weeks_per_year = 52,
                        .consumables_repair_annual = 1'200'00,
                        .robot_price = 45'000'00,
                        .depreciation_years = 4,
                        .capital_carrying_annual = 550'00};
}

namespace {

Cents divide_rounded(__int128 num, __int128 den) {
  const bool negative = (num < 0) != (den < 0);
  if (num < 0) num = -num;
  if (den < 0) den = -den;
  __int128 q = (num + den / 2) / den;
  return static_cast<Cents>(negative ? -q : q);
}

void require_non_negative(std::int64_t v, const char* field) {
  if (v < 0) throw EconError(EconErrc::InvariantViolation, std::string(field) + " must be >= 0");
}

}  // namespace

ManualCost annual_manual_cost(const ManualCostModel& m) {
  require_non_negative(m.unit_cost, "unit_cost");
  require_non_negative(m.area_m2, "area_m2");
  require_non_negative(m.frequency_per_week, "frequency_per_week");
  require_non_negative(m.weeks_per_year, "weeks_per_year");
  require_non_negative(m.consumables_annual, "consumables_annual");
  ManualCost c;
  c.total = m.unit_cost * m.area_m2 * m.frequency_per_week * m.weeks_per_year;
  if (m.consumables_annual > c.total)
    throw EconError(EconErrc::InvariantViolation,
                    "consumables_annual " + std::to_string(m.consumables_annual) + " exceeds total " +
                        std::to_string(c.total));
  c.consumables = m.consumables_annual;
  c.labor = c.total - c.consumables;
  return c;
}

RobotCost annual_robot_cost(const RobotCostModel& m) {
  require_non_negative(m.maintenance_minutes_per_day, "maintenance_minutes_per_day");
  require_non_negative(m.specialist_hourly_wage, "specialist_hourly_wage");
  require_non_negative(m.days_per_week, "days_per_week");
  require_non_negative(m.weeks_per_year, "weeks_per_year");
  require_non_negative(m.consumables_repair_annual, "consumables_repair_annual");
  require_non_negative(m.robot_price, "robot_price");
  require_non_negative(m.capital_carrying_annual, "capital_carrying_annual");
  if (m.depreciation_years < 1)
    throw EconError(EconErrc::InvariantViolation, "depreciation_years must be >= 1");
  RobotCost c;
  c.labor = divide_rounded(static_cast<__int128>(m.maintenance_minutes_per_day) * m.specialist_hourly_wage *
                               m.days_per_week * m.weeks_per_year,
                           60);
  c.consumables = m.consumables_repair_annual;
  c.capital = divide_rounded(m.robot_price, m.depreciation_years) + m.capital_carrying_annual;
  c.total = c.labor + c.consumables + c.capital;
  return c;
}

BudgetShare budget_shares(Cents total, Cents labor, Cents consumables, Cents capital) {
  if (labor + consumables + capital != total)
    throw EconError(EconErrc::ComponentMismatch,
                    "components sum to " + std::to_string(labor + consumables + capital) + ", total is " +
                        std::to_string(total));
  if (total == 0) return BudgetShare{0.0, 0.0, 0.0, true};
  const auto t = static_cast<double>(total);
  return BudgetShare{static_cast<double>(labor) / t, static_cast<double>(consumables) / t,
                     static_cast<double>(capital) / t, false};
}

DisplacementReport displacement_report(const ManualCostModel& manual, const RobotCostModel& robot) {
  const auto m = annual_manual_cost(manual);
  const auto r = annual_robot_cost(robot);
  return DisplacementReport{.displaced_labor_cost = m.labor,
                            .new_highskill_labor_cost = r.labor,
                            .capital_retribution = r.capital,
                            .net_cost_delta = r.total - m.total};
}

CostBuckets split_by_weights(Cents amount, const CostWeights& w) {
  if (amount < 0) throw EconError(EconErrc::InvariantViolation, "cannot split a negative amount");
  if (w.labor < 0 || w.consumables < 0 || w.capital < 0)
    throw EconError(EconErrc::InvariantViolation, "cost weights must be >= 0");
  const std::int64_t total = w.total();
  if (total == 0) {
    if (amount != 0) throw EconError(EconErrc::InvariantViolation, "all cost weights are zero");
    return {};
  }
  const std::array<std::int64_t, 3> weights{w.labor, w.consumables, w.capital};
  std::array<Cents, 3> parts{};
  std::array<__int128, 3> remainders{};
  Cents assigned = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    const __int128 num = static_cast<__int128>(amount) * weights[i];
    parts[i] = static_cast<Cents>(num / total);
    remainders[i] = num % total;
    assigned += parts[i];
  }
  std::array<std::size_t, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainders[a] > remainders[b]; });
  for (std::size_t k = 0; assigned < amount; ++k, ++assigned) ++parts[order[k % 3]];
  return CostBuckets{parts[0], parts[1], parts[2]};
}

}  // namespace roboecon
