#include "roboecon/report.hpp"

#include <cstdio>
#include <sstream>

namespace roboecon {

using nlohmann::json;

EconSummary evaluate_econ(const EconParams& p) {
  EconSummary s;
  s.manual = annual_manual_cost(p.manual);
  s.robot = annual_robot_cost(p.robot);
  s.manual_shares = budget_shares(s.manual);
  s.robot_shares = budget_shares(s.robot);
  s.displacement = displacement_report(p.manual, p.robot);
  return s;
}

ScenarioReport econ_only_report(const ScenarioConfig& config) {
  if (!config.econ) throw ConfigError("econ", "scenario has no econ section");
  ScenarioReport r;
  r.scenario = config.name;
  r.seed = config.seed;
  r.econ = evaluate_econ(*config.econ);
  return r;
}

ScenarioReport simulate_and_decompose(const SimulationResult& result, const ScenarioConfig& config) {
  ScenarioReport r;
  r.scenario = result.scenario;
  r.seed = result.seed;
  if (config.econ) r.econ = evaluate_econ(*config.econ);

  SimulationSummary s;
  std::map<std::string, CapabilitySpend> per_cap;
  for (const auto& c : result.contracts) {
    if (!is_terminal(c.state))
      throw EconError(EconErrc::IncompleteTrace, c.contract_id + " is still " + std::string(to_string(c.state)));
    ++s.by_state[std::string(to_string(c.state))];
    if (c.state != ContractState::Settled) continue;
    auto& cap = per_cap[c.spec.required_capability];
    cap.capability = c.spec.required_capability;
    ++cap.settled;
    cap.spend += c.price;
  }
  s.contracts = result.contracts.size();
  for (auto& [name, cap] : per_cap) {
    auto it = config.capabilities.find(name);
    if (it == config.capabilities.end())
      throw EconError(EconErrc::IncompleteTrace, "no cost structure for capability " + name);
    cap.buckets = split_by_weights(cap.spend, it->second.cost_weights);
    s.settled_spend += cap.spend;
    s.buckets.labor += cap.buckets.labor;
    s.buckets.consumables += cap.buckets.consumables;
    s.buckets.capital += cap.buckets.capital;
    s.by_capability.push_back(cap);
  }
  s.shares = budget_shares(s.settled_spend, s.buckets.labor, s.buckets.consumables, s.buckets.capital);
  s.blocks = result.chain.size();
  s.final_hash = to_hex(result.final_hash);
  s.replicas_converged = result.replicas_converged;
  s.genesis_total = result.genesis_total;
  for (const auto& [id, v] : result.balances) s.final_total += v;
  s.end_time = result.end_time;
  s.events = result.events;
  s.net = result.net;
  s.bus = result.bus;
  s.agents = result.agents;
  s.owners = result.owners;
  if (r.econ) {
    const auto& robot = r.econ->robot;
    s.matches_closed_form = s.settled_spend == robot.total &&
                            s.buckets == CostBuckets{robot.labor, robot.consumables, robot.capital};
  }
  r.simulation = std::move(s);
  return r;
}

namespace {

json shares_json(const BudgetShare& s) {
  return json{{"labor", s.labor_share},
              {"consumables", s.consumables_share},
              {"capital", s.capital_share},
              {"degenerate", s.degenerate}};
}

json buckets_json(const CostBuckets& b) {
  return json{{"labor", b.labor}, {"consumables", b.consumables}, {"capital", b.capital}, {"total", b.total()}};
}

json econ_json(const EconSummary& e) {
  return json{
      {"manual",
       {{"total", e.manual.total},
        {"labor", e.manual.labor},
        {"consumables", e.manual.consumables},
        {"capital", 0},
        {"shares", shares_json(e.manual_shares)}}},
      {"robot",
       {{"total", e.robot.total},
        {"labor", e.robot.labor},
        {"consumables", e.robot.consumables},
        {"capital", e.robot.capital},
        {"shares", shares_json(e.robot_shares)}}},
      {"displacement",
       {{"displaced_labor_cost", e.displacement.displaced_labor_cost},
        {"new_highskill_labor_cost", e.displacement.new_highskill_labor_cost},
        {"capital_retribution", e.displacement.capital_retribution},
        {"net_cost_delta", e.displacement.net_cost_delta}}},
  };
}

json simulation_json(const SimulationSummary& s) {
  json caps = json::array();
  for (const auto& c : s.by_capability)
    caps.push_back(json{{"capability", c.capability}, {"settled", c.settled}, {"spend", c.spend},
                        {"buckets", buckets_json(c.buckets)}});
  json agents = json::array();
  for (const auto& a : s.agents)
    agents.push_back(json{{"label", a.label},
                          {"owner", a.owner},
                          {"role", std::string(to_string(a.role))},
                          {"final_balance", a.final_balance},
                          {"contracts_created", a.contracts_created},
                          {"tasks_skipped", a.tasks_skipped},
                          {"jobs_settled", a.jobs_settled},
                          {"spent", a.spent},
                          {"earned", a.earned},
                          {"swept", a.swept}});
  json owners = json::array();
  for (const auto& o : s.owners)
    owners.push_back(json{{"label", o.label}, {"balance", o.balance}, {"robots", o.robots}, {"assets", o.assets}});
  json out{
      {"contracts", s.contracts},
      {"by_state", s.by_state},
      {"settled_spend", s.settled_spend},
      {"buckets", buckets_json(s.buckets)},
      {"shares", shares_json(s.shares)},
      {"by_capability", caps},
      {"chain", {{"blocks", s.blocks}, {"final_hash", s.final_hash}, {"replicas_converged", s.replicas_converged}}},
      {"conservation", {{"genesis_total", s.genesis_total}, {"final_total", s.final_total}}},
      {"end_time", s.end_time},
      {"events", s.events},
      {"network",
       {{"sends", s.net.sends},
        {"delivered", s.net.delivered},
        {"dropped", s.net.dropped},
        {"retransmitted", s.net.retransmitted}}},
      {"bus",
       {{"publishes", s.bus.publishes},
        {"topic_deliveries", s.bus.topic_deliveries},
        {"requests", s.bus.requests},
        {"replies", s.bus.replies},
        {"timeouts", s.bus.timeouts}}},
      {"agents", agents},
      {"owners", owners},
  };
  if (s.matches_closed_form) out["matches_closed_form"] = *s.matches_closed_form;
  return out;
}

std::string percent(double share) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%6.2f%%", share * 100.0);
  return buf;
}

std::string pad_left(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::string pad_right(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

}  // namespace

std::string format_dollars(Cents cents) {
  const bool negative = cents < 0;
  const auto magnitude = static_cast<unsigned long long>(negative ? -cents : cents);
  std::string whole = std::to_string(magnitude / 100);
  for (int i = static_cast<int>(whole.size()) - 3; i > 0; i -= 3) whole.insert(static_cast<std::size_t>(i), ",");
  char frac[4];
  std::snprintf(frac, sizeof frac, "%02llu", magnitude % 100);
  return (negative ? "-$" : "$") + whole + "." + frac;
}

json to_json(const ScenarioReport& r) {
  json out{{"scenario", r.scenario}, {"seed", r.seed}};
  if (r.econ) out["econ"] = econ_json(*r.econ);
  if (r.simulation) out["simulation"] = simulation_json(*r.simulation);
  return out;
}

std::string render_table(const ScenarioReport& r) {
  std::ostringstream out;
  out << "scenario " << r.scenario << " (seed " << r.seed << ")\n";
  if (r.econ) {
    const auto& e = *r.econ;
    auto row = [&](const std::string& name, Cents m, double ms, Cents rb, double rs) {
      out << pad_right(name, 14) << pad_left(format_dollars(m), 14) << ' ' << percent(ms) << "  "
          << pad_left(format_dollars(rb), 14) << ' ' << percent(rs) << '\n';
    };
    out << "\nannual budget" << pad_left("manual", 17) << pad_left("robot", 25) << '\n';
    row("labor", e.manual.labor, e.manual_shares.labor_share, e.robot.labor, e.robot_shares.labor_share);
    row("consumables", e.manual.consumables, e.manual_shares.consumables_share, e.robot.consumables,
        e.robot_shares.consumables_share);
    row("capital", 0, e.manual_shares.capital_share, e.robot.capital, e.robot_shares.capital_share);
    row("total", e.manual.total, e.manual_shares.sum(), e.robot.total, e.robot_shares.sum());
    out << "\ndisplaced labor     " << format_dollars(e.displacement.displaced_labor_cost) << '\n'
        << "new skilled labor   " << format_dollars(e.displacement.new_highskill_labor_cost) << '\n'
        << "capital retribution " << format_dollars(e.displacement.capital_retribution) << '\n'
        << "net cost delta      " << format_dollars(e.displacement.net_cost_delta) << '\n';
  }
  if (r.simulation) {
    const auto& s = *r.simulation;
    out << "\nsimulation: " << s.contracts << " contracts, " << s.events << " events, ended at tick " << s.end_time
        << '\n';
    for (const auto& [state, n] : s.by_state) out << "  " << pad_right(state, 12) << n << '\n';
    out << "settled spend       " << format_dollars(s.settled_spend) << '\n';
    out << "  labor             " << pad_left(format_dollars(s.buckets.labor), 14) << ' '
        << percent(s.shares.labor_share) << '\n'
        << "  consumables       " << pad_left(format_dollars(s.buckets.consumables), 14) << ' '
        << percent(s.shares.consumables_share) << '\n'
        << "  capital           " << pad_left(format_dollars(s.buckets.capital), 14) << ' '
        << percent(s.shares.capital_share) << '\n';
    if (s.matches_closed_form)
      out << "closed form match   " << (*s.matches_closed_form ? "yes" : "NO") << '\n';
    out << "chain               " << s.blocks << " blocks, tip " << s.final_hash.substr(0, 16) << "...\n"
        << "replicas converged  " << (s.replicas_converged ? "yes" : "NO") << '\n'
        << "money supply        " << format_dollars(s.final_total) << " (issued "
        << format_dollars(s.genesis_total) << ")\n";
    out << "\nagents\n";
    for (const auto& a : s.agents)
      out << "  " << pad_right(a.label, 16) << pad_right(std::string(to_string(a.role)), 10) << "balance "
          << pad_left(format_dollars(a.final_balance), 14) << "  spent " << pad_left(format_dollars(a.spent), 14)
          << "  earned " << pad_left(format_dollars(a.earned), 14) << '\n';
    out << "owners\n";
    for (const auto& o : s.owners)
      out << "  " << pad_right(o.label, 16) << "balance " << pad_left(format_dollars(o.balance), 14) << '\n';
  }
  return out.str();
}

}  // namespace roboecon
