#include "roboecon/agents.hpp"

#include <cmath>

namespace roboecon {

using nlohmann::json;

std::string_view to_string(RolePolicy role) {
  switch (role) {
    case RolePolicy::CustomerOnly: return "customer";
    case RolePolicy::ProviderOnly: return "provider";
    case RolePolicy::Dual: return "dual";
  }
  return "dual";
}

RolePolicy role_policy_from_string(std::string_view name) {
  if (name == "customer") return RolePolicy::CustomerOnly;
  if (name == "provider") return RolePolicy::ProviderOnly;
  if (name == "dual") return RolePolicy::Dual;
  throw std::invalid_argument("unknown role policy: " + std::string(name));
}

void AssetRegistry::register_asset(const AssetId& asset, const AccountId& owner) {
  if (owner.kind != AccountKind::Human)
    throw AgentError(AgentErrc::RobotOwnershipForbidden,
                     "asset " + asset + " cannot be owned by " + to_string(owner) + ": only humans own");
  if (entries_.contains(asset))
    throw AgentError(AgentErrc::DuplicateAsset, "asset " + asset + " already registered");
  entries_.emplace(asset, owner);
}

std::optional<AccountId> AssetRegistry::owner_of(const AssetId& asset) const {
  auto it = entries_.find(asset);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

bool AssetRegistry::all_owners_human() const {
  for (const auto& [asset, owner] : entries_)
    if (owner.kind != AccountKind::Human) return false;
  return true;
}

std::vector<CustomerAction> customer_step(RobotAgent& agent, Cents balance, Tick now) {
  std::vector<CustomerAction> actions;
  if (!can_buy(agent.role)) return actions;
  Cents committed = 0;
  while (!agent.tasks.empty() && agent.tasks.front().release <= now) {
    TaskRequest task = std::move(agent.tasks.front());
    agent.tasks.pop_front();
    if (balance - committed >= task.price) {
      committed += task.price;
      const Tick deadline = now + task.deadline_offset;
      actions.emplace_back(CreateContractAction{std::move(task), deadline});
    } else {
      actions.emplace_back(SkipUnfundedAction{std::move(task), balance - committed});
    }
  }
  return actions;
}

json to_json(const Announcement& a) {
  return json{{"contract_id", a.contract_id}, {"customer", to_json(a.customer)},
              {"capability", a.capability},   {"task_kind", a.task_kind},
              {"price", a.price},             {"work_duration", a.work_duration},
              {"deadline", a.deadline}};
}

Announcement announcement_from_json(const json& j) {
  Announcement a;
  a.contract_id = j.at("contract_id").get<std::string>();
  a.customer = account_from_json(j.at("customer"));
  a.capability = j.at("capability").get<std::string>();
  a.task_kind = j.at("task_kind").get<std::string>();
  a.price = j.at("price").get<Cents>();
  a.work_duration = j.at("work_duration").get<Tick>();
  a.deadline = j.at("deadline").get<Tick>();
  return a;
}

Cents quote_price(const RobotAgent& agent, const std::string& capability, Tick work_duration,
                  const UnitCosts& unit_costs) {
  auto it = unit_costs.find(capability);
  const Cents unit = it == unit_costs.end() ? 0 : it->second;
  const Cents cost = unit * static_cast<Cents>(work_duration);
  return cost + static_cast<Cents>(std::llround(static_cast<double>(cost) * agent.bid_margin));
}

std::vector<QuoteAction> provider_step(const RobotAgent& agent, std::span<const Announcement> announcements,
                                       const UnitCosts& unit_costs, Tick now) {
  std::vector<QuoteAction> quotes;
  if (!can_sell(agent.role) || agent.active_jobs >= agent.capacity) return quotes;
  for (const auto& a : announcements) {
    if (a.customer == agent.account || now >= a.deadline) continue;
    if (!agent.capabilities.contains(a.capability)) continue;
    const Cents bid = quote_price(agent, a.capability, a.work_duration, unit_costs);
    if (bid > a.price) continue;
    quotes.push_back(QuoteAction{a.contract_id, a.customer, bid});
  }
  return quotes;
}

ServiceOutcome perform_work(const RobotAgent& provider, const SmartContract& contract, SeededStream& stream,
                            Tick now, const SignatureScheme& signatures) {
  const bool success = stream.bernoulli(contract.spec.success_probability);
  json report{{"contract_id", contract.contract_id},
              {"provider", provider.account.label},
              {"task_kind", contract.spec.task_kind},
              {"completed_at", now},
              {"success", success}};
  return make_outcome(contract.contract_id, provider.account, success, report.dump(), signatures);
}

std::optional<Transaction> sweep_earnings(const RobotAgent& agent, Ledger& ledger, Tick) {
  const Cents balance = ledger.effective_balance(agent.account);
  if (balance <= agent.operating_wallet_floor) return std::nullopt;
  auto tx = ledger.make_transaction(agent.account, agent.owner, balance - agent.operating_wallet_floor,
                                    Memo::Sweep);
  ledger.submit(tx);
  return tx;
}

}  // namespace roboecon
