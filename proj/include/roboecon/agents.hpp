#pragma once

#include <deque>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "roboecon/contracts.hpp"
#include "roboecon/ledger.hpp"
#include "roboecon/netsim.hpp"

namespace roboecon {

using AssetId = std::string;

enum class RolePolicy { CustomerOnly, ProviderOnly, Dual };

std::string_view to_string(RolePolicy role);
RolePolicy role_policy_from_string(std::string_view name);
inline bool can_buy(RolePolicy r) { return r != RolePolicy::ProviderOnly; }
inline bool can_sell(RolePolicy r) { return r != RolePolicy::CustomerOnly; }

enum class AgentErrc { RobotOwnershipForbidden, DuplicateAsset };

class AgentError : public std::runtime_error {
 public:
  AgentError(AgentErrc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  AgentErrc code() const noexcept { return code_; }

 private:
  AgentErrc code_;
};

/// A human who owns robots and other assets.
struct OwnerPrincipal {
  AccountId account;
  std::vector<AccountId> owned_robots;
  std::vector<AssetId> owned_assets;
};

/// Property register. Only humans may own: registering anything to a robot or
/// contract account is refused.
class AssetRegistry {
 public:
  /// Throws AgentError(RobotOwnershipForbidden) for non-human owners and
  /// AgentError(DuplicateAsset) for an asset that already has an owner.
  void register_asset(const AssetId& asset, const AccountId& owner);

  std::optional<AccountId> owner_of(const AssetId& asset) const;
  const std::map<AssetId, AccountId>& entries() const noexcept { return entries_; }
  bool all_owners_human() const;

 private:
  std::map<AssetId, AccountId> entries_;
};

/// A unit of demand a customer robot wants to buy.
struct TaskRequest {
  std::string task_id;
  ServiceSpec spec;
  Cents price = 0;
  Tick release = 0;
  Tick deadline_offset = 1;
};

struct RobotAgent {
  AccountId account;
  AccountId owner;
  std::set<std::string> capabilities;
  RolePolicy role = RolePolicy::Dual;
  Cents operating_wallet_floor = 0;
  double bid_margin = 0.0;
  std::size_t capacity = 1;

  // Customer side: tasks not yet turned into contracts, in release order.
  std::deque<TaskRequest> tasks;
  // Provider side: contracts awarded but not finished.
  std::size_t active_jobs = 0;
};

struct CreateContractAction {
  TaskRequest task;
  Tick deadline = 0;
};
struct SkipUnfundedAction {
  TaskRequest task;
  Cents balance = 0;
};
using CustomerAction = std::variant<CreateContractAction, SkipUnfundedAction>;

/// Turns every released task into a contract order while the running balance
/// covers its price; unaffordable tasks are dropped and reported.
std::vector<CustomerAction> customer_step(RobotAgent& agent, Cents balance, Tick now);

/// Marketplace announcement of a freshly created contract.
struct Announcement {
  std::string contract_id;
  AccountId customer;
  std::string capability;
  std::string task_kind;
  Cents price = 0;
  Tick work_duration = 0;
  Tick deadline = 0;
};

nlohmann::json to_json(const Announcement& a);
Announcement announcement_from_json(const nlohmann::json& j);

struct QuoteAction {
  std::string contract_id;
  AccountId customer;
  Cents bid = 0;
};

/// Per-capability operating cost in cents per tick of work.
using UnitCosts = std::map<std::string, Cents>;

/// work_duration x unit cost, marked up by bid_margin (rounded to the cent).
Cents quote_price(const RobotAgent& agent, const std::string& capability, Tick work_duration,
                  const UnitCosts& unit_costs);

/// Quotes on every announcement the agent can serve at or below the posted
/// price, while it has spare capacity.
std::vector<QuoteAction> provider_step(const RobotAgent& agent, std::span<const Announcement> announcements,
                                       const UnitCosts& unit_costs, Tick now);

/// Performs the work: success is one Bernoulli draw with the spec's
/// probability; the report is digested and signed by the provider.
ServiceOutcome perform_work(const RobotAgent& provider, const SmartContract& contract, SeededStream& stream,
                            Tick now, const SignatureScheme& signatures);

/// Moves everything above the operating floor to the owner.
std::optional<Transaction> sweep_earnings(const RobotAgent& agent, Ledger& ledger, Tick now);

}  // namespace roboecon
