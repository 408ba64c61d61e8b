#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "roboecon/crypto.hpp"
#include "roboecon/ledger.hpp"
#include "roboecon/scenario.hpp"

namespace testing {

inline std::filesystem::path source_dir() { return ROBOECON_SOURCE_DIR; }

// Ledger with robots r0..r(n-1) endowed by human h0, each with `amount`.
inline std::vector<roboecon::Endowment> robot_endowments(std::size_t n, roboecon::Cents amount) {
  std::vector<roboecon::Endowment> out;
  for (std::size_t i = 0; i < n; ++i)
    out.push_back({roboecon::AccountId::human("h0"), roboecon::AccountId::robot("r" + std::to_string(i)), amount});
  return out;
}

// One customer, one provider, perfect link: every contract should settle.
inline roboecon::ScenarioConfig two_robot_scenario(std::size_t tasks = 1) {
  using namespace roboecon;
  ScenarioConfig c;
  c.name = "two-robots";
  c.seed = 11;
  c.duration = 1000;
  c.owners = {OwnerSpec{"alice", {}}, OwnerSpec{"bob", {}}};
  c.robots = {RobotSpec{.label = "buyer", .owner = "alice", .endowment = 50'000, .role = RolePolicy::CustomerOnly, .capabilities = {}},
              RobotSpec{.label = "seller", .owner = "bob", .role = RolePolicy::ProviderOnly, .capabilities = {"haul"}}};
  c.capabilities["haul"] = CapabilitySpec{.unit_cost = 10, .cost_weights = {1, 1, 2}};
  c.peers = PeerMix{3, 0};
  c.link = LinkModel{1, 0, 0.0};
  c.pow_difficulty = 4;
  c.contracts = {TaskStream{.customer = "buyer", .task_kind = "haul", .capability = "haul", .parameters = {},
                            .price = {1500, 1500}, .work_duration = {20, 20}, .success_probability = 1.0,
                            .deadline_offset = 300, .schedule = {.start = 10, .interval = 50, .count = tasks}}};
  return c;
}

// Several customers and providers, lossy links, failing work and one faulty
// validator: contracts end settled, refunded after rejection or timeout, or
// expired. Each stream emits `per_stream` tasks.
inline roboecon::ScenarioConfig mixed_market_scenario(std::size_t per_stream, std::uint64_t seed = 2024) {
  using namespace roboecon;
  ScenarioConfig c;
  c.name = "mixed";
  c.seed = seed;
  c.duration = 20 * per_stream + 100;
  for (const char* o : {"o1", "o2", "o3"}) c.owners.push_back(OwnerSpec{o, {}});
  c.robots = {
      RobotSpec{.label = "c1", .owner = "o1", .endowment = 2'000'000, .role = RolePolicy::CustomerOnly, .capabilities = {}},
      RobotSpec{.label = "c2", .owner = "o2", .endowment = 2'000'000, .role = RolePolicy::CustomerOnly, .capabilities = {}},
      RobotSpec{.label = "d1", .owner = "o3", .endowment = 500'000, .role = RolePolicy::Dual,
                .capabilities = {"lift"}, .wallet_floor = 300'000, .bid_margin = 0.3},
      RobotSpec{.label = "p1", .owner = "o1", .role = RolePolicy::ProviderOnly, .capabilities = {"lift", "scan"},
                .bid_margin = 0.1, .capacity = 2},
      RobotSpec{.label = "p2", .owner = "o2", .role = RolePolicy::ProviderOnly, .capabilities = {"scan"},
                .bid_margin = 0.05},
  };
  c.capabilities["lift"] = CapabilitySpec{.unit_cost = 20, .cost_weights = {3, 1, 6}};
  c.capabilities["scan"] = CapabilitySpec{.unit_cost = 15, .cost_weights = {5, 2, 3}};
  c.peers = PeerMix{4, 1};
  c.link = LinkModel{2, 2, 0.06};
  c.pow_difficulty = 2;
  c.ledger = LedgerParams{8, 3};
  c.market = MarketParams{.bid_window = 8, .request_timeout = 30, .vote_timeout = 60, .vote_recheck_interval = 4,
                          .vote_recheck_limit = 6};
  auto stream = [&](const char* customer, const char* cap, Tick start) {
    return TaskStream{.customer = customer, .task_kind = cap, .capability = cap, .parameters = {},
                      .price = {900, 1600}, .work_duration = {10, 60}, .success_probability = 0.8,
                      .deadline_offset = 150, .schedule = {.start = start, .interval = 20, .count = per_stream}};
  };
  c.contracts = {stream("c1", "lift", 3), stream("c1", "scan", 7), stream("c2", "scan", 11), stream("d1", "scan", 17)};
  return c;
}

}  // namespace testing
