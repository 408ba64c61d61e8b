// Acceptance suite: one line per criterion, nonzero exit if any fails.

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>

#include <json.hpp>

#include "roboecon/contracts.hpp"
#include "roboecon/econ.hpp"
#include "roboecon/ledger.hpp"
#include "roboecon/report.hpp"
#include "roboecon/scenario.hpp"
#include "roboecon/simulation.hpp"
#include "support.hpp"

using namespace roboecon;
using nlohmann::json;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail = what;
    pass = pass && ok;
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// 1. closed-form cleaning budgets, integer cents
Verdict closed_forms() {
  Verdict v;
  const auto m = annual_manual_cost(cleaner_manual_model());
  const auto r = annual_robot_cost(cleaner_robot_model());
  v.require(m.total == 1'560'000, "manual total " + std::to_string(m.total));
  v.require(r.total == 1'560'000, "robot total " + std::to_string(r.total));
  v.require(m.labor == 1'440'000, "manual labor " + std::to_string(m.labor));
  v.require(r.labor == 260'000, "robot labor " + std::to_string(r.labor));
  v.require(r.capital == 1'180'000, "robot capital " + std::to_string(r.capital));
  if (v.pass) v.detail = "manual $15,600 (labor $14,400), robot $15,600 (labor $2,600, capital $11,800)";
  return v;
}

// 2. budget shares
Verdict shares() {
  Verdict v;
  const auto t0 = Clock::now();
  const auto m = budget_shares(annual_manual_cost(cleaner_manual_model()));
  const auto r = budget_shares(annual_robot_cost(cleaner_robot_model()));
  const double elapsed = seconds_since(t0);
  v.require(m.labor_share > 0.92 && m.labor_share < 0.93, fmt("manual labor share %.6f", m.labor_share));
  v.require(r.capital_share >= 0.75 && r.capital_share <= 0.76, fmt("robot capital share %.6f", r.capital_share));
  v.require(std::abs(r.labor_share - 2600.0 / 15600.0) < 1e-12, fmt("robot labor share %.6f", r.labor_share));
  v.require(std::abs(m.sum() - 1) < 1e-9 && std::abs(r.sum() - 1) < 1e-9, "shares do not sum to 1");
  v.require(elapsed < 0.05, fmt("took %.3fs", elapsed));
  if (v.pass)
    v.detail = fmt("manual labor %.4f, ", m.labor_share) + fmt("robot capital %.4f, ", r.capital_share) +
               fmt("robot labor %.4f", r.labor_share);
  return v;
}

// 3. two-robot happy path protocol trace
Verdict protocol_trace() {
  Verdict v;
  const auto t0 = Clock::now();
  const auto config = testing::two_robot_scenario(1);
  std::ostringstream t1, t2;
  const auto r = run_simulation(config, &t1);
  run_simulation(config, &t2);
  const double elapsed = seconds_since(t0) / 2;
  v.require(r.contracts.size() == 1, "expected one contract");
  if (!v.pass) return v;
  const auto& c = r.contracts.front();
  std::vector<int> steps;
  for (const auto& e : c.event_log) steps.push_back(static_cast<int>(e.step));
  v.require(steps == std::vector<int>{1, 2, 3, 4, 5, 6}, "step sequence differs from 1..6");
  int settlements = 0;
  for (const auto& b : r.chain)
    for (const auto& tx : b.transactions)
      if (tx.memo == Memo::Settlement) {
        ++settlements;
        v.require(tx.amount == c.price && tx.contract_ref == c.contract_id, "settlement does not match the price");
      }
  v.require(settlements == 1, std::to_string(settlements) + " settlements on chain");
  v.require(t1.str() == t2.str(), "trace not deterministic");
  v.require(elapsed < 1.0, fmt("took %.3fs", elapsed));
  if (v.pass)
    v.detail = "steps 1,2,3,4,5,6; one Settlement of " + std::to_string(c.price) + " cents" +
               fmt(" (%.3fs)", elapsed);
  return v;
}

// 4. conservation over 1000 contracts with mixed outcomes
Verdict conservation() {
  Verdict v;
  const auto t0 = Clock::now();
  const auto r = run_simulation(testing::mixed_market_scenario(250));
  const double elapsed = seconds_since(t0);
  v.require(r.contracts.size() == 1000, std::to_string(r.contracts.size()) + " contracts");

  Cents sum = 0;
  for (const auto& [id, b] : r.balances) sum += b;
  v.require(sum == r.genesis_total, "balances sum to " + std::to_string(sum));

  Chain chain;
  for (const auto& b : r.chain) chain.append(b);
  std::size_t settled = 0, rejected = 0, timed_out = 0, expired = 0;
  for (const auto& c : r.contracts) {
    int escrow = 0, payouts = 0;
    for (const auto* tx : chain.transactions_for_contract(c.contract_id)) {
      escrow += tx->memo == Memo::Escrow;
      payouts += tx->memo == Memo::Settlement || tx->memo == Memo::Refund;
    }
    const bool funded = escrow == 1;
    v.require(escrow <= 1, c.contract_id + " escrowed twice");
    v.require(funded ? payouts == 1 : payouts == 0, c.contract_id + " paid out " + std::to_string(payouts) + " times");
    v.require(!funded || chain.balances().at(c.escrow_account) == 0, c.contract_id + " escrow not drained");
    v.require(funded ? (c.state == ContractState::Settled || c.state == ContractState::Refunded)
                     : c.state == ContractState::Expired,
              c.contract_id + " ended " + std::string(to_string(c.state)));
    if (c.state == ContractState::Settled) ++settled;
    if (c.state == ContractState::Expired) ++expired;
    if (c.state == ContractState::Refunded) {
      const bool peer_reject = std::any_of(c.event_log.begin(), c.event_log.end(),
                                           [](const ContractEvent& e) { return e.step == ProtocolStep::PeerReject; });
      ++(peer_reject ? rejected : timed_out);
    }
  }
  v.require(settled > 0 && rejected > 0 && timed_out > 0, "outcome mix lacks a category");
  v.require(elapsed < 10.0, fmt("took %.2fs", elapsed));
  if (v.pass)
    v.detail = std::to_string(settled) + " settled, " + std::to_string(rejected) + " rejected+refunded, " +
               std::to_string(timed_out) + " timed out+refunded, " + std::to_string(expired) +
               " expired unfunded; sum " + std::to_string(sum) + " = genesis" + fmt(" (%.2fs)", elapsed);
  return v;
}

// 5. tamper evidence on a 50-block chain
Verdict immutability() {
  Verdict v;
  const auto t0 = Clock::now();
  KeyedDigestScheme keys(5);
  Ledger ledger(keys, LedgerConfig{.pow_difficulty = 8, .max_tx_per_block = 3});
  ledger.create_genesis(testing::robot_endowments(4, 10'000));
  std::mt19937_64 rng(55);
  while (ledger.chain().size() < 50) {
    for (int i = 0; i < 3; ++i) {
      const auto from = AccountId::robot("r" + std::to_string(rng() % 4));
      const auto to = AccountId::robot("r" + std::to_string(rng() % 4));
      try {
        ledger.submit(ledger.make_transaction(from, to, static_cast<Cents>(rng() % 500), Memo::Sweep));
      } catch (const LedgerError&) {
      }
    }
    ledger.flush();
  }
  std::vector<Block> blocks(ledger.chain().blocks().begin(), ledger.chain().blocks().begin() + 50);
  v.require(validate_chain(blocks, {&keys}).accepted(), "pristine chain rejected");

  std::vector<json> lines;
  for (const auto& b : blocks) lines.push_back(to_json(b));

  static const char* kHex = "0123456789abcdef";
  auto flip_hex = [&](std::string s) {
    const auto i = rng() % s.size();
    char c;
    do c = kHex[rng() % 16];
    while (c == s[i]);
    s[i] = c;
    return s;
  };
  auto bump = [&](std::int64_t x) { return x + 1 + static_cast<std::int64_t>(rng() % 5); };

  int rejected_at_height = 0;
  std::string first_miss;
  for (int trial = 0; trial < 100; ++trial) {
    const auto k = static_cast<std::size_t>(rng() % blocks.size());
    json j = lines[k];
    auto& txs = j["transactions"];
    const bool has_tx = !txs.empty();
    std::string what;
    switch (rng() % (has_tx ? 10 : 6)) {
      case 0: j["nonce"] = bump(j["nonce"].get<std::int64_t>()); what = "nonce"; break;
      case 1: j["prev_hash"] = flip_hex(j["prev_hash"].get<std::string>()); what = "prev_hash byte"; break;
      case 2: j["block_hash"] = flip_hex(j["block_hash"].get<std::string>()); what = "block_hash byte"; break;
      case 3: j["pow_difficulty"] = j["pow_difficulty"].get<int>() - 1 - static_cast<int>(rng() % 3); what = "difficulty"; break;
      case 4: j["height"] = bump(j["height"].get<std::int64_t>()); what = "height"; break;
      case 5: j["miner"]["label"] = j["miner"]["label"].get<std::string>() + "x"; what = "miner"; break;
      default: {
        auto& tx = txs[rng() % txs.size()];
        switch (rng() % 4) {
          case 0: tx["amount"] = bump(tx["amount"].get<std::int64_t>()); what = "amount"; break;
          case 1: tx["authorization"] = flip_hex(tx["authorization"].get<std::string>()); what = "signature byte"; break;
          case 2: tx["to"]["label"] = tx["from"]["label"].get<std::string>() == "r0" ? "r1" : "r0"; what = "recipient"; break;
          default: tx["tx_id"] = tx["tx_id"].get<std::string>() + "0"; what = "tx id"; break;
        }
      }
    }
    if (j == lines[k]) {
      --trial;  // mutation was a no-op (e.g. recipient already r0); draw again
      continue;
    }
    std::stringstream exported;
    for (std::size_t i = 0; i < lines.size(); ++i) exported << (i == k ? j : lines[i]).dump() << '\n';
    const auto verdict = validate_chain(read_chain_jsonl(exported));
    if (!verdict.accepted() && verdict.height == k)
      ++rejected_at_height;
    else if (first_miss.empty())
      first_miss = what + " at height " + std::to_string(k);
  }
  const double elapsed = seconds_since(t0);
  v.require(rejected_at_height == 100, std::to_string(rejected_at_height) + "/100, first miss: " + first_miss);
  v.require(elapsed < 10.0, fmt("took %.2fs", elapsed));
  if (v.pass) v.detail = "100/100 mutations rejected at the mutated height" + fmt(" (%.2fs)", elapsed);
  return v;
}

// 6. quorum enumeration against a direct count
Verdict quorum() {
  Verdict v;
  std::size_t cases = 0;
  for (std::size_t n : {1u, 3u, 5u}) {
    for (std::size_t faulty = 0; faulty <= n; ++faulty) {
      KeyedDigestScheme keys(6);
      Ledger ledger(keys, LedgerConfig{.pow_difficulty = 0});
      ledger.create_genesis({{AccountId::human("h"), AccountId::robot("buyer"), 1000},
                             {AccountId::human("h"), AccountId::robot("seller"), 0}});
      ContractBook book(ledger);
      const auto id = book.create_contract(AccountId::robot("buyer"),
                                           ServiceSpec{"t", {}, "cap", 1, 1.0}, 100, 50, 0)
                          .contract_id;
      book.accept_contract(id, AccountId::robot("seller"), {"cap"}, 1);
      book.submit_result(id, AccountId::robot("seller"),
                         make_outcome(id, AccountId::robot("seller"), true, "done", keys), 2);
      book.deliver_response(id, 3);
      ledger.flush();
      std::vector<PeerNode> peers;
      for (std::size_t i = 0; i < n; ++i) {
        peers.emplace_back(AccountId::human("p" + std::to_string(i)), i < faulty ? Honesty::FaultyReject : Honesty::Honest,
                           keys);
        for (const auto& b : ledger.chain().blocks()) peers.back().receive(b);
      }
      // Oracle: enumerate the votes directly.
      std::size_t yes = 0;
      for (const auto& p : peers) yes += p.honesty() == Honesty::Honest ? 1 : 0;
      const bool oracle = yes > n - yes;
      const bool got = book.quorum_validate(id, peers, 4).state == ContractState::Validated;
      v.require(got == oracle, "n=" + std::to_string(n) + " faulty=" + std::to_string(faulty));
      ++cases;

      // Every individual vote pattern, not just honest/faulty splits.
      for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        std::size_t approvals = 0;
        for (std::size_t b = 0; b < n; ++b) approvals += (mask >> b) & 1u;
        v.require(strict_majority(approvals, n) == (approvals > n - approvals),
                  "mask " + std::to_string(mask) + " of " + std::to_string(n));
        ++cases;
      }
    }
  }
  if (v.pass) v.detail = std::to_string(cases) + " cases for 1, 3, 5 peers match strict majority";
  return v;
}

// 7 and 8 share the cleaner runs.
struct CleanerRuns {
  std::string trace_a, trace_b;
  SimulationResult a, b;
  double seconds = 0;
};

CleanerRuns run_cleaner_twice() {
  CleanerRuns out;
  const auto t0 = Clock::now();
  const auto config = load_scenario(testing::source_dir() / "scenarios" / "cleaner.json");
  std::ostringstream ta, tb;
  out.a = run_simulation(config, &ta);
  out.b = run_simulation(config, &tb);
  out.trace_a = ta.str();
  out.trace_b = tb.str();
  out.seconds = seconds_since(t0);
  return out;
}

Verdict determinism(const CleanerRuns& runs) {
  Verdict v;
  v.require(runs.a.seed == 42, "seed is not 42");
  v.require(!runs.trace_a.empty() && runs.trace_a == runs.trace_b, "traces differ");
  v.require(runs.a.final_hash == runs.b.final_hash, "final chain hashes differ");
  v.require(runs.seconds < 30.0, fmt("took %.2fs", runs.seconds));
  if (v.pass)
    v.detail = "traces identical (" + std::to_string(runs.trace_a.size()) + " bytes), tip " +
               to_hex(runs.a.final_hash).substr(0, 16) + fmt(" (%.2fs for both runs)", runs.seconds);
  return v;
}

Verdict formula_agreement(const CleanerRuns& runs) {
  Verdict v;
  const auto closed = annual_robot_cost(cleaner_robot_model()).total;
  const auto spend = runs.a.settled_spend();
  v.require(spend == closed, "settled " + std::to_string(spend) + " vs closed form " + std::to_string(closed));
  v.require(runs.a.end_time <= 52u * 7 * 24 * 60, "ran past one simulated year");
  if (v.pass)
    v.detail = "settled " + std::to_string(runs.a.count(ContractState::Settled)) + " cleanings, " +
               format_dollars(spend) + " = closed-form robot total";
  return v;
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int n, const char* name, const std::function<Verdict()>& fn) {
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    std::printf("criterion %d [%s] %s: %s\n", n, v.pass ? "PASS" : "FAIL", name, v.detail.c_str());
    std::fflush(stdout);
    failures += v.pass ? 0 : 1;
  };
  report(1, "closed-form budgets", closed_forms);
  report(2, "budget shares", shares);
  report(3, "protocol trace", protocol_trace);
  report(4, "conservation", conservation);
  report(5, "immutability", immutability);
  report(6, "quorum", quorum);
  std::optional<CleanerRuns> runs;
  std::string cleaner_error;
  try {
    runs = run_cleaner_twice();
  } catch (const std::exception& e) {
    cleaner_error = e.what();
  }
  auto with_runs = [&](Verdict (*fn)(const CleanerRuns&)) {
    return [&, fn] {
      if (!runs) throw std::runtime_error(cleaner_error);
      return fn(*runs);
    };
  };
  report(7, "determinism", with_runs(determinism));
  report(8, "simulation-formula agreement", with_runs(formula_agreement));
  std::printf("%d/8 criteria passed\n", 8 - failures);
  return failures == 0 ? 0 : 1;
}
