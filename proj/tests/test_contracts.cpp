#include <doctest.h>

#include <random>

#include "roboecon/contracts.hpp"
#include "support.hpp"

using namespace roboecon;

namespace {

const AccountId kCustomer = AccountId::robot("buyer");
const AccountId kProvider = AccountId::robot("seller");
const AccountId kOther = AccountId::robot("other");

ServiceSpec cleaning(Tick work = 10) {
  return ServiceSpec{.task_kind = "clean", .parameters = {{"area", 50.0}}, .required_capability = "cleaning",
                     .work_duration = work, .success_probability = 1.0};
}

struct Market {
  KeyedDigestScheme keys{99};
  Ledger ledger{keys, LedgerConfig{.pow_difficulty = 0, .max_tx_per_block = 64}};
  ContractBook book{ledger};
  std::vector<PeerNode> peers;

  explicit Market(std::size_t honest = 3, std::size_t faulty = 0, Cents funds = 10'000) {
    ledger.create_genesis({{AccountId::human("owner-a"), kCustomer, funds},
                           {AccountId::human("owner-b"), kProvider, 0},
                           {AccountId::human("owner-b"), kOther, 0}});
    for (std::size_t i = 0; i < honest + faulty; ++i)
      peers.emplace_back(AccountId::human("peer-" + std::to_string(i)), i < honest ? Honesty::Honest : Honesty::FaultyReject,
                         keys);
    sync();
  }

  void sync() {
    ledger.flush();
    for (auto& p : peers)
      for (const auto& b : ledger.chain().blocks()) p.receive(b);
  }

  Cents total() const {
    Cents t = 0;
    for (const auto& [id, v] : ledger.effective_balances()) t += v;
    return t;
  }

  // Runs a contract up to Delivered.
  std::string delivered(bool success = true, Cents price = 1000, Tick deadline = 100) {
    const auto id = book.create_contract(kCustomer, cleaning(), price, deadline, 0).contract_id;
    book.accept_contract(id, kProvider, {"cleaning"}, 1, 900);
    book.submit_result(id, kProvider, make_outcome(id, kProvider, success, "report " + id, keys), 5);
    book.deliver_response(id, 6);
    sync();
    return id;
  }
};

std::vector<int> steps(const SmartContract& c) {
  std::vector<int> out;
  for (const auto& e : c.event_log) out.push_back(static_cast<int>(e.step));
  return out;
}

}  // namespace

TEST_SUITE("contracts") {
  TEST_CASE("happy path walks the six protocol steps and pays the provider once") {
    Market m;
    const auto id = m.delivered();
    const auto& c = m.book.quorum_validate(id, m.peers, 7);
    CHECK(c.state == ContractState::Validated);
    m.book.settle(id, 8);
    m.sync();
    CHECK(steps(c) == std::vector<int>{1, 2, 3, 4, 5, 6});
    CHECK(c.state == ContractState::Settled);
    CHECK(m.ledger.chain().balances().at(kProvider) == 1000);
    CHECK(m.ledger.chain().balances().at(kCustomer) == 9000);
    CHECK(m.ledger.chain().balances().at(c.escrow_account) == 0);
    int settlements = 0;
    for (const auto* tx : m.ledger.chain().transactions_for_contract(id))
      if (tx->memo == Memo::Settlement) {
        ++settlements;
        CHECK(tx->amount == c.price);
      }
    CHECK(settlements == 1);
    CHECK(m.total() == 10'000);
  }

  TEST_CASE("creation checks") {
    Market m(3, 0, 500);
    auto code = [&](auto&& fn) {
      try {
        fn();
      } catch (const ContractError& e) {
        return e.code();
      }
      FAIL("no error");
      return ContractErrc::UnknownContract;
    };
    CHECK(code([&] { m.book.create_contract(AccountId::human("h"), cleaning(), 1, 10, 0); }) ==
          ContractErrc::NonRobotCustomer);
    CHECK(code([&] { m.book.create_contract(kCustomer, cleaning(), 501, 10, 0); }) == ContractErrc::InsufficientFunds);
    CHECK(code([&] { m.book.create_contract(kCustomer, cleaning(0), 1, 10, 0); }) == ContractErrc::InvalidSpec);
    CHECK(code([&] { m.book.create_contract(kCustomer, cleaning(), 1, 5, 5); }) == ContractErrc::Expired);
    CHECK(code([&] { m.book.get("c-999999"); }) == ContractErrc::UnknownContract);
  }

  TEST_CASE("acceptance checks and escrow funding") {
    Market m;
    const auto id = m.book.create_contract(kCustomer, cleaning(), 1000, 50, 0).contract_id;
    auto code = [&](auto&& fn) {
      try {
        fn();
      } catch (const ContractError& e) {
        return e.code();
      }
      FAIL("no error");
      return ContractErrc::UnknownContract;
    };
    CHECK(code([&] { m.book.accept_contract(id, AccountId::human("h"), {"cleaning"}, 1); }) ==
          ContractErrc::NonRobotProvider);
    CHECK(code([&] { m.book.accept_contract(id, kCustomer, {"cleaning"}, 1); }) == ContractErrc::SelfDealing);
    CHECK(code([&] { m.book.accept_contract(id, kProvider, {"welding"}, 1); }) == ContractErrc::CapabilityMismatch);
    CHECK(code([&] { m.book.accept_contract(id, kProvider, {"cleaning"}, 50); }) == ContractErrc::Expired);
    CHECK(m.ledger.effective_balance(kCustomer) == 10'000);
    const auto& c = m.book.accept_contract(id, kProvider, {"cleaning"}, 2);
    CHECK(m.ledger.effective_balance(c.escrow_account) == 1000);
    CHECK(m.ledger.effective_balance(kCustomer) == 9000);
    CHECK(code([&] { m.book.accept_contract(id, kOther, {"cleaning"}, 3); }) == ContractErrc::AlreadyAccepted);
    CHECK(code([&] { m.book.submit_result(id, kOther, ServiceOutcome{}, 4); }) == ContractErrc::WrongCaller);
    CHECK(code([&] { m.book.deliver_response(id, 4); }) == ContractErrc::NotExecuted);
    CHECK(code([&] { m.book.settle(id, 4); }) == ContractErrc::NotValidated);
    CHECK(code([&] { m.book.refund(id, 4); }) == ContractErrc::NotRefundable);
  }

  TEST_CASE("concurrent acceptances: lowest bid wins, ties broken by label") {
    Market m;
    const auto id = m.book.create_contract(kCustomer, cleaning(), 1000, 50, 0).contract_id;
    const auto result = m.book.resolve_acceptances(
        id, {{kProvider, 800, {"cleaning"}}, {kOther, 700, {"cleaning"}}, {AccountId::robot("aaa"), 800, {"cleaning"}}},
        3);
    REQUIRE(result.winner);
    CHECK(*result.winner == kOther);
    REQUIRE(result.losers.size() == 2);
    CHECK(result.losers[0].first == AccountId::robot("aaa"));
    for (const auto& [who, code] : result.losers) CHECK(code == ContractErrc::AlreadyAccepted);
    CHECK(m.book.get(id).winning_bid == 700);
    CHECK(m.book.get(id).price == 1000);
  }

  TEST_CASE("honest peers check signatures, escrow on chain and evidence") {
    Market m;
    const auto id = m.delivered();
    const auto& c = m.book.get(id);
    CHECK(check_contract(c, m.peers[0].replica(), m.keys).approve());

    SmartContract tampered = c;
    tampered.price += 1;
    CHECK_FALSE(check_contract(tampered, m.peers[0].replica(), m.keys).signatures_ok);

    tampered = c;
    tampered.outcome->report += "!";
    const auto v = check_contract(tampered, m.peers[0].replica(), m.keys);
    CHECK(v.signatures_ok);
    CHECK_FALSE(v.evidence_ok);

    PeerNode stale(AccountId::human("stale"), Honesty::Honest, m.keys);
    stale.receive(m.ledger.chain().blocks()[0]);
    CHECK_FALSE(check_contract(c, stale.replica(), m.keys).escrow_on_chain);

    const auto failed = m.delivered(false);
    const auto vf = check_contract(m.book.get(failed), m.peers[0].replica(), m.keys);
    CHECK(vf.signatures_ok);
    CHECK_FALSE(vf.evidence_ok);
  }

  TEST_CASE("peer rejection refunds the customer") {
    Market m;
    const auto id = m.delivered(false);
    const auto& c = m.book.quorum_validate(id, m.peers, 7);
    CHECK(c.state == ContractState::Rejected);
    m.book.refund(id, 8);
    CHECK(steps(c) == std::vector<int>{1, 2, 3, 4, -1, -2});
    CHECK(m.ledger.effective_balance(kCustomer) == 10'000);
    CHECK_THROWS_AS(m.book.refund(id, 9), ContractError);
    CHECK_THROWS_AS(m.book.settle(id, 9), ContractError);
  }

  TEST_CASE("deadline: expire before acceptance, refund after") {
    Market m;
    const auto a = m.book.create_contract(kCustomer, cleaning(), 1000, 20, 0).contract_id;
    CHECK_THROWS_AS(m.book.refund(a, 19), ContractError);
    m.book.refund(a, 20);
    CHECK(m.book.get(a).state == ContractState::Expired);
    CHECK(steps(m.book.get(a)) == std::vector<int>{1, -3});

    const auto b = m.book.create_contract(kCustomer, cleaning(), 1000, 20, 0).contract_id;
    m.book.accept_contract(b, kProvider, {"cleaning"}, 1);
    CHECK_THROWS_AS(m.book.submit_result(b, kProvider, make_outcome(b, kProvider, true, "r", m.keys), 20),
                    ContractError);
    m.book.refund(b, 21);
    CHECK(steps(m.book.get(b)) == std::vector<int>{1, 2, -2});
    CHECK(m.ledger.effective_balance(kCustomer) == 10'000);
  }

  TEST_CASE("quorum: exhaustive vote enumeration matches strict majority") {
    for (std::size_t n : {1u, 2u, 3u, 4u, 5u, 7u}) {
      for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        const auto approvals = static_cast<std::size_t>(std::popcount(mask));
        Market m;
        const auto id = m.delivered();
        const auto& c = m.book.apply_quorum(id, approvals, n, 7);
        const bool expect = approvals * 2 > n;
        CHECK(strict_majority(approvals, n) == expect);
        CHECK((c.state == ContractState::Validated) == expect);
      }
    }
  }

  TEST_CASE("quorum with faulty-reject peers") {
    for (std::size_t n : {1u, 3u, 5u}) {
      for (std::size_t faulty = 0; faulty <= n; ++faulty) {
        Market m(n - faulty, faulty);
        const auto id = m.delivered();
        const auto& c = m.book.quorum_validate(id, m.peers, 7);
        CHECK((c.state == ContractState::Validated) == (2 * (n - faulty) > n));
      }
    }
    Market none(0, 0);
    const auto id = none.delivered();
    CHECK_THROWS_AS(none.book.quorum_validate(id, none.peers, 7), ContractError);
  }

  TEST_CASE("state machine fuzz: random operations never break escrow or conservation") {
    std::mt19937_64 rng(77);
    Market m(3, 1, 1'000'000);
    std::vector<std::string> ids;
    Tick now = 0;
    for (int step = 0; step < 4000; ++step) {
      now += rng() % 3;
      const int op = static_cast<int>(rng() % 8);
      const std::string id = ids.empty() ? "" : ids[rng() % ids.size()];
      try {
        switch (op) {
          case 0:
            ids.push_back(m.book.create_contract(kCustomer, cleaning(), 100 + static_cast<Cents>(rng() % 900),
                                                 now + 1 + rng() % 60, now)
                              .contract_id);
            break;
          case 1: m.book.accept_contract(id, rng() % 2 ? kProvider : kOther, {"cleaning"}, now); break;
          case 2: {
            const auto& c = m.book.get(id);
            const auto who = c.provider.value_or(kProvider);
            m.book.submit_result(id, who, make_outcome(id, who, rng() % 4 != 0, "r", m.keys), now);
            break;
          }
          case 3: m.book.deliver_response(id, now); break;
          case 4:
            m.sync();
            m.book.quorum_validate(id, m.peers, now);
            break;
          case 5: m.book.settle(id, now); break;
          case 6: m.book.refund(id, now); break;
          default: m.sync(); break;
        }
      } catch (const ContractError&) {
      }
      CHECK(m.total() == 1'000'000);
    }
    std::size_t terminal = 0;
    for (const auto& [cid, c] : m.book.contracts()) {
      const Cents held = m.ledger.effective_balance(c.escrow_account);
      CHECK(held == (holds_escrow(c.state) ? c.price : 0));
      int payouts = 0;
      for (std::size_t i = 1; i < c.event_log.size(); ++i) CHECK(c.event_log[i].time >= c.event_log[i - 1].time);
      for (const auto& e : c.event_log) payouts += e.step == ProtocolStep::Pay || e.step == ProtocolStep::Refund;
      CHECK(payouts <= 1);
      CHECK(c.event_log.front().step == ProtocolStep::Create);
      if (is_terminal(c.state)) ++terminal;
    }
    CHECK(ids.size() > 100);
    CHECK(terminal > 20);
  }
}
