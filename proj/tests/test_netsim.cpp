#include <doctest.h>

#include <algorithm>
#include <vector>

#include "roboecon/netsim.hpp"
#include "support.hpp"

using namespace roboecon;

TEST_SUITE("netsim") {
  TEST_CASE("events fire in (time, sequence) order and the observer sees them first") {
    EventQueue q;
    std::vector<std::string> log;
    q.set_observer([&](const FiredEvent& e) { log.push_back("obs:" + e.summary); });
    q.schedule(5, EventKind::AgentStep, "b", [&] { log.push_back("run:b"); });
    q.schedule(2, EventKind::AgentStep, "a", [&] {
      log.push_back("run:a");
      q.schedule(5, EventKind::Deliver, "c", [&] { log.push_back("run:c"); });
    });
    while (!q.empty()) q.step();
    CHECK(log == std::vector<std::string>{"obs:a", "run:a", "obs:b", "run:b", "obs:c", "run:c"});
    CHECK(q.now() == 5);
    CHECK(q.fired() == 3);
  }

  TEST_CASE("scheduling in the past and stepping an empty queue fail") {
    EventQueue q;
    q.schedule(10, EventKind::AgentStep, "x", [] {});
    q.step();
    try {
      q.schedule(9, EventKind::AgentStep, "late", [] {});
      FAIL("time travel accepted");
    } catch (const SimError& e) {
      CHECK(e.code() == SimErrc::TimeTravel);
    }
    try {
      q.step();
      FAIL("stepped empty queue");
    } catch (const SimError& e) {
      CHECK(e.code() == SimErrc::EmptyQueue);
    }
  }

  TEST_CASE("seeded streams match the reference generator") {
    // Standard MT19937-64 check value, then draws frozen from tests/oracle/stream_oracle.py.
    std::mt19937_64 m;
    m.discard(9999);
    CHECK(m() == 9981545732273789042ULL);

    SeededStream tasks(42, "tasks");
    CHECK(tasks.next() == 6789528038537596454ULL);
    CHECK(tasks.next() == 13681886576950535170ULL);
    CHECK(tasks.next() == 7699071737877861644ULL);

    SeededStream dice(7, "dice");
    std::vector<std::int64_t> rolls;
    for (int i = 0; i < 12; ++i) rolls.push_back(dice.uniform_int(1, 6));
    CHECK(rolls == std::vector<std::int64_t>{3, 3, 4, 6, 1, 5, 2, 5, 5, 3, 2, 1});

    SeededStream u(7, "u01");
    CHECK(u.uniform01() == 7229685400241865.0 * 0x1.0p-53);
    CHECK(u.uniform01() == 7897441885712944.0 * 0x1.0p-53);
  }

  TEST_CASE("bernoulli always consumes exactly one draw") {
    SeededStream a(1, "x"), b(1, "x");
    CHECK_FALSE(a.bernoulli(0.0));
    CHECK(a.bernoulli(1.0));
    b.next();
    b.next();
    CHECK(a.next() == b.next());
  }

  TEST_CASE("link validation and latency bounds") {
    CHECK_THROWS_AS((LinkModel{1, 2, 0.0}.validate()), SimError);
    CHECK_THROWS_AS((LinkModel{1, 0, 1.5}.validate()), SimError);
    LinkModel link{5, 3, 0.0};
    SeededStream s(3, "lat");
    for (int i = 0; i < 200; ++i) {
      const auto l = link.sample_latency(s);
      CHECK(l >= 2);
      CHECK(l <= 8);
    }
  }

  TEST_CASE("lossy sends drop at roughly the configured rate") {
    EventQueue q;
    Network net(q, LinkModel{2, 1, 0.25}, SeededStream(9, "net"));
    int delivered = 0;
    for (int i = 0; i < 4000; ++i) net.send("a", "b", "m", [&] { ++delivered; });
    while (!q.empty()) q.step();
    const auto& st = net.stats();
    CHECK(st.sends == 4000);
    CHECK(st.delivered + st.dropped == 4000);
    CHECK(static_cast<std::uint64_t>(delivered) == st.delivered);
    CHECK(st.dropped > 850);
    CHECK(st.dropped < 1150);
    CHECK(st.in_flight == 0);
  }

  TEST_CASE("reliable sends deliver exactly once despite loss") {
    EventQueue q;
    Network net(q, LinkModel{2, 1, 0.4}, SeededStream(11, "net"));
    std::vector<int> got(500, 0);
    for (int i = 0; i < 500; ++i) net.send_reliable("a", "b", "m", [&, i] { ++got[static_cast<std::size_t>(i)]; });
    while (!q.empty()) q.step();
    CHECK(std::all_of(got.begin(), got.end(), [](int n) { return n == 1; }));
    CHECK(net.stats().retransmitted > 0);
    CHECK(net.stats().delivered == 500);
  }

  TEST_CASE("reliable send over a dead link is fatal") {
    EventQueue q;
    Network net(q, LinkModel{1, 0, 1.0}, SeededStream(1, "net"));
    try {
      net.send_reliable("a", "b", "m", [] {});
      FAIL("dead link delivered");
    } catch (const SimError& e) {
      CHECK(e.code() == SimErrc::ScenarioFatal);
    }
    CHECK(net.stats().sends == Network::kMaxReliableAttempts);
  }

  TEST_CASE("peers buffer out-of-order blocks and converge") {
    KeyedDigestScheme keys(5);
    Ledger ledger(keys, LedgerConfig{.pow_difficulty = 2, .max_tx_per_block = 1});
    ledger.create_genesis(testing::robot_endowments(2, 100));
    for (int i = 0; i < 6; ++i) {
      ledger.submit(ledger.make_transaction(AccountId::robot("r0"), AccountId::robot("r1"), 1, Memo::Sweep));
    }
    ledger.flush();
    const auto& blocks = ledger.chain().blocks();
    PeerNode peer(AccountId::human("p"), Honesty::Honest, keys);
    for (auto it = blocks.rbegin(); it != blocks.rend(); ++it) peer.receive(*it);
    peer.receive(blocks[2]);
    CHECK(peer.replica().size() == blocks.size());
    CHECK(peer.replica().tip_hash() == ledger.chain().tip_hash());
    CHECK(peer.rejected_blocks() == 0);

    PeerNode strict(AccountId::human("q"), Honesty::Honest, keys);
    strict.receive(blocks[0]);
    Block bad = blocks[1];
    bad.nonce ^= 1;
    strict.receive(bad);
    CHECK(strict.rejected_blocks() == 1);
    CHECK(strict.replica().size() == 1);
  }

  TEST_CASE("broadcast reaches every peer over a lossy link") {
    KeyedDigestScheme keys(5);
    Ledger ledger(keys, LedgerConfig{.pow_difficulty = 0, .max_tx_per_block = 2});
    ledger.create_genesis(testing::robot_endowments(2, 100));
    EventQueue q;
    Network net(q, LinkModel{3, 2, 0.3}, SeededStream(4, "net"));
    std::vector<PeerNode> peers;
    for (int i = 0; i < 4; ++i) peers.emplace_back(AccountId::human("p" + std::to_string(i)), Honesty::Honest, keys);
    for (auto& p : peers) p.receive(ledger.chain().blocks()[0]);
    for (int round = 0; round < 5; ++round) {
      ledger.submit(ledger.make_transaction(AccountId::robot("r0"), AccountId::robot("r1"), 1, Memo::Sweep));
      for (const auto& b : ledger.flush()) broadcast_block(net, "miner", peers, b);
    }
    while (!q.empty()) q.step();
    for (const auto& p : peers) CHECK(p.replica().tip_hash() == ledger.chain().tip_hash());
  }
}
