#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "roboecon/ledger.hpp"

namespace roboecon {

/// Abstract simulation time unit.
using Tick = std::uint64_t;

enum class EventKind { Deliver, AgentStep, MineFlush, ContractTimeout, QuorumVote, RequestTimeout };

std::string_view to_string(EventKind kind);

/// What the trace records about an event once it fires.
struct FiredEvent {
  Tick time = 0;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::Deliver;
  std::string summary;
};

struct SimEvent {
  Tick fire_time = 0;
  std::uint64_t sequence = 0;
  EventKind kind = EventKind::Deliver;
  std::string summary;
  std::function<void()> action;
};

enum class SimErrc { TimeTravel, EmptyQueue, ScenarioFatal, InvalidLink };

class SimError : public std::runtime_error {
 public:
  SimError(SimErrc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  SimErrc code() const noexcept { return code_; }

 private:
  SimErrc code_;
};

/// Discrete-event queue ordered by (fire_time, sequence). Events are never
/// interleaved: step() runs one action to completion.
class EventQueue {
 public:
  using Observer = std::function<void(const FiredEvent&)>;

  /// Returns the assigned sequence number; throws SimError(TimeTravel).
  std::uint64_t schedule(Tick fire_time, EventKind kind, std::string summary,
                         std::function<void()> action);

  /// Pops the minimum event, advances the clock, notifies the observer, then
  /// runs the action. Throws SimError(EmptyQueue).
  FiredEvent step();

  Tick now() const noexcept { return now_; }
  bool empty() const noexcept { return queue_.empty(); }
  std::size_t size() const noexcept { return queue_.size(); }
  std::uint64_t fired() const noexcept { return fired_; }
  std::optional<Tick> next_time() const;

  void set_observer(Observer observer) { observer_ = std::move(observer); }

 private:
  struct Later {
    bool operator()(const SimEvent& a, const SimEvent& b) const {
      if (a.fire_time != b.fire_time) return a.fire_time > b.fire_time;
      return a.sequence > b.sequence;
    }
  };
  std::priority_queue<SimEvent, std::vector<SimEvent>, Later> queue_;
  Tick now_ = 0;
  std::uint64_t next_seq_ = 0;
  std::uint64_t fired_ = 0;
  Observer observer_;
};

/// Reproducible random stream: mt19937_64 seeded from SHA-256(seed/label).
/// Draw helpers avoid std distributions, whose output differs across
/// standard library implementations.
class SeededStream {
 public:
  SeededStream(std::uint64_t master_seed, std::string_view label);

  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, 1) with 53 bits of precision.
  double uniform01();
  /// Exactly one draw, even for p of 0 or 1.
  bool bernoulli(double p);
  /// Uniform integer in [lo, hi] by rejection sampling.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

 private:
  std::mt19937_64 engine_;
};

struct LinkModel {
  Tick base_latency = 1;
  Tick jitter = 0;
  double drop_probability = 0.0;

  /// Throws SimError(InvalidLink) if jitter > base_latency or p outside [0,1].
  void validate() const;
  Tick sample_latency(SeededStream& stream) const;
};

struct NetStats {
  std::uint64_t sends = 0;          // every transmission attempt
  std::uint64_t delivered = 0;      // attempts whose Deliver event fired
  std::uint64_t dropped = 0;        // attempts lost on the link
  std::uint64_t retransmitted = 0;  // attempts beyond the first for reliable sends
  std::uint64_t in_flight = 0;      // scheduled but not yet fired
};

/// Lossy point-to-point links over the event queue.
class Network {
 public:
  static constexpr int kMaxReliableAttempts = 8;

  Network(EventQueue& queue, LinkModel link, SeededStream stream);

  /// One attempt: schedules a Deliver at now + latency, or records a drop.
  /// Returns the delivery's sequence number when not dropped.
  std::optional<std::uint64_t> send(const std::string& from, const std::string& to,
                                    const std::string& summary, std::function<void()> on_deliver);

  /// Retransmits with exponential backoff until an attempt survives; throws
  /// SimError(ScenarioFatal) after kMaxReliableAttempts losses.
  std::uint64_t send_reliable(const std::string& from, const std::string& to,
                              const std::string& summary, std::function<void()> on_deliver);

  const NetStats& stats() const noexcept { return stats_; }
  const LinkModel& link() const noexcept { return link_; }
  EventQueue& queue() noexcept { return queue_; }

 private:
  std::uint64_t schedule_delivery(Tick delay, const std::string& summary,
                                  std::function<void()> on_deliver);

  EventQueue& queue_;
  LinkModel link_;
  SeededStream stream_;
  NetStats stats_;
};

enum class Honesty { Honest, FaultyReject };

std::string_view to_string(Honesty honesty);

/// Validator node holding a full chain replica. Blocks may arrive out of
/// order; they are buffered and applied in height order.
class PeerNode {
 public:
  PeerNode(AccountId account, Honesty honesty, const SignatureScheme& signatures);

  const AccountId& account() const noexcept { return account_; }
  Honesty honesty() const noexcept { return honesty_; }
  const Chain& replica() const noexcept { return replica_; }

  void receive(const Block& block);
  std::size_t rejected_blocks() const noexcept { return rejected_; }

 private:
  AccountId account_;
  Honesty honesty_;
  const SignatureScheme* signatures_;
  Chain replica_;
  std::map<std::uint64_t, Block> buffered_;
  std::size_t rejected_ = 0;
};

/// Reliable fan-out of a mined block to every peer.
void broadcast_block(Network& network, const std::string& from, std::span<PeerNode> peers,
                     const Block& block);

}  // namespace roboecon
