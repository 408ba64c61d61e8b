#include "roboecon/netsim.hpp"

#include <limits>

namespace roboecon {

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::Deliver: return "Deliver";
    case EventKind::AgentStep: return "AgentStep";
    case EventKind::MineFlush: return "MineFlush";
    case EventKind::ContractTimeout: return "ContractTimeout";
    case EventKind::QuorumVote: return "QuorumVote";
    case EventKind::RequestTimeout: return "RequestTimeout";
  }
  return "Deliver";
}

std::string_view to_string(Honesty honesty) {
  return honesty == Honesty::Honest ? "Honest" : "FaultyReject";
}

// ---- event queue ----------------------------------------------------------------

std::uint64_t EventQueue::schedule(Tick fire_time, EventKind kind, std::string summary,
                                   std::function<void()> action) {
  if (fire_time < now_)
    throw SimError(SimErrc::TimeTravel, "event at t=" + std::to_string(fire_time) +
                                            " scheduled from t=" + std::to_string(now_));
  const auto seq = next_seq_++;
  queue_.push(SimEvent{fire_time, seq, kind, std::move(summary), std::move(action)});
  return seq;
}

FiredEvent EventQueue::step() {
  if (queue_.empty()) throw SimError(SimErrc::EmptyQueue, "step on empty event queue");
  SimEvent ev = queue_.top();
  queue_.pop();
  now_ = ev.fire_time;
  ++fired_;
  FiredEvent fired{ev.fire_time, ev.sequence, ev.kind, std::move(ev.summary)};
  if (observer_) observer_(fired);
  if (ev.action) ev.action();
  return fired;
}

std::optional<Tick> EventQueue::next_time() const {
  if (queue_.empty()) return std::nullopt;
  return queue_.top().fire_time;
}

// ---- seeded stream --------------------------------------------------------------

SeededStream::SeededStream(std::uint64_t master_seed, std::string_view label) {
  auto d = sha256("roboecon/stream/" + std::to_string(master_seed) + "/" + std::string(label));
  std::uint64_t s = 0;
  for (int i = 0; i < 8; ++i) s = (s << 8) | d[static_cast<std::size_t>(i)];
  engine_.seed(s);
}

double SeededStream::uniform01() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

bool SeededStream::bernoulli(double p) { return uniform01() < p; }

std::int64_t SeededStream::uniform_int(std::int64_t lo, std::int64_t hi) {
  if (hi < lo) throw std::invalid_argument("uniform_int: empty range");
  const std::uint64_t span = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo);
  if (span == std::numeric_limits<std::uint64_t>::max()) return static_cast<std::int64_t>(engine_());
  const std::uint64_t range = span + 1;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % range;
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return lo + static_cast<std::int64_t>(x % range);
}

// ---- links ----------------------------------------------------------------------

void LinkModel::validate() const {
  if (jitter > base_latency)
    throw SimError(SimErrc::InvalidLink, "link jitter exceeds base latency");
  if (!(drop_probability >= 0.0 && drop_probability <= 1.0))
    throw SimError(SimErrc::InvalidLink, "drop probability outside [0, 1]");
}

Tick LinkModel::sample_latency(SeededStream& stream) const {
  if (jitter == 0) return base_latency;
  auto offset = stream.uniform_int(-static_cast<std::int64_t>(jitter), static_cast<std::int64_t>(jitter));
  return static_cast<Tick>(static_cast<std::int64_t>(base_latency) + offset);
}

Network::Network(EventQueue& queue, LinkModel link, SeededStream stream)
    : queue_(queue), link_(link), stream_(std::move(stream)) {
  link_.validate();
}

std::uint64_t Network::schedule_delivery(Tick delay, const std::string& summary,
                                         std::function<void()> on_deliver) {
  ++stats_.in_flight;
  return queue_.schedule(queue_.now() + delay, EventKind::Deliver, summary,
                         [this, cb = std::move(on_deliver)] {
                           --stats_.in_flight;
                           ++stats_.delivered;
                           if (cb) cb();
                         });
}

std::optional<std::uint64_t> Network::send(const std::string& from, const std::string& to,
                                           const std::string& summary,
                                           std::function<void()> on_deliver) {
  ++stats_.sends;
  // Drop and latency draws happen in a fixed order per attempt.
  const bool lost = stream_.bernoulli(link_.drop_probability);
  const Tick latency = link_.sample_latency(stream_);
  if (lost) {
    ++stats_.dropped;
    return std::nullopt;
  }
  return schedule_delivery(latency, summary + " " + from + "->" + to, std::move(on_deliver));
}

std::uint64_t Network::send_reliable(const std::string& from, const std::string& to,
                                     const std::string& summary, std::function<void()> on_deliver) {
  // Attempt k is sent after the backoff accumulated by the k-1 lost attempts
  // (the sender's ack timeout), so the surviving attempt is the only event.
  const Tick unit = std::max<Tick>(1, link_.base_latency + link_.jitter);
  Tick waited = 0;
  for (int attempt = 0; attempt < kMaxReliableAttempts; ++attempt) {
    ++stats_.sends;
    if (attempt > 0) ++stats_.retransmitted;
    const bool lost = stream_.bernoulli(link_.drop_probability);
    const Tick latency = link_.sample_latency(stream_);
    if (!lost)
      return schedule_delivery(waited + latency, summary + " " + from + "->" + to,
                               std::move(on_deliver));
    ++stats_.dropped;
    waited += unit << attempt;
  }
  throw SimError(SimErrc::ScenarioFatal, summary + " " + from + "->" + to + " undeliverable after " +
                                             std::to_string(kMaxReliableAttempts) + " attempts");
}

// ---- peers ----------------------------------------------------------------------

PeerNode::PeerNode(AccountId account, Honesty honesty, const SignatureScheme& signatures)
    : account_(std::move(account)), honesty_(honesty), signatures_(&signatures) {}

void PeerNode::receive(const Block& block) {
  if (block.height < replica_.size()) return;  // duplicate
  buffered_.emplace(block.height, block);
  while (!buffered_.empty() && buffered_.begin()->first == replica_.size()) {
    Block next = std::move(buffered_.begin()->second);
    buffered_.erase(buffered_.begin());
    try {
      replica_.append(std::move(next), ValidationOptions{signatures_});
    } catch (const LedgerError&) {
      ++rejected_;
    }
  }
}

void broadcast_block(Network& network, const std::string& from, std::span<PeerNode> peers,
                     const Block& block) {
  for (auto& peer : peers) {
    network.send_reliable(from, peer.account().label, "block " + std::to_string(block.height),
                          [&peer, block] { peer.receive(block); });
  }
}

}  // namespace roboecon
