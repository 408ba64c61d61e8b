#include "roboecon/bus.hpp"

namespace roboecon {

MessageBus::MessageBus(Network& network) : network_(network) {}

void MessageBus::advertise(const std::string& topic) { topics_.try_emplace(topic); }

void MessageBus::subscribe(const std::string& topic, const std::string& node, TopicHandler handler) {
  auto it = topics_.find(topic);
  if (it == topics_.end()) throw BusError(BusErrc::UnknownTopic, "unknown topic " + topic);
  it->second.push_back(Subscriber{node, std::move(handler)});
}

std::size_t MessageBus::subscriber_count(const std::string& topic) const {
  auto it = topics_.find(topic);
  return it == topics_.end() ? 0 : it->second.size();
}

DeliveryReceipt MessageBus::publish(const std::string& topic, const std::string& publisher,
                                    nlohmann::json body) {
  auto it = topics_.find(topic);
  if (it == topics_.end()) throw BusError(BusErrc::UnknownTopic, "unknown topic " + topic);
  ++stats_.publishes;
  DeliveryReceipt receipt;
  // Copy: handlers may subscribe new nodes, which only see later publishes.
  const auto subscribers = it->second;
  for (const auto& sub : subscribers) {
    const std::string key = topic + "|" + publisher + "|" + sub.node;
    const auto seq = channels_[key].next_send++;
    Message msg{publisher, topic, body};
    network_.send_reliable(publisher, sub.node, "publish " + topic,
                           [this, key, seq, msg = std::move(msg), handler = sub.handler]() mutable {
                             arrive(key, seq, std::move(msg), handler);
                           });
    ++receipt.deliveries;
  }
  return receipt;
}

void MessageBus::arrive(const std::string& key, std::uint64_t seq, Message msg,
                        const TopicHandler& handler) {
  auto& ch = channels_[key];
  ch.held.emplace(seq, std::move(msg));
  while (!ch.held.empty() && ch.held.begin()->first == ch.next_deliver) {
    Message next = std::move(ch.held.begin()->second);
    ch.held.erase(ch.held.begin());
    ++ch.next_deliver;
    ++stats_.topic_deliveries;
    handler(next);
  }
}

void MessageBus::serve(const std::string& service, const std::string& node, ServiceHandler handler) {
  auto [it, inserted] = services_.try_emplace(service, Service{node, std::move(handler)});
  if (!inserted)
    throw BusError(BusErrc::ServiceTaken, "service " + service + " already served by " + it->second.node);
}

std::uint64_t MessageBus::request(const std::string& service, const std::string& requester,
                                  nlohmann::json payload, Tick timeout, ReplyHandler on_outcome) {
  auto it = services_.find(service);
  if (it == services_.end()) throw BusError(BusErrc::UnknownService, "unknown service " + service);
  ++stats_.requests;
  const auto id = next_request_++;
  pending_.emplace(id, Pending{std::move(on_outcome)});

  auto& queue = network_.queue();
  const std::string responder = it->second.node;
  Message msg{requester, service, std::move(payload)};
  network_.send(requester, responder, "request " + service,
                [this, id, service, responder, requester, msg = std::move(msg)] {
                  auto sit = services_.find(service);
                  sit->second.handler(msg, Responder(this, id, responder, requester, service));
                });
  queue.schedule(queue.now() + timeout, EventKind::RequestTimeout,
                 "timeout " + service + " #" + std::to_string(id), [this, id] {
                   if (pending_.contains(id)) {
                     ++stats_.timeouts;
                     resolve(id, RequestOutcome{true, {}});
                   }
                 });
  return id;
}

void MessageBus::Responder::reply(nlohmann::json body) const {
  MessageBus* bus = bus_;
  const auto id = id_;
  Message msg{responder_, service_, std::move(body)};
  bus->network_.send(responder_, requester_, "reply " + service_, [bus, id, msg = std::move(msg)] {
    if (bus->pending_.contains(id)) {
      ++bus->stats_.replies;
      bus->resolve(id, RequestOutcome{false, msg});
    }
  });
}

void MessageBus::resolve(std::uint64_t request_id, RequestOutcome outcome) {
  auto node = pending_.extract(request_id);
  if (node.empty()) return;
  node.mapped().on_outcome(outcome);
}

}  // namespace roboecon
