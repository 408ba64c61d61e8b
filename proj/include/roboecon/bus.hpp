#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "roboecon/netsim.hpp"

namespace roboecon {

struct Message {
  std::string sender;
  std::string channel;
  nlohmann::json body;
};

struct DeliveryReceipt {
  std::size_t deliveries = 0;  // one per current subscriber
};

struct RequestOutcome {
  bool timed_out = false;
  Message reply;
};

enum class BusErrc { UnknownTopic, UnknownService, ServiceTaken };

class BusError : public std::runtime_error {
 public:
  BusError(BusErrc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  BusErrc code() const noexcept { return code_; }

 private:
  BusErrc code_;
};

struct BusStats {
  std::uint64_t publishes = 0;
  std::uint64_t topic_deliveries = 0;  // handler invocations
  std::uint64_t requests = 0;
  std::uint64_t replies = 0;
  std::uint64_t timeouts = 0;
};

/// Topic/service messaging over the simulated network.
///
/// Topics fan out asynchronously: each publish reaches every subscriber
/// present at publish time exactly once (reliable link sends), and messages
/// from one publisher reach a given subscriber in publish order.
///
/// Services have a single responder. A request resolves exactly once, with
/// either the first reply to arrive or a timeout; requests and replies travel
/// over the lossy link without retransmission.
class MessageBus {
 public:
  using TopicHandler = std::function<void(const Message&)>;
  using ReplyHandler = std::function<void(const RequestOutcome&)>;

  class Responder {
   public:
    void reply(nlohmann::json body) const;

   private:
    friend class MessageBus;
    Responder(MessageBus* bus, std::uint64_t request_id, std::string responder, std::string requester,
              std::string service)
        : bus_(bus), id_(request_id), responder_(std::move(responder)),
          requester_(std::move(requester)), service_(std::move(service)) {}
    MessageBus* bus_;
    std::uint64_t id_;
    std::string responder_;
    std::string requester_;
    std::string service_;
  };

  using ServiceHandler = std::function<void(const Message&, Responder)>;

  explicit MessageBus(Network& network);

  void advertise(const std::string& topic);
  bool has_topic(const std::string& topic) const { return topics_.contains(topic); }
  /// Throws BusError(UnknownTopic).
  void subscribe(const std::string& topic, const std::string& node, TopicHandler handler);
  std::size_t subscriber_count(const std::string& topic) const;

  /// Throws BusError(UnknownTopic).
  DeliveryReceipt publish(const std::string& topic, const std::string& publisher, nlohmann::json body);

  /// Throws BusError(ServiceTaken) if the service already has a responder.
  void serve(const std::string& service, const std::string& node, ServiceHandler handler);

  /// Throws BusError(UnknownService). The handler runs exactly once.
  std::uint64_t request(const std::string& service, const std::string& requester,
                        nlohmann::json payload, Tick timeout, ReplyHandler on_outcome);

  const BusStats& stats() const noexcept { return stats_; }

 private:
  struct Subscriber {
    std::string node;
    TopicHandler handler;
  };
  // Reorder buffer for one (topic, publisher, subscriber) channel.
  struct Channel {
    std::uint64_t next_send = 0;
    std::uint64_t next_deliver = 0;
    std::map<std::uint64_t, Message> held;
  };
  struct Service {
    std::string node;
    ServiceHandler handler;
  };
  struct Pending {
    ReplyHandler on_outcome;
  };

  void arrive(const std::string& key, std::uint64_t seq, Message msg, const TopicHandler& handler);
  void resolve(std::uint64_t request_id, RequestOutcome outcome);

  Network& network_;
  std::map<std::string, std::vector<Subscriber>> topics_;
  std::map<std::string, Channel> channels_;
  std::map<std::string, Service> services_;
  std::map<std::uint64_t, Pending> pending_;
  std::uint64_t next_request_ = 1;
  BusStats stats_;
};

}  // namespace roboecon
