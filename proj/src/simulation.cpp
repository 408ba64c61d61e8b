#include "roboecon/simulation.hpp"

#include <algorithm>
#include <ostream>

#include <json.hpp>

#include "roboecon/agents.hpp"
#include "roboecon/bus.hpp"

namespace roboecon {

using nlohmann::json;

std::size_t SimulationResult::count(ContractState state) const {
  return static_cast<std::size_t>(
      std::count_if(contracts.begin(), contracts.end(), [&](const SmartContract& c) { return c.state == state; }));
}

Cents SimulationResult::settled_spend() const {
  Cents total = 0;
  for (const auto& c : contracts)
    if (c.state == ContractState::Settled) total += c.price;
  return total;
}

namespace {

const std::string kAnnounceTopic = "market/announce";

std::string bid_service(const std::string& robot) { return "robot/" + robot + "/bid"; }
std::string award_service(const std::string& robot) { return "robot/" + robot + "/award"; }
std::string response_service(const std::string& robot) { return "robot/" + robot + "/response"; }
std::string validate_service(const std::string& peer) { return "peer/" + peer + "/validate"; }

[[noreturn]] void invariant_broken(const std::string& what) {
  throw SimError(SimErrc::ScenarioFatal, "invariant violated: " + what);
}

class World {
 public:
  World(const ScenarioConfig& config, std::ostream* trace)
      : config_(config),
        trace_(trace),
        signatures_(config.seed),
        ledger_(signatures_, LedgerConfig{.pow_difficulty = config.pow_difficulty,
                                          .max_tx_per_block = config.ledger.max_tx_per_block}),
        book_(ledger_),
        network_(queue_, config.link, SeededStream(config.seed, "network")),
        bus_(network_) {
    config.link.validate();
    for (const auto& [cap, spec] : config.capabilities) unit_costs_[cap] = spec.unit_cost;
    setup_accounts();
    setup_peers();
    setup_bus();
    release_tasks();
    queue_.set_observer([this](const FiredEvent& e) { on_event(e); });
    book_.set_observer([this](const SmartContract& c, const ContractEvent& e) { on_contract(c, e); });
  }

  SimulationResult run() {
    while (!queue_.empty()) {
      queue_.step();
      schedule_flush();
      check_invariants();
    }
    finish_checks();
    return collect();
  }

 private:
  struct Auction {
    bool open = true;
    std::vector<Bid> bids;
  };
  struct Tally {
    std::size_t replies = 0;
    std::size_t approvals = 0;
  };

  // ---- setup ----------------------------------------------------------------

  void setup_accounts() {
    std::vector<Endowment> endowments;
    for (const auto& o : config_.owners) {
      const auto owner = AccountId::human(o.label);
      for (const auto& asset : o.assets) registry_.register_asset(asset, owner);
    }
    for (const auto& r : config_.robots) {
      RobotAgent a;
      a.account = AccountId::robot(r.label);
      a.owner = AccountId::human(r.owner);
      a.capabilities = r.capabilities;
      a.role = r.role;
      a.operating_wallet_floor = r.wallet_floor;
      a.bid_margin = r.bid_margin;
      a.capacity = r.capacity;
      registry_.register_asset("robot/" + r.label, a.owner);
      endowments.push_back(Endowment{a.owner, a.account, r.endowment});
      agents_.emplace(r.label, std::move(a));
      work_streams_.emplace(r.label, SeededStream(config_.seed, "work/" + r.label));
    }
    ledger_.create_genesis(endowments);
    genesis_total_ = 0;
    for (const auto& [id, v] : ledger_.chain().balances()) genesis_total_ += v;
  }

  void setup_peers() {
    const auto total = config_.peers.total();
    peers_.reserve(total);
    for (std::size_t i = 0; i < total; ++i) {
      const auto honesty = i < config_.peers.honest ? Honesty::Honest : Honesty::FaultyReject;
      peers_.emplace_back(AccountId::human("peer-" + std::to_string(i + 1)), honesty, signatures_);
      peers_.back().receive(ledger_.chain().blocks().front());
    }
  }

  void setup_bus() {
    bus_.advertise(kAnnounceTopic);
    for (auto& [label, agent] : agents_) {
      const std::string me = label;
      if (can_sell(agent.role)) {
        bus_.subscribe(kAnnounceTopic, me, [this, me](const Message& m) { on_announcement(me, m); });
        bus_.serve(award_service(me), me, [this, me](const Message& m, MessageBus::Responder r) {
          on_award(me, m, std::move(r));
        });
      }
      if (can_buy(agent.role)) {
        bus_.serve(bid_service(me), me, [this](const Message& m, MessageBus::Responder r) { on_bid(m, std::move(r)); });
        bus_.serve(response_service(me), me,
                   [this](const Message& m, MessageBus::Responder r) { on_response(m, std::move(r)); });
      }
    }
    for (std::size_t i = 0; i < peers_.size(); ++i) {
      const auto& label = peers_[i].account().label;
      bus_.serve(validate_service(label), label, [this, i](const Message& m, MessageBus::Responder r) {
        peer_vote(i, m.body.at("contract_id").get<std::string>(), std::move(r), 0);
      });
    }
  }

  void release_tasks() {
    SeededStream stream(config_.seed, "tasks");
    std::map<std::string, std::vector<TaskRequest>> by_customer;
    std::size_t serial = 0;
    for (const auto& s : config_.contracts) {
      for (Tick release : s.schedule.release_times()) {
        if (release >= config_.duration) break;
        TaskRequest t;
        t.task_id = s.customer + "/t-" + std::to_string(++serial);
        t.spec = ServiceSpec{.task_kind = s.task_kind,
                             .parameters = s.parameters,
                             .required_capability = s.capability,
                             .work_duration = static_cast<Tick>(stream.uniform_int(s.work_duration.lo, s.work_duration.hi)),
                             .success_probability = s.success_probability};
        t.price = stream.uniform_int(s.price.lo, s.price.hi);
        t.release = release;
        t.deadline_offset = s.deadline_offset;
        by_customer[s.customer].push_back(std::move(t));
      }
    }
    for (auto& [customer, tasks] : by_customer) {
      std::stable_sort(tasks.begin(), tasks.end(),
                       [](const TaskRequest& a, const TaskRequest& b) { return a.release < b.release; });
      auto& agent = agents_.at(customer);
      std::set<Tick> times;
      for (auto& t : tasks) {
        times.insert(t.release);
        agent.tasks.push_back(std::move(t));
      }
      for (Tick t : times)
        queue_.schedule(t, EventKind::AgentStep, "release " + customer, [this, customer] { customer_turn(customer); });
    }
  }

  // ---- customer side --------------------------------------------------------

  Cents uncommitted_balance(const AccountId& customer) const {
    Cents reserved = 0;
    for (const auto& id : live_)
      if (const auto& c = book_.get(id); c.customer == customer && c.state == ContractState::Created) reserved += c.price;
    return ledger_.effective_balance(customer) - reserved;
  }

  void customer_turn(const std::string& label) {
    auto& agent = agents_.at(label);
    const Tick now = queue_.now();
    for (auto& action : customer_step(agent, uncommitted_balance(agent.account), now)) {
      if (std::holds_alternative<SkipUnfundedAction>(action)) {
        ++skipped_[label];
        continue;
      }
      auto& create = std::get<CreateContractAction>(action);
      const auto& c = book_.create_contract(agent.account, create.task.spec, create.task.price, create.deadline, now);
      const std::string id = c.contract_id;
      ++created_[label];
      live_.insert(id);
      auctions_[id] = Auction{};
      queue_.schedule(c.deadline, EventKind::ContractTimeout, "deadline " + id, [this, id] { on_deadline(id); });
      Announcement a{id, agent.account, c.spec.required_capability, c.spec.task_kind, c.price, c.spec.work_duration,
                     c.deadline};
      bus_.publish(kAnnounceTopic, label, to_json(a));
      queue_.schedule(now + config_.market.bid_window, EventKind::AgentStep, "award " + id,
                      [this, id] { close_auction(id); });
    }
  }

  void on_bid(const Message& m, MessageBus::Responder r) {
    const auto id = m.body.at("contract_id").get<std::string>();
    auto it = auctions_.find(id);
    const bool open = it != auctions_.end() && it->second.open;
    if (open) {
      Bid bid;
      bid.provider = AccountId::robot(m.sender);
      bid.amount = m.body.at("bid").get<Cents>();
      for (const auto& cap : m.body.at("capabilities")) bid.capabilities.insert(cap.get<std::string>());
      it->second.bids.push_back(std::move(bid));
    }
    r.reply(json{{"contract_id", id}, {"recorded", open}});
  }

  void close_auction(const std::string& id) {
    auto node = auctions_.extract(id);
    const auto& c = book_.get(id);
    if (node.empty() || c.state != ContractState::Created) return;
    std::vector<Bid> eligible;
    for (auto& b : node.mapped().bids)
      if (b.amount <= c.price) eligible.push_back(std::move(b));
    if (eligible.empty()) return;
    const auto result = book_.resolve_acceptances(id, std::move(eligible), queue_.now());
    if (!result.winner) return;
    const std::string customer = c.customer.label;
    bus_.request(award_service(result.winner->label), customer, json{{"contract_id", id}},
                 config_.market.request_timeout, [](const RequestOutcome&) {});
  }

  void on_response(const Message& m, MessageBus::Responder r) {
    const auto id = m.body.at("contract_id").get<std::string>();
    const auto& c = book_.get(id);
    bool accepted = false;
    if (c.state == ContractState::Executed && queue_.now() < c.deadline) {
      book_.deliver_response(id, queue_.now());
      accepted = true;
      start_vote(id);
    }
    r.reply(json{{"contract_id", id}, {"delivered", accepted}});
  }

  void start_vote(const std::string& id) {
    const std::string requester = book_.get(id).customer.label;
    tallies_[id] = Tally{};
    for (const auto& peer : peers_)
      bus_.request(validate_service(peer.account().label), requester, json{{"contract_id", id}},
                   config_.market.vote_timeout, [this, id](const RequestOutcome& o) { on_vote(id, o); });
  }

  void on_vote(const std::string& id, const RequestOutcome& o) {
    auto& t = tallies_.at(id);
    ++t.replies;
    if (!o.timed_out && o.reply.body.at("approve").get<bool>()) ++t.approvals;
    if (t.replies < peers_.size()) return;
    const auto tally = t;
    tallies_.erase(id);
    const auto& c = book_.get(id);
    if (c.state != ContractState::Delivered) return;  // deadline refunded it meanwhile
    const Tick now = queue_.now();
    book_.apply_quorum(id, tally.approvals, peers_.size(), now);
    if (c.state == ContractState::Validated) {
      book_.settle(id, now);
      sweep_earnings(agents_.at(c.provider->label), ledger_, now);
    } else {
      book_.refund(id, now);
    }
  }

  void on_deadline(const std::string& id) {
    auctions_.erase(id);
    if (!is_terminal(book_.get(id).state)) book_.refund(id, queue_.now());
  }

  // ---- provider side --------------------------------------------------------

  void on_announcement(const std::string& me, const Message& m) {
    const auto& agent = agents_.at(me);
    const auto a = announcement_from_json(m.body);
    json caps = json::array();
    for (const auto& cap : agent.capabilities) caps.push_back(cap);
    for (const auto& q : provider_step(agent, std::span<const Announcement>(&a, 1), unit_costs_, queue_.now()))
      bus_.request(bid_service(q.customer.label), me,
                   json{{"contract_id", q.contract_id}, {"bid", q.bid}, {"capabilities", caps}},
                   config_.market.request_timeout, [](const RequestOutcome&) {});
  }

  void on_award(const std::string& me, const Message& m, MessageBus::Responder r) {
    const auto id = m.body.at("contract_id").get<std::string>();
    const auto& c = book_.get(id);
    const bool mine = c.provider && c.provider->label == me && c.state == ContractState::Accepted;
    if (mine) {
      ++agents_.at(me).active_jobs;
      queue_.schedule(queue_.now() + c.spec.work_duration, EventKind::AgentStep, "work " + id + " by " + me,
                      [this, me, id] { finish_work(me, id); });
    }
    r.reply(json{{"contract_id", id}, {"started", mine}});
  }

  void finish_work(const std::string& me, const std::string& id) {
    auto& agent = agents_.at(me);
    --agent.active_jobs;
    const auto& c = book_.get(id);
    const Tick now = queue_.now();
    if (c.state != ContractState::Accepted || now >= c.deadline) return;
    auto outcome = perform_work(agent, c, work_streams_.at(me), now, signatures_);
    book_.submit_result(id, agent.account, std::move(outcome), now);
    bus_.request(response_service(c.customer.label), me, json{{"contract_id", id}},
                 config_.market.request_timeout, [](const RequestOutcome&) {});
  }

  // ---- validators -----------------------------------------------------------

  // Honest peers wait for the escrow block to reach their replica, re-checking
  // a bounded number of times before voting.
  void peer_vote(std::size_t index, const std::string& id, MessageBus::Responder r, int attempt) {
    const auto& peer = peers_[index];
    const auto& c = book_.get(id);
    if (peer.honesty() == Honesty::Honest && attempt < config_.market.vote_recheck_limit &&
        !check_contract(c, peer.replica(), signatures_).escrow_on_chain) {
      queue_.schedule(queue_.now() + config_.market.vote_recheck_interval, EventKind::QuorumVote,
                      "recheck " + id + " at " + peer.account().label,
                      [this, index, id, r, attempt] { peer_vote(index, id, r, attempt + 1); });
      return;
    }
    r.reply(json{{"contract_id", id}, {"approve", cast_vote(peer, c, signatures_)}});
  }

  // ---- mining ---------------------------------------------------------------

  void schedule_flush() {
    if (flush_scheduled_ || ledger_.pending().empty()) return;
    flush_scheduled_ = true;
    queue_.schedule(queue_.now() + config_.ledger.block_interval, EventKind::MineFlush, "mine", [this] {
      flush_scheduled_ = false;
      for (const auto& block : ledger_.flush()) broadcast_block(network_, "miner", peers_, block);
      chain_dirty_ = true;
    });
  }

  // ---- tracing and checks ---------------------------------------------------

  void write(const json& record) {
    if (trace_ != nullptr) *trace_ << record.dump() << '\n';
  }

  void on_event(const FiredEvent& e) {
    write(json{{"type", "event"},
               {"time", e.time},
               {"seq", e.seq},
               {"kind", std::string(to_string(e.kind))},
               {"summary", e.summary}});
  }

  void on_contract(const SmartContract& c, const ContractEvent& e) {
    write(json{{"type", "contract"},
               {"time", e.time},
               {"contract_id", c.contract_id},
               {"actor", to_string(e.actor)},
               {"step", static_cast<int>(e.step)},
               {"state_after", std::string(to_string(e.state_after))},
               {"detail", e.detail}});
    if (is_terminal(c.state)) {
      live_.erase(c.contract_id);
      const Cents held = ledger_.effective_balance(c.escrow_account);
      if (held != 0) invariant_broken(c.contract_id + " closed with " + std::to_string(held) + " in escrow");
    }
  }

  static Cents sum(const std::map<AccountId, Cents>& balances, const char* view) {
    Cents total = 0;
    for (const auto& [id, v] : balances) {
      if (v < 0) invariant_broken(std::string(view) + " balance of " + to_string(id) + " is negative");
      total += v;
    }
    return total;
  }

  void check_invariants() {
    if (const Cents eff = sum(ledger_.effective_balances(), "effective"); eff != genesis_total_)
      invariant_broken("effective balances sum to " + std::to_string(eff) + ", genesis issued " +
                       std::to_string(genesis_total_));
    if (chain_dirty_) {
      chain_dirty_ = false;
      if (const Cents on_chain = sum(ledger_.chain().balances(), "chain"); on_chain != genesis_total_)
        invariant_broken("chain balances sum to " + std::to_string(on_chain));
    }
    for (const auto& id : live_) {
      const auto& c = book_.get(id);
      const Cents expect = holds_escrow(c.state) ? c.price : 0;
      if (ledger_.effective_balance(c.escrow_account) != expect)
        invariant_broken(id + " escrow holds " + std::to_string(ledger_.effective_balance(c.escrow_account)) +
                         " in state " + std::string(to_string(c.state)));
    }
    if (!registry_.all_owners_human()) invariant_broken("a non-human owns an asset");
  }

  void finish_checks() {
    if (!ledger_.pending().empty()) invariant_broken("transactions left unmined");
    if (!live_.empty()) invariant_broken(*live_.begin() + " never reached a terminal state");
    converged_ = true;
    for (const auto& p : peers_)
      if (p.replica().size() != ledger_.chain().size() || p.replica().tip_hash() != ledger_.chain().tip_hash())
        converged_ = false;
  }

  SimulationResult collect() const {
    SimulationResult out;
    out.scenario = config_.name;
    out.seed = config_.seed;
    out.end_time = queue_.now();
    out.events = queue_.fired();
    for (const auto& [id, c] : book_.contracts()) out.contracts.push_back(c);
    out.chain = ledger_.chain().blocks();
    out.final_hash = ledger_.chain().tip_hash();
    out.balances = ledger_.chain().balances();
    out.genesis_total = genesis_total_;
    out.net = network_.stats();
    out.bus = bus_.stats();
    out.replicas_converged = converged_;

    std::map<std::string, AgentOutcome> by_label;
    for (const auto& [label, a] : agents_) {
      auto& o = by_label[label];
      o.label = label;
      o.owner = a.owner.label;
      o.role = a.role;
      auto bal = out.balances.find(a.account);
      o.final_balance = bal == out.balances.end() ? 0 : bal->second;
      if (auto it = created_.find(label); it != created_.end()) o.contracts_created = it->second;
      if (auto it = skipped_.find(label); it != skipped_.end()) o.tasks_skipped = it->second;
    }
    for (const auto& c : out.contracts) {
      if (c.state != ContractState::Settled) continue;
      by_label.at(c.customer.label).spent += c.price;
      auto& p = by_label.at(c.provider->label);
      p.earned += c.price;
      ++p.jobs_settled;
    }
    for (const auto& b : out.chain)
      for (const auto& tx : b.transactions)
        if (tx.memo == Memo::Sweep) by_label.at(tx.from.label).swept += tx.amount;
    for (auto& [label, o] : by_label) out.agents.push_back(std::move(o));

    for (const auto& spec : config_.owners) {
      OwnerOutcome o;
      o.label = spec.label;
      const auto account = AccountId::human(spec.label);
      auto bal = out.balances.find(account);
      o.balance = bal == out.balances.end() ? 0 : bal->second;
      for (const auto& [asset, owner] : registry_.entries()) {
        if (owner != account) continue;
        if (asset.starts_with("robot/"))
          o.robots.push_back(asset.substr(6));
        else
          o.assets.push_back(asset);
      }
      out.owners.push_back(std::move(o));
    }
    return out;
  }

  const ScenarioConfig& config_;
  std::ostream* trace_;
  KeyedDigestScheme signatures_;
  Ledger ledger_;
  ContractBook book_;
  EventQueue queue_;
  Network network_;
  MessageBus bus_;
  AssetRegistry registry_;
  UnitCosts unit_costs_;
  std::map<std::string, RobotAgent> agents_;
  std::map<std::string, SeededStream> work_streams_;
  std::vector<PeerNode> peers_;
  std::map<std::string, Auction> auctions_;
  std::map<std::string, Tally> tallies_;
  std::set<std::string> live_;
  std::map<std::string, std::size_t> created_;
  std::map<std::string, std::size_t> skipped_;
  Cents genesis_total_ = 0;
  bool flush_scheduled_ = false;
  bool chain_dirty_ = false;
  bool converged_ = false;
};

}  // namespace

SimulationResult run_simulation(const ScenarioConfig& config, std::ostream* trace) {
  config.validate();
  World world(config, trace);
  return world.run();
}

}  // namespace roboecon
