#include "roboecon/scenario.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace roboecon {

using nlohmann::json;

ConfigError::ConfigError(std::string field, const std::string& message, std::optional<std::size_t> line)
    : std::runtime_error(line ? "line " + std::to_string(*line) + ": " + message
                              : (field.empty() ? message : field + ": " + message)),
      field_(std::move(field)),
      line_(line) {}

std::vector<Tick> TaskSchedule::release_times() const {
  std::vector<Tick> out;
  out.reserve(count);
  for (std::size_t slot = 0; out.size() < count; ++slot)
    if (slot % cycle < active) out.push_back(start + static_cast<Tick>(slot) * interval);
  return out;
}

namespace {

// Reads one JSON object, tracking which keys were consumed so leftovers can
// be reported as unknown fields.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string field(std::string_view key) const {
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
  }

  const json* find(std::string_view key) {
    auto it = j_.find(std::string(key));
    if (it == j_.end()) return nullptr;
    seen_.insert(std::string(key));
    return &*it;
  }

  const json& require(std::string_view key) {
    const json* v = find(key);
    if (v == nullptr) throw ConfigError(field(key), "missing required field");
    return *v;
  }

  template <typename T>
  T get(std::string_view key) {
    return convert<T>(require(key), field(key));
  }

  template <typename T>
  T get_or(std::string_view key, T fallback) {
    const json* v = find(key);
    return v == nullptr ? fallback : convert<T>(*v, field(key));
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.contains(it.key())) throw ConfigError(field(it.key()), "unknown field");
  }

  template <typename T>
  static T convert(const json& v, const std::string& where) {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError(where, "expected a boolean");
    } else if constexpr (std::is_unsigned_v<T>) {
      if (!v.is_number_unsigned()) throw ConfigError(where, "expected a non-negative integer");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ConfigError(where, "expected an integer");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError(where, "expected a number");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError(where, "expected a string");
    }
    return v.get<T>();
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

const json& require_array(const json& v, const std::string& where) {
  if (!v.is_array()) throw ConfigError(where, "expected an array");
  return v;
}

IntRange read_range(const json& v, const std::string& where) {
  if (v.is_number_integer()) {
    auto x = v.get<std::int64_t>();
    return {x, x};
  }
  if (v.is_array() && v.size() == 2 && v[0].is_number_integer() && v[1].is_number_integer()) {
    IntRange r{v[0].get<std::int64_t>(), v[1].get<std::int64_t>()};
    if (r.lo > r.hi) throw ConfigError(where, "range lower bound exceeds upper bound");
    return r;
  }
  throw ConfigError(where, "expected an integer or a [lo, hi] integer pair");
}

OwnerSpec read_owner(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  OwnerSpec o;
  o.label = r.get<std::string>("label");
  if (const json* assets = r.find("assets"))
    for (const auto& a : require_array(*assets, r.field("assets")))
      o.assets.push_back(ObjectReader::convert<std::string>(a, r.field("assets")));
  r.finish();
  return o;
}

RobotSpec read_robot(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  RobotSpec s;
  s.label = r.get<std::string>("label");
  s.owner = r.get<std::string>("owner");
  s.endowment = r.get_or<std::int64_t>("endowment", 0);
  try {
    s.role = role_policy_from_string(r.get_or<std::string>("role", "dual"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(r.field("role"), e.what());
  }
  if (const json* caps = r.find("capabilities"))
    for (const auto& c : require_array(*caps, r.field("capabilities")))
      s.capabilities.insert(ObjectReader::convert<std::string>(c, r.field("capabilities")));
  s.wallet_floor = r.get_or<std::int64_t>("wallet_floor", 0);
  s.bid_margin = r.get_or<double>("bid_margin", 0.0);
  s.capacity = r.get_or<std::size_t>("capacity", 1);
  r.finish();
  if (s.endowment < 0) throw ConfigError(r.field("endowment"), "must be >= 0");
  if (s.wallet_floor < 0) throw ConfigError(r.field("wallet_floor"), "must be >= 0");
  if (s.bid_margin < 0) throw ConfigError(r.field("bid_margin"), "must be >= 0");
  if (s.capacity == 0) throw ConfigError(r.field("capacity"), "must be >= 1");
  return s;
}

CapabilitySpec read_capability(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  CapabilitySpec c;
  c.unit_cost = r.get<std::int64_t>("unit_cost");
  {
    ObjectReader wr(r.require("cost_weights"), r.field("cost_weights"));
    c.cost_weights.labor = wr.get<std::int64_t>("labor");
    c.cost_weights.consumables = wr.get<std::int64_t>("consumables");
    c.cost_weights.capital = wr.get<std::int64_t>("capital");
    wr.finish();
    if (c.cost_weights.labor < 0 || c.cost_weights.consumables < 0 || c.cost_weights.capital < 0 ||
        c.cost_weights.total() == 0)
      throw ConfigError(r.field("cost_weights"), "weights must be >= 0 with a positive sum");
  }
  r.finish();
  if (c.unit_cost < 0) throw ConfigError(r.field("unit_cost"), "must be >= 0");
  return c;
}

TaskStream read_stream(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  TaskStream t;
  t.customer = r.get<std::string>("customer");
  t.capability = r.get<std::string>("capability");
  t.task_kind = r.get_or<std::string>("task_kind", t.capability);
  if (const json* params = r.find("parameters")) {
    ObjectReader pr(*params, r.field("parameters"));
    for (auto it = params->begin(); it != params->end(); ++it) t.parameters[it.key()] = pr.get<double>(it.key());
    pr.finish();
  }
  t.price = read_range(r.require("price"), r.field("price"));
  t.work_duration = read_range(r.require("work_duration"), r.field("work_duration"));
  t.success_probability = r.get_or<double>("success_probability", 1.0);
  t.deadline_offset = r.get<Tick>("deadline_offset");
  {
    ObjectReader sr(r.require("schedule"), r.field("schedule"));
    t.schedule.start = sr.get<Tick>("start");
    t.schedule.interval = sr.get_or<Tick>("interval", 1);
    t.schedule.count = sr.get<std::size_t>("count");
    t.schedule.cycle = sr.get_or<std::size_t>("cycle", 1);
    t.schedule.active = sr.get_or<std::size_t>("active", t.schedule.cycle);
    sr.finish();
    if (t.schedule.cycle == 0 || t.schedule.active == 0 || t.schedule.active > t.schedule.cycle)
      throw ConfigError(r.field("schedule"), "need 1 <= active <= cycle");
    if (t.schedule.interval == 0) throw ConfigError(r.field("schedule.interval"), "must be >= 1");
  }
  r.finish();
  if (t.price.lo < 0) throw ConfigError(r.field("price"), "must be >= 0");
  if (t.work_duration.lo < 1) throw ConfigError(r.field("work_duration"), "must be >= 1");
  if (!(t.success_probability >= 0.0 && t.success_probability <= 1.0))
    throw ConfigError(r.field("success_probability"), "must be within [0, 1]");
  if (t.deadline_offset == 0) throw ConfigError(r.field("deadline_offset"), "must be >= 1");
  return t;
}

EconParams read_econ(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  EconParams e;
  {
    ObjectReader m(r.require("manual"), r.field("manual"));
    e.manual.unit_cost = m.get<std::int64_t>("unit_cost");
    e.manual.area_m2 = m.get<std::int64_t>("area_m2");
    e.manual.frequency_per_week = m.get<std::int64_t>("frequency_per_week");
    e.manual.weeks_per_year = m.get<std::int64_t>("weeks_per_year");
    e.manual.consumables_annual = m.get<std::int64_t>("consumables_annual");
    m.finish();
  }
  {
    ObjectReader m(r.require("robot"), r.field("robot"));
    e.robot.maintenance_minutes_per_day = m.get<std::int64_t>("maintenance_minutes_per_day");
    e.robot.specialist_hourly_wage = m.get<std::int64_t>("specialist_hourly_wage");
    e.robot.days_per_week = m.get<std::int64_t>("days_per_week");
    e.robot.weeks_per_year = m.get<std::int64_t>("weeks_per_year");
    e.robot.consumables_repair_annual = m.get<std::int64_t>("consumables_repair_annual");
    e.robot.robot_price = m.get<std::int64_t>("robot_price");
    e.robot.depreciation_years = m.get<std::int64_t>("depreciation_years");
    e.robot.capital_carrying_annual = m.get_or<std::int64_t>("capital_carrying_annual", 0);
    m.finish();
  }
  r.finish();
  return e;
}

ScenarioConfig read_root(const json& j) {
  ObjectReader r(j, "");
  const auto schema = r.get<std::string>("schema");
  if (schema != kScenarioSchema)
    throw ConfigError("schema", "unsupported schema '" + schema + "', expected " + std::string(kScenarioSchema));
  ScenarioConfig c;
  c.name = r.get_or<std::string>("name", "scenario");
  c.seed = r.get<std::uint64_t>("seed");
  c.duration = r.get<Tick>("duration");
  c.tick_seconds = r.get_or<double>("tick_seconds", 1.0);

  {
    ObjectReader ar(r.require("agents"), "agents");
    const auto& owners = require_array(ar.require("owners"), "agents.owners");
    for (std::size_t i = 0; i < owners.size(); ++i)
      c.owners.push_back(read_owner(owners[i], "agents.owners[" + std::to_string(i) + "]"));
    const auto& robots = require_array(ar.require("robots"), "agents.robots");
    for (std::size_t i = 0; i < robots.size(); ++i)
      c.robots.push_back(read_robot(robots[i], "agents.robots[" + std::to_string(i) + "]"));
    ar.finish();
  }

  if (const json* caps = r.find("capabilities")) {
    if (!caps->is_object()) throw ConfigError("capabilities", "expected an object");
    for (auto it = caps->begin(); it != caps->end(); ++it)
      c.capabilities[it.key()] = read_capability(it.value(), "capabilities." + it.key());
  }

  if (const json* peers = r.find("peers")) {
    ObjectReader pr(*peers, "peers");
    c.peers.honest = pr.get_or<std::size_t>("honest", 3);
    c.peers.faulty_reject = pr.get_or<std::size_t>("faulty_reject", 0);
    pr.finish();
  }

  if (const json* link = r.find("link")) {
    ObjectReader lr(*link, "link");
    c.link.base_latency = lr.get_or<Tick>("base_latency", 1);
    c.link.jitter = lr.get_or<Tick>("jitter", 0);
    c.link.drop_probability = lr.get_or<double>("drop_probability", 0.0);
    lr.finish();
  }

  c.pow_difficulty = r.get_or<int>("pow_difficulty", 0);

  if (const json* ledger = r.find("ledger")) {
    ObjectReader lr(*ledger, "ledger");
    c.ledger.max_tx_per_block = lr.get_or<std::size_t>("max_tx_per_block", 16);
    c.ledger.block_interval = lr.get_or<Tick>("block_interval", 5);
    lr.finish();
  }

  if (const json* market = r.find("market")) {
    ObjectReader mr(*market, "market");
    c.market.bid_window = mr.get_or<Tick>("bid_window", c.market.bid_window);
    c.market.request_timeout = mr.get_or<Tick>("request_timeout", c.market.request_timeout);
    c.market.vote_timeout = mr.get_or<Tick>("vote_timeout", c.market.vote_timeout);
    c.market.vote_recheck_interval = mr.get_or<Tick>("vote_recheck_interval", c.market.vote_recheck_interval);
    c.market.vote_recheck_limit = mr.get_or<int>("vote_recheck_limit", c.market.vote_recheck_limit);
    mr.finish();
  }

  if (const json* streams = r.find("contracts")) {
    require_array(*streams, "contracts");
    for (std::size_t i = 0; i < streams->size(); ++i)
      c.contracts.push_back(read_stream((*streams)[i], "contracts[" + std::to_string(i) + "]"));
  }

  if (const json* econ = r.find("econ")) c.econ = read_econ(*econ, "econ");
  r.finish();
  c.validate();
  return c;
}

std::size_t line_of_offset(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

}  // namespace

void ScenarioConfig::validate() const {
  std::set<std::string> labels;
  auto claim = [&](const std::string& label, const std::string& where) {
    if (label.empty()) throw ConfigError(where, "label must not be empty");
    if (!labels.insert(label).second) throw ConfigError(where, "duplicate account label '" + label + "'");
  };
  if (duration == 0) throw ConfigError("duration", "must be >= 1");
  if (tick_seconds <= 0) throw ConfigError("tick_seconds", "must be positive");
  for (std::size_t i = 0; i < owners.size(); ++i) claim(owners[i].label, "agents.owners[" + std::to_string(i) + "].label");
  std::set<std::string> owner_labels;
  for (const auto& o : owners) owner_labels.insert(o.label);
  std::set<std::string> robot_labels;
  for (std::size_t i = 0; i < robots.size(); ++i) {
    const auto where = "agents.robots[" + std::to_string(i) + "]";
    claim(robots[i].label, where + ".label");
    robot_labels.insert(robots[i].label);
    if (!owner_labels.contains(robots[i].owner))
      throw ConfigError(where + ".owner", "unknown owner '" + robots[i].owner + "'");
    for (const auto& cap : robots[i].capabilities)
      if (!capabilities.contains(cap))
        throw ConfigError(where + ".capabilities", "undefined capability '" + cap + "'");
  }
  for (const auto& reserved : {std::string("miner")}) claim(reserved, "agents");
  if (peers.total() == 0) throw ConfigError("peers", "need at least one validator peer");
  for (std::size_t i = 0; i < peers.total(); ++i) claim("peer-" + std::to_string(i + 1), "agents");
  try {
    link.validate();
  } catch (const SimError& e) {
    throw ConfigError("link", e.what());
  }
  if (pow_difficulty < 0 || pow_difficulty > 32) throw ConfigError("pow_difficulty", "must be within [0, 32]");
  if (ledger.max_tx_per_block == 0) throw ConfigError("ledger.max_tx_per_block", "must be >= 1");
  if (ledger.block_interval == 0) throw ConfigError("ledger.block_interval", "must be >= 1");
  if (market.request_timeout == 0 || market.vote_timeout == 0)
    throw ConfigError("market", "timeouts must be >= 1");
  if (market.vote_recheck_limit < 0) throw ConfigError("market.vote_recheck_limit", "must be >= 0");
  for (std::size_t i = 0; i < contracts.size(); ++i) {
    const auto where = "contracts[" + std::to_string(i) + "]";
    if (!robot_labels.contains(contracts[i].customer))
      throw ConfigError(where + ".customer", "unknown robot '" + contracts[i].customer + "'");
    if (!capabilities.contains(contracts[i].capability))
      throw ConfigError(where + ".capability", "undefined capability '" + contracts[i].capability + "'");
  }
}

ScenarioConfig parse_scenario(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", e.what(), line_of_offset(text, e.byte == 0 ? 0 : e.byte - 1));
  }
  try {
    return read_root(j);
  } catch (const json::exception& e) {
    throw ConfigError("", e.what());
  }
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

ScenarioConfig cleaner_scenario(std::uint64_t seed) {
  constexpr Tick kDay = 24 * 60;  // one tick per minute
  ScenarioConfig c;
  c.name = "cleaner";
  c.seed = seed;
  c.duration = 52 * 7 * kDay;
  c.tick_seconds = 60.0;
  c.owners = {OwnerSpec{"maurice", {"entry-hall"}}, OwnerSpec{"mo-capital", {}}};
  c.robots = {
      RobotSpec{.label = "maurice-bot", .owner = "maurice", .endowment = 15'600'00, .role = RolePolicy::CustomerOnly, .capabilities = {}},
      RobotSpec{.label = "m-o", .owner = "mo-capital", .endowment = 0, .role = RolePolicy::ProviderOnly,
                .capabilities = {"cleaning"}},
  };
  const auto robot_cost = annual_robot_cost(cleaner_robot_model());
  c.capabilities["cleaning"] =
      CapabilitySpec{.unit_cost = 50, .cost_weights = {robot_cost.labor, robot_cost.consumables, robot_cost.capital}};
  c.peers = PeerMix{5, 0};
  c.link = LinkModel{2, 1, 0.0};
  c.pow_difficulty = 8;
  c.contracts = {TaskStream{.customer = "maurice-bot",
                            .task_kind = "cleaning",
                            .capability = "cleaning",
                            .parameters = {{"area_m2", 600.0}},
                            .price = {60'00, 60'00},
                            .work_duration = {120, 120},
                            .success_probability = 1.0,
                            .deadline_offset = 12 * 60,
                            .schedule = {.start = 8 * 60, .interval = kDay, .count = 260, .cycle = 7, .active = 5}}};
  c.econ = EconParams{cleaner_manual_model(), cleaner_robot_model()};
  c.validate();
  return c;
}

}  // namespace roboecon
