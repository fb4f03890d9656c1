#include "lshed/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace lshed {

using nlohmann::json;

namespace {

PlantEvent::Kind parse_event_kind(const std::string& s) {
  for (auto k : {PlantEvent::Kind::GeneratorTrip, PlantEvent::Kind::GeneratorRestore, PlantEvent::Kind::LoadFailure,
                 PlantEvent::Kind::ZoneLimitChange}) {
    if (to_string(k) == s) return k;
  }
  throw ScenarioError("unknown event kind '" + s + "'");
}

Variability parse_variability(const json& j) {
  const std::string kind = j.at("variability").get<std::string>();
  if (kind == "binary") return Variability::binary();
  if (kind == "continuous") return Variability::continuous();
  if (kind == "stepped") return Variability::stepped(j.at("levels").get<std::vector<double>>());
  throw ScenarioError("unknown variability '" + kind + "'");
}

json variability_json(const Variability& v, json& load) {
  switch (v.kind) {
    case Variability::Kind::Binary:
      load["variability"] = "binary";
      break;
    case Variability::Kind::Continuous:
      load["variability"] = "continuous";
      break;
    case Variability::Kind::Stepped:
      load["variability"] = "stepped";
      load["levels"] = v.levels;
      break;
  }
  return load;
}

ScenarioConfig from_json(const json& j) {
  ScenarioConfig s;
  const int version = j.value("schema_version", kScenarioSchemaVersion);
  if (version != kScenarioSchemaVersion)
    throw ScenarioError("unsupported scenario schema_version " + std::to_string(version));
  s.name = j.value("name", s.name);

  const json& win = j.at("window");
  s.window.t_start = to_millis(win.at("t_start").get<double>());
  s.window.t_end = to_millis(win.at("t_end").get<double>());
  s.window.tick = to_millis(win.at("tick").get<double>());

  if (j.contains("plant")) {
    const json& p = j.at("plant");
    s.tau_s = p.value("tau", s.tau_s);
    s.loss_fraction = p.value("loss_fraction", s.loss_fraction);
    s.active_mission = p.value("mission_id", s.active_mission);
  }

  for (const json& g : j.at("generation")) {
    s.generation.push_back({g.at("id").get<int>(), g.value("name", std::string{}), g.at("rated_power_w").get<double>(),
                            g.value("online", true)});
  }

  for (const json& l : j.at("loads")) {
    LoadSpec spec;
    spec.id = l.at("id").get<LoadId>();
    spec.name = l.value("name", std::string{});
    const std::string group = l.at("group").get<std::string>();
    auto g = parse_group(group);
    if (!g) throw ScenarioError("unknown load group '" + group + "'");
    spec.group = *g;
    spec.rated_power_w = l.at("rated_power_w").get<double>();
    spec.variability = parse_variability(l);
    spec.zone = l.value("zone", std::string{});
    s.fleet.push_back(std::move(spec));
  }

  if (j.contains("zones")) {
    for (const json& z : j.at("zones")) {
      s.zones.push_back({z.at("zone").get<std::string>(), z.at("limit_w").get<double>(),
                         z.at("members").get<std::vector<LoadId>>()});
    }
  }

  for (const json& m : j.at("missions")) {
    MissionWeightSet set;
    set.mission_id = m.at("mission_id").get<MissionId>();
    set.valid_from = m.value("valid_from", 0.0);
    for (const auto& [key, value] : m.at("weights").items()) {
      set.weights[static_cast<LoadId>(std::stoul(key))] = value.get<double>();
    }
    s.missions.push_back(std::move(set));
  }

  for (const json& p : j.at("profiles")) {
    LoadProfile prof;
    prof.load_id = p.at("load_id").get<LoadId>();
    for (const json& bp : p.at("breakpoints")) {
      prof.breakpoints.emplace_back(to_millis(bp.at(0).get<double>()), bp.at(1).get<double>());
    }
    s.profiles.push_back(std::move(prof));
  }

  if (j.contains("events")) {
    for (const json& e : j.at("events")) {
      PlantEvent ev;
      ev.time = to_millis(e.at("time").get<double>());
      ev.kind = parse_event_kind(e.at("kind").get<std::string>());
      ev.module_id = e.value("module_id", 0);
      ev.load_id = e.value("load_id", LoadId{0});
      ev.zone = e.value("zone", std::string{});
      ev.limit_w = e.value("limit_w", 0.0);
      s.events.push_back(std::move(ev));
    }
  }

  if (j.contains("impairment")) {
    const json& im = j.at("impairment");
    s.impairment.loss_probability = im.value("loss_probability", 0.0);
    s.impairment.latency_ms = im.value("latency_ms", 0.0);
    s.impairment.jitter_ms = im.value("jitter_ms", 0.0);
    s.impairment.seed = im.value("seed", std::uint64_t{42});
  }

  s.controller.loss_fraction = s.loss_fraction;
  s.controller.period_ms = s.window.tick;
  if (j.contains("controller")) {
    const json& c = j.at("controller");
    const std::string algo = c.value("algorithm", std::string{"advanced"});
    auto a = parse_algorithm(algo);
    if (!a) throw ScenarioError("unknown algorithm '" + algo + "'");
    s.controller.algorithm = *a;
    if (c.contains("period")) s.controller.period_ms = to_millis(c.at("period").get<double>());
    s.controller.solve_deadline_s = c.value("solve_deadline", s.controller.solve_deadline_s);
    s.controller.stale_limit = c.value("stale_limit", s.controller.stale_limit);
  }
  return s;
}

json to_json(const ScenarioConfig& s) {
  json j;
  j["schema_version"] = kScenarioSchemaVersion;
  j["name"] = s.name;
  j["window"] = {{"t_start", to_seconds(s.window.t_start)},
                 {"t_end", to_seconds(s.window.t_end)},
                 {"tick", to_seconds(s.window.tick)}};
  j["plant"] = {{"tau", s.tau_s}, {"loss_fraction", s.loss_fraction}, {"mission_id", s.active_mission}};

  j["generation"] = json::array();
  for (const auto& g : s.generation)
    j["generation"].push_back({{"id", g.id}, {"name", g.name}, {"rated_power_w", g.rated_power_w}, {"online", g.online}});

  j["loads"] = json::array();
  for (const auto& l : s.fleet) {
    json lj = {{"id", l.id},
               {"name", l.name},
               {"group", std::string(to_string(l.group))},
               {"rated_power_w", l.rated_power_w},
               {"zone", l.zone}};
    variability_json(l.variability, lj);
    j["loads"].push_back(std::move(lj));
  }

  j["zones"] = json::array();
  for (const auto& z : s.zones) j["zones"].push_back({{"zone", z.zone}, {"limit_w", z.limit_w}, {"members", z.members}});

  j["missions"] = json::array();
  for (const auto& m : s.missions) {
    json w = json::object();
    for (const auto& [id, weight] : m.weights) w[std::to_string(id)] = weight;
    j["missions"].push_back({{"mission_id", m.mission_id}, {"valid_from", m.valid_from}, {"weights", w}});
  }

  j["profiles"] = json::array();
  for (const auto& p : s.profiles) {
    json bps = json::array();
    for (const auto& [t, v] : p.breakpoints) bps.push_back({to_seconds(t), v});
    j["profiles"].push_back({{"load_id", p.load_id}, {"breakpoints", bps}});
  }

  j["events"] = json::array();
  for (const auto& e : s.events) {
    json ej = {{"time", to_seconds(e.time)}, {"kind", std::string(to_string(e.kind))}};
    switch (e.kind) {
      case PlantEvent::Kind::GeneratorTrip:
      case PlantEvent::Kind::GeneratorRestore:
        ej["module_id"] = e.module_id;
        break;
      case PlantEvent::Kind::LoadFailure:
        ej["load_id"] = e.load_id;
        break;
      case PlantEvent::Kind::ZoneLimitChange:
        ej["zone"] = e.zone;
        ej["limit_w"] = e.limit_w;
        break;
    }
    j["events"].push_back(std::move(ej));
  }

  j["impairment"] = {{"loss_probability", s.impairment.loss_probability},
                     {"latency_ms", s.impairment.latency_ms},
                     {"jitter_ms", s.impairment.jitter_ms},
                     {"seed", s.impairment.seed}};
  j["controller"] = {{"algorithm", std::string(to_string(s.controller.algorithm))},
                     {"period", to_seconds(s.controller.period_ms)},
                     {"solve_deadline", s.controller.solve_deadline_s},
                     {"stale_limit", s.controller.stale_limit}};
  return j;
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& json_text) {
  try {
    return from_json(json::parse(json_text));
  } catch (const json::exception& e) {
    throw ScenarioError(std::string("scenario: ") + e.what());
  } catch (const std::logic_error& e) {  // stoul on a malformed weight key
    throw ScenarioError(std::string("scenario: ") + e.what());
  }
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string scenario_to_json(const ScenarioConfig& scenario) { return to_json(scenario).dump(2) + "\n"; }

void save_scenario(const ScenarioConfig& scenario, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ScenarioError("cannot write scenario file " + path.string());
  out << scenario_to_json(scenario);
}

ValidationReport validate_scenario(const ScenarioConfig& s) {
  ValidationReport report;
  auto add = [&](std::string subject, std::string message) {
    report.issues.push_back({std::move(subject), std::move(message)});
  };

  if (s.missions.empty()) add("missions", "no mission weight sets");
  bool active_found = false;
  for (const auto& m : s.missions) {
    if (m.mission_id == s.active_mission) active_found = true;
    for (auto& issue : validate_fleet(s.fleet, s.zones, m).issues) {
      issue.subject = "mission " + std::to_string(m.mission_id) + " " + issue.subject;
      report.issues.push_back(std::move(issue));
    }
  }
  if (!s.missions.empty() && !active_found)
    add("plant", "active mission " + std::to_string(s.active_mission) + " has no weight set");

  if (!s.window.valid()) add("window", "t_end must exceed t_start by a whole number of ticks");
  if (!(s.tau_s >= 0.0)) add("plant", "tau must be nonnegative");
  if (!(s.loss_fraction >= 0.0)) add("plant", "loss fraction must be nonnegative");

  std::set<int> gen_ids;
  for (const auto& g : s.generation) {
    if (!gen_ids.insert(g.id).second) add("generation " + std::to_string(g.id), "duplicate module id");
    if (!(g.rated_power_w > 0.0)) add("generation " + std::to_string(g.id), "rated power must be positive");
  }

  std::set<LoadId> profiled;
  for (const auto& p : s.profiles) {
    const std::string subject = "profile " + std::to_string(p.load_id);
    const LoadSpec* spec = find_load(s.fleet, p.load_id);
    if (spec == nullptr) add(subject, "profile for unknown load");
    if (!profiled.insert(p.load_id).second) add(subject, "duplicate profile");
    for (std::size_t k = 0; k < p.breakpoints.size(); ++k) {
      const auto& [t, v] = p.breakpoints[k];
      if (k > 0 && !(t > p.breakpoints[k - 1].first)) add(subject, "breakpoints not strictly ascending");
      if (t < s.window.t_start || t > s.window.t_end) add(subject, "breakpoint outside the run window");
      if (spec != nullptr && !spec->variability.admits(v)) add(subject, "demand status outside the load's domain");
    }
  }

  for (const auto& e : s.events) {
    const std::string subject = std::string("event ") + std::string(to_string(e.kind)) + " at " +
                                std::to_string(to_seconds(e.time)) + " s";
    if (e.time < s.window.t_start || e.time > s.window.t_end) add(subject, "outside the run window");
    switch (e.kind) {
      case PlantEvent::Kind::GeneratorTrip:
      case PlantEvent::Kind::GeneratorRestore:
        if (!gen_ids.count(e.module_id)) add(subject, "unknown generation module " + std::to_string(e.module_id));
        break;
      case PlantEvent::Kind::LoadFailure:
        if (find_load(s.fleet, e.load_id) == nullptr) add(subject, "unknown load " + std::to_string(e.load_id));
        break;
      case PlantEvent::Kind::ZoneLimitChange: {
        bool known = false;
        for (const auto& z : s.zones) known = known || z.zone == e.zone;
        if (!known) add(subject, "unknown zone '" + e.zone + "'");
        if (!(e.limit_w >= 0.0)) add(subject, "limit must be nonnegative");
        break;
      }
    }
  }

  const auto& im = s.impairment;
  if (!(im.loss_probability >= 0.0 && im.loss_probability <= 1.0)) add("impairment", "loss probability outside [0,1]");
  if (!(im.latency_ms >= 0.0 && im.jitter_ms >= 0.0)) add("impairment", "latency and jitter must be nonnegative");

  if (!s.controller.valid()) add("controller", "need 0 < solve_deadline < period and stale_limit >= 1");
  if (s.controller.period_ms != s.window.tick) add("controller", "control period must equal the window tick");
  return report;
}

ScenarioConfig bundled_scenario() {
  ScenarioConfig s;
  s.name = "notional-mvdc-mpgm2-trip";
  s.fleet = default_fleet();
  s.generation = default_generation();
  s.missions.push_back(default_weights(s.fleet, 1));
  s.active_mission = 1;
  s.window = MissionWindow{0, 600'000, 100};
  s.tau_s = 0.2;
  s.loss_fraction = 0.02;
  s.controller.loss_fraction = s.loss_fraction;

  // Breakpoints in seconds; loads are numbered in fleet order:
  // 1-16 ACLC vital, 17-28 ACLC non-vital, 29-32 MW-class, 33-38 IPNC, 39-42 PMM.
  using Steps = std::vector<std::pair<double, double>>;
  auto set = [&](LoadId id, Steps steps) {
    LoadProfile p;
    p.load_id = id;
    for (auto [t, v] : steps) p.breakpoints.emplace_back(to_millis(t), v);
    s.profiles.push_back(std::move(p));
  };
  for (LoadId id = 1; id <= 12; ++id) set(id, {{0, 1.0}});
  set(13, {{0, 0.0}, {60, 1.0}});
  set(14, {{0, 0.0}, {60, 1.0}});
  set(15, {{0, 0.0}, {60, 1.0}, {480, 0.0}});
  set(16, {{0, 0.0}, {60, 1.0}, {480, 0.0}});
  for (LoadId id = 17; id <= 24; ++id) set(id, {{0, 1.0}});
  set(25, {{0, 0.0}, {120, 1.0}, {420, 0.0}});
  set(26, {{0, 0.0}, {120, 1.0}, {420, 0.0}});
  set(27, {{0, 0.0}, {120, 1.0}, {540, 0.0}});
  set(28, {{0, 0.0}, {120, 1.0}, {540, 0.0}});
  set(29, {{0, 1.0}});
  set(30, {{0, 1.0}});
  set(31, {{0, 0.0}, {150, 1.0}, {180, 0.0}, {240, 1.0}, {270, 0.0}});
  set(32, {{0, 0.0}, {200, 1.0}, {230, 0.0}});
  for (LoadId id = 33; id <= 38; ++id) set(id, {{0, 1.0}});
  for (LoadId id = 39; id <= 42; ++id)
    set(id, {{0, 0.30}, {60, 0.38}, {120, 0.45}, {180, 0.50}, {240, 0.52}, {395, 0.15}, {540, 0.12}});

  PlantEvent trip;
  trip.time = 310'000;
  trip.kind = PlantEvent::Kind::GeneratorTrip;
  trip.module_id = 2;  // MPGM2
  s.events.push_back(trip);
  return s;
}

PlantModel plant_model(const ScenarioConfig& s) {
  PlantModel m;
  m.fleet = s.fleet;
  m.generation = s.generation;
  m.zones = s.zones;
  m.profiles = s.profiles;
  m.events = sorted_events(s.events);
  m.tau_s = s.tau_s;
  m.loss_fraction = s.loss_fraction;
  m.mission_id = s.active_mission;
  return m;
}

MissionDatabase mission_database(const ScenarioConfig& s) { return MissionDatabase(s.missions); }

ControlDatabase control_database(const ScenarioConfig& s) {
  ControlDatabase db;
  db.fleet = s.fleet;
  db.missions = mission_database(s);
  db.zones = s.zones;
  for (const auto& e : s.events) {
    if (e.kind == PlantEvent::Kind::LoadFailure || e.kind == PlantEvent::Kind::ZoneLimitChange)
      db.constraint_events.push_back(e);
  }
  db.constraint_events = sorted_events(std::move(db.constraint_events));
  return db;
}

}  // namespace lshed
