#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "lshed/scenario.hpp"

using namespace lshed;

TEST(Scenario, BundledValidates) {
  const ScenarioConfig s = bundled_scenario();
  const ValidationReport r = validate_scenario(s);
  EXPECT_TRUE(r.ok()) << r.to_string();
  EXPECT_EQ(s.window.tick_count(), 6000u);
  EXPECT_EQ(s.fleet.size(), 42u);
}

TEST(Scenario, BundledFileMatchesLibrary) {
  const ScenarioConfig file = load_scenario(std::filesystem::path(LSHED_SCENARIO_DIR) / "notional_mvdc.json");
  EXPECT_EQ(file, bundled_scenario());
}

TEST(Scenario, JsonRoundTrip) {
  ScenarioConfig s = bundled_scenario();
  s.fleet[3].variability = Variability::stepped({0.5, 1.0});
  s.fleet[3].zone = "fwd";
  s.fleet[4].zone = "fwd";
  s.zones = {{"fwd", 3e6, {4, 5}}};
  s.events.push_back({400'000, PlantEvent::Kind::ZoneLimitChange, 0, 0, "fwd", 1e6});
  s.events.push_back({450'000, PlantEvent::Kind::LoadFailure, 0, 7, "", 0.0});
  s.impairment = {0.1, 20.0, 5.0, 1234};
  s.controller.algorithm = Algorithm::Baseline;
  s.missions.push_back(default_weights(s.fleet, 1));
  s.missions.back().valid_from = 300.0;
  EXPECT_EQ(parse_scenario(scenario_to_json(s)), s);
}

TEST(Scenario, ParseErrors) {
  EXPECT_THROW(parse_scenario("{"), ScenarioError);
  EXPECT_THROW(parse_scenario("{}"), ScenarioError);
  std::string text = scenario_to_json(bundled_scenario());
  std::string bad_group = text;
  bad_group.replace(bad_group.find("\"ACLC_Vital\""), 12, "\"Bogus\"");
  EXPECT_THROW(parse_scenario(bad_group), ScenarioError);
  std::string bad_version = text;
  bad_version.replace(bad_version.find("\"schema_version\": 1"), 19, "\"schema_version\": 9");
  EXPECT_THROW(parse_scenario(bad_version), ScenarioError);
  EXPECT_THROW(load_scenario("/nonexistent/scenario.json"), ScenarioError);
}

TEST(Scenario, ValidationFindsProblems) {
  auto issues = [](ScenarioConfig s) { return validate_scenario(s).issues.size(); };
  {
    ScenarioConfig s = bundled_scenario();
    s.events[0].time = 700'000;
    EXPECT_GT(issues(s), 0u);
  }
  {
    ScenarioConfig s = bundled_scenario();
    s.profiles[0].breakpoints.push_back({650'000, 1.0});
    EXPECT_GT(issues(s), 0u);
  }
  {
    ScenarioConfig s = bundled_scenario();
    s.profiles[0].breakpoints = {{0, 0.5}};  // binary load
    EXPECT_GT(issues(s), 0u);
  }
  {
    ScenarioConfig s = bundled_scenario();
    s.controller.period_ms = 200;
    EXPECT_GT(issues(s), 0u);
  }
  {
    ScenarioConfig s = bundled_scenario();
    s.fleet[1].id = s.fleet[0].id;
    EXPECT_GT(issues(s), 0u);
  }
  {
    ScenarioConfig s = bundled_scenario();
    s.events[0].module_id = 17;
    EXPECT_GT(issues(s), 0u);
  }
  {
    ScenarioConfig s = bundled_scenario();
    s.active_mission = 4;
    EXPECT_GT(issues(s), 0u);
  }
}

TEST(Scenario, BundledShape) {
  const ScenarioConfig s = bundled_scenario();
  const PlantModel m = plant_model(s);
  auto demand = [&](TimeMs t) {
    const PlantState st = plant_init(m, t);
    double d = 0.0;
    for (std::size_t i = 0; i < st.loads.size(); ++i) d += st.loads[i].demand * s.fleet[i].rated_power_w;
    return d;
  };
  auto capacity = [&](TimeMs t) { return make_snapshot(m, plant_init(m, t)).total_capacity_w; };
  EXPECT_DOUBLE_EQ(capacity(309'900), 96e6);
  EXPECT_DOUBLE_EQ(capacity(310'000), 60e6);
  double peak = 0.0;
  for (TimeMs t = 0; t < 600'000; t += 100) peak = std::max(peak, demand(t));
  EXPECT_GT(peak, 80e6);
  EXPECT_LT(peak, 90e6);
  for (TimeMs t = 310'000; t < 395'000; t += 100) EXPECT_GT(demand(t), 60e6);
  for (TimeMs t = 395'000; t < 600'000; t += 100) EXPECT_LT(demand(t), 60e6);
}
