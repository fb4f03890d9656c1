#pragma once
//
// Scenario files: fleet, generation, zones, mission weights, demand profiles,
// plant events, run window, plant constants, link impairment and controller
// settings, stored as JSON in SI units (watts, seconds).
//

#include <filesystem>
#include <string>
#include <vector>

#include "lshed/controller.hpp"
#include "lshed/link.hpp"
#include "lshed/model.hpp"
#include "lshed/operability.hpp"
#include "lshed/plant.hpp"

namespace lshed {

inline constexpr int kScenarioSchemaVersion = 1;

struct ScenarioConfig {
  std::string name = "unnamed";
  Fleet fleet;
  std::vector<GenerationModule> generation;
  std::vector<ZoneLimit> zones;
  std::vector<MissionWeightSet> missions;
  MissionId active_mission = 1;
  std::vector<LoadProfile> profiles;
  std::vector<PlantEvent> events;
  MissionWindow window;
  double tau_s = 0.2;
  double loss_fraction = 0.02;
  ImpairmentConfig impairment;
  ControllerConfig controller;

  bool operator==(const ScenarioConfig&) const = default;
};

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parse / serialize. Parse errors (bad JSON, wrong types, unknown enum names)
// throw ScenarioError; semantic problems are reported by validate_scenario.
ScenarioConfig parse_scenario(const std::string& json_text);
ScenarioConfig load_scenario(const std::filesystem::path& path);
std::string scenario_to_json(const ScenarioConfig& scenario);
void save_scenario(const ScenarioConfig& scenario, const std::filesystem::path& path);

ValidationReport validate_scenario(const ScenarioConfig& scenario);

// Notional 600 s run: demand ramps to about 85 MW, MPGM2 trips at 310 s
// leaving 60 MW, demand falls below the residual capacity at 395 s.
ScenarioConfig bundled_scenario();

PlantModel plant_model(const ScenarioConfig& scenario);
ControlDatabase control_database(const ScenarioConfig& scenario);
MissionDatabase mission_database(const ScenarioConfig& scenario);

}  // namespace lshed
