#pragma once
//
// Discrete-time shipboard plant: piecewise-constant demand playback, status
// ceilings from the controller, first-order actuator lag on load power and
// scripted generation / damage events.
//

#include <set>
#include <span>
#include <utility>
#include <vector>

#include "lshed/model.hpp"

namespace lshed {

struct LoadProfile {
  LoadId load_id = 0;
  std::vector<std::pair<TimeMs, double>> breakpoints;  // strictly ascending times
  bool operator==(const LoadProfile&) const = default;
};

// Piecewise-constant hold of the latest breakpoint at or before t; 0 before the first.
double sample_profile(const LoadProfile& profile, TimeMs t);

struct PlantEvent {
  enum class Kind { GeneratorTrip, GeneratorRestore, LoadFailure, ZoneLimitChange };
  TimeMs time = 0;
  Kind kind = Kind::GeneratorTrip;
  int module_id = 0;   // generator events
  LoadId load_id = 0;  // load failure
  std::string zone;    // zone limit change
  double limit_w = 0.0;
  bool operator==(const PlantEvent&) const = default;
};

std::string_view to_string(PlantEvent::Kind kind);

struct PlantModel {
  Fleet fleet;
  std::vector<GenerationModule> generation;
  std::vector<ZoneLimit> zones;
  std::vector<LoadProfile> profiles;  // loads without a profile have zero demand
  std::vector<PlantEvent> events;     // any order
  double tau_s = 0.2;
  double loss_fraction = 0.02;
  MissionId mission_id = 1;
};

struct PlantLoad {
  LoadId load_id = 0;
  double commanded = 1.0;  // status ceiling from the controller
  double demand = 0.0;
  double target_w = 0.0;
  double measured_w = 0.0;
  bool operator==(const PlantLoad&) const = default;
};

struct PlantState {
  TimeMs clock_ms = 0;
  std::vector<PlantLoad> loads;  // fleet order
  std::vector<GenerationModule> generation;
  std::vector<ZoneLimit> zones;
  std::set<LoadId> forced_off;
  std::size_t next_event = 0;  // into the time-sorted event list
  std::size_t ignored_commands = 0;
  bool operator==(const PlantState&) const = default;
};

// Plant at t0 in steady state: events due at t0 applied, all commands at 1,
// measured power equal to target.
PlantState plant_init(const PlantModel& model, TimeMs t0);

PlantState apply_commands(const PlantModel& model, PlantState state, std::span<const ShedCommand> commands);

SystemSnapshot make_snapshot(const PlantModel& model, const PlantState& state);

std::pair<PlantState, SystemSnapshot> plant_tick(const PlantModel& model, PlantState state, TimeMs dt_ms);

// Events sorted by time (stable), as the plant consumes them.
std::vector<PlantEvent> sorted_events(std::vector<PlantEvent> events);

}  // namespace lshed
