#pragma once
//
// Load-shedding controller: consumes plant telemetry once per control period
// and produces status ceilings, using either the staged baseline or the
// mission-weighted optimizer.
//
// Commands are ceilings: the plant serves min(command, demand). The optimizer
// never plans a load above its demand status; a load it serves in full is
// released with ceiling 1, so later demand increases are not blocked for a
// tick. Curtailed loads get their planned status.
//

#include <optional>
#include <set>
#include <string_view>
#include <vector>

#include "lshed/baseline.hpp"
#include "lshed/model.hpp"
#include "lshed/optimizer.hpp"
#include "lshed/plant.hpp"

namespace lshed {

enum class Algorithm { Baseline, Advanced };
std::string_view to_string(Algorithm a);
std::optional<Algorithm> parse_algorithm(std::string_view name);

struct ControllerConfig {
  Algorithm algorithm = Algorithm::Advanced;
  TimeMs period_ms = 100;
  double solve_deadline_s = 0.05;
  int stale_limit = 5;  // ticks without telemetry before the failsafe engages
  double loss_fraction = 0.02;
  bool operator==(const ControllerConfig&) const = default;

  bool valid() const {
    return period_ms > 0 && solve_deadline_s > 0.0 && solve_deadline_s < to_seconds(period_ms) && stale_limit >= 1 &&
           loss_fraction >= 0.0;
  }
};

// What the controller knows besides telemetry: fleet, mission weights, zone
// limits and the scheduled damage / line-flow updates.
struct ControlDatabase {
  Fleet fleet;
  MissionDatabase missions;
  std::vector<ZoneLimit> zones;
  std::vector<PlantEvent> constraint_events;  // LoadFailure and ZoneLimitChange, sorted by time
};

struct ControlDiagnostics {
  bool solved = false;
  bool optimal = true;
  double solve_time_s = 0.0;
  std::uint64_t nodes = 0;
  double budget_w = 0.0;
  double planned_power_w = 0.0;  // sum of rated x min(ceiling, demand) after this step
  bool unknown_mission = false;
  bool feasible = true;          // planned batch satisfies the supply, zone and forced-off constraints
};

class Controller {
 public:
  Controller(ControllerConfig config, ControlDatabase database);

  // Processes one snapshot and returns the ceilings that changed.
  std::vector<ShedCommand> on_telemetry(const SystemSnapshot& snapshot);

  // Current ceiling for every fleet load, fleet order.
  std::vector<ShedCommand> held_commands() const;
  double ceiling(LoadId id) const;

  const ControllerConfig& config() const { return config_; }
  const ControlDiagnostics& diagnostics() const { return diag_; }
  const BaselineState& baseline_state() const { return baseline_; }
  const std::set<LoadId>& forced_off() const { return forced_off_; }

 private:
  void advance_database(TimeMs now);
  std::vector<ShedCommand> step_baseline(const SystemSnapshot& snapshot);
  std::vector<ShedCommand> step_advanced(const SystemSnapshot& snapshot);
  void finish_diagnostics(const SystemSnapshot& snapshot, const std::optional<ShedInstance>& instance);

  ControllerConfig config_;
  ControlDatabase db_;
  std::vector<double> ceilings_;  // fleet order
  BaselineState baseline_;
  std::optional<TimeMs> last_time_;
  std::set<LoadId> forced_off_;
  std::vector<ZoneLimit> zones_;
  std::size_t next_event_ = 0;
  ControlDiagnostics diag_;
};

}  // namespace lshed
