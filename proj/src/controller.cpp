#include "lshed/controller.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "lshed/log.hpp"

namespace lshed {

namespace {
constexpr double kCeilingTol = 1e-12;
}

std::string_view to_string(Algorithm a) { return a == Algorithm::Baseline ? "baseline" : "advanced"; }

std::optional<Algorithm> parse_algorithm(std::string_view name) {
  if (name == "baseline") return Algorithm::Baseline;
  if (name == "advanced") return Algorithm::Advanced;
  return std::nullopt;
}

Controller::Controller(ControllerConfig config, ControlDatabase database)
    : config_(config), db_(std::move(database)), ceilings_(db_.fleet.size(), 1.0), zones_(db_.zones) {
  if (!config_.valid()) throw std::invalid_argument("invalid controller configuration");
  db_.constraint_events = sorted_events(std::move(db_.constraint_events));
}

std::vector<ShedCommand> Controller::held_commands() const {
  std::vector<ShedCommand> out;
  out.reserve(ceilings_.size());
  for (std::size_t i = 0; i < ceilings_.size(); ++i) out.push_back({db_.fleet[i].id, ceilings_[i]});
  return out;
}

double Controller::ceiling(LoadId id) const {
  for (std::size_t i = 0; i < db_.fleet.size(); ++i) {
    if (db_.fleet[i].id == id) return ceilings_[i];
  }
  return 1.0;
}

void Controller::advance_database(TimeMs now) {
  while (next_event_ < db_.constraint_events.size() && db_.constraint_events[next_event_].time <= now) {
    const PlantEvent& ev = db_.constraint_events[next_event_++];
    if (ev.kind == PlantEvent::Kind::LoadFailure) {
      forced_off_.insert(ev.load_id);
    } else if (ev.kind == PlantEvent::Kind::ZoneLimitChange) {
      for (auto& z : zones_) {
        if (z.zone == ev.zone) z.limit_w = ev.limit_w;
      }
    }
  }
}

std::vector<ShedCommand> Controller::on_telemetry(const SystemSnapshot& snapshot) {
  diag_ = ControlDiagnostics{};
  advance_database(snapshot.time_ms);
  std::vector<ShedCommand> out =
      config_.algorithm == Algorithm::Baseline ? step_baseline(snapshot) : step_advanced(snapshot);
  last_time_ = snapshot.time_ms;
  return out;
}

std::vector<ShedCommand> Controller::step_baseline(const SystemSnapshot& snapshot) {
  const TimeMs tick = last_time_ ? snapshot.time_ms - *last_time_ : config_.period_ms;
  BaselineStep step = baseline_step(baseline_, snapshot, db_.fleet, tick);
  baseline_ = std::move(step.state);
  for (const auto& c : step.commands) {
    for (std::size_t i = 0; i < db_.fleet.size(); ++i) {
      if (db_.fleet[i].id == c.load_id) ceilings_[i] = c.status;
    }
  }
  finish_diagnostics(snapshot, std::nullopt);
  return step.commands;
}

std::vector<ShedCommand> Controller::step_advanced(const SystemSnapshot& snapshot) {
  const MissionWeightSet* weights = db_.missions.lookup(snapshot.mission_id, to_seconds(snapshot.time_ms));
  if (weights == nullptr) {
    log_warn("unknown mission id " + std::to_string(snapshot.mission_id) + "; holding last commands");
    finish_diagnostics(snapshot, std::nullopt);
    diag_.unknown_mission = true;
    return {};
  }

  ShedInstance instance = build_instance(snapshot, *weights, db_.fleet, zones_, forced_off_, config_.loss_fraction);
  ShedPlan plan = solve(instance, config_.solve_deadline_s);
  diag_.solved = true;
  diag_.optimal = plan.optimal;
  diag_.solve_time_s = plan.solve_time_s;
  diag_.nodes = plan.nodes;

  std::vector<ShedCommand> changes;
  for (std::size_t i = 0; i < db_.fleet.size(); ++i) {
    const ShedItem& item = instance.items[i];
    const double planned = plan.status_of(item.load_id);
    const double ceiling = planned >= item.demand_status - kCeilingTol && !item.forced_off ? 1.0 : planned;
    if (ceiling != ceilings_[i]) {
      ceilings_[i] = ceiling;
      changes.push_back({item.load_id, ceiling});
    }
  }
  finish_diagnostics(snapshot, instance);
  return changes;
}

void Controller::finish_diagnostics(const SystemSnapshot& snapshot, const std::optional<ShedInstance>& instance) {
  std::map<LoadId, double> demand;
  for (const auto& l : snapshot.loads) demand[l.load_id] = l.demand_status;

  ShedPlan effective;
  double planned = 0.0;
  for (std::size_t i = 0; i < db_.fleet.size(); ++i) {
    const LoadSpec& spec = db_.fleet[i];
    const double o = forced_off_.count(spec.id) ? 0.0 : std::min(ceilings_[i], demand[spec.id]);
    effective.statuses.push_back({spec.id, o});
    planned += spec.rated_power_w * o;
  }
  diag_.planned_power_w = planned;
  diag_.budget_w = capacity_budget(snapshot.total_capacity_w, config_.loss_fraction);
  if (instance) {
    std::sort(effective.statuses.begin(), effective.statuses.end(),
              [](const LoadState& a, const LoadState& b) { return a.load_id < b.load_id; });
    diag_.feasible = plan_violations(*instance, effective).empty();
  } else {
    diag_.feasible = planned <= diag_.budget_w + kFeasibilityTolerance;
  }
}

}  // namespace lshed
