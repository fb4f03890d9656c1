#include "lshed/plant.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lshed/log.hpp"

namespace lshed {

namespace {

const LoadProfile* profile_for(const PlantModel& model, LoadId id) {
  for (const auto& p : model.profiles) {
    if (p.load_id == id) return &p;
  }
  return nullptr;
}

void apply_event(PlantState& state, const PlantEvent& ev) {
  switch (ev.kind) {
    case PlantEvent::Kind::GeneratorTrip:
    case PlantEvent::Kind::GeneratorRestore: {
      const bool online = ev.kind == PlantEvent::Kind::GeneratorRestore;
      bool found = false;
      for (auto& g : state.generation) {
        if (g.id == ev.module_id) {
          g.online = online;
          found = true;
        }
      }
      if (!found) log_warn("event references unknown generation module " + std::to_string(ev.module_id));
      break;
    }
    case PlantEvent::Kind::LoadFailure:
      state.forced_off.insert(ev.load_id);
      break;
    case PlantEvent::Kind::ZoneLimitChange: {
      auto it = std::find_if(state.zones.begin(), state.zones.end(),
                             [&](const ZoneLimit& z) { return z.zone == ev.zone; });
      if (it == state.zones.end()) {
        log_warn("event references unknown zone " + ev.zone);
      } else {
        it->limit_w = ev.limit_w;
      }
      break;
    }
  }
}

void apply_due_events(const PlantModel& model, PlantState& state) {
  while (state.next_event < model.events.size() && model.events[state.next_event].time <= state.clock_ms) {
    apply_event(state, model.events[state.next_event]);
    ++state.next_event;
  }
}

void refresh_demand_and_targets(const PlantModel& model, PlantState& state) {
  for (std::size_t i = 0; i < state.loads.size(); ++i) {
    const LoadSpec& spec = model.fleet[i];
    PlantLoad& load = state.loads[i];
    const LoadProfile* prof = profile_for(model, spec.id);
    load.demand = prof == nullptr ? 0.0 : spec.variability.floor(std::clamp(sample_profile(*prof, state.clock_ms), 0.0, 1.0));
    const double served = state.forced_off.count(spec.id) ? 0.0 : std::min(load.commanded, load.demand);
    load.target_w = served * spec.rated_power_w;
  }
}

}  // namespace

double sample_profile(const LoadProfile& profile, TimeMs t) {
  double value = 0.0;
  for (const auto& [time, status] : profile.breakpoints) {
    if (time > t) break;
    value = status;
  }
  return value;
}

std::string_view to_string(PlantEvent::Kind kind) {
  switch (kind) {
    case PlantEvent::Kind::GeneratorTrip:
      return "generator_trip";
    case PlantEvent::Kind::GeneratorRestore:
      return "generator_restore";
    case PlantEvent::Kind::LoadFailure:
      return "load_failure";
    case PlantEvent::Kind::ZoneLimitChange:
      return "zone_limit_change";
  }
  return "?";
}

std::vector<PlantEvent> sorted_events(std::vector<PlantEvent> events) {
  std::stable_sort(events.begin(), events.end(),
                   [](const PlantEvent& a, const PlantEvent& b) { return a.time < b.time; });
  return events;
}

PlantState plant_init(const PlantModel& model, TimeMs t0) {
  if (!std::is_sorted(model.events.begin(), model.events.end(),
                      [](const PlantEvent& a, const PlantEvent& b) { return a.time < b.time; }))
    throw std::invalid_argument("plant events must be sorted by time");

  PlantState state;
  state.clock_ms = t0;
  state.generation = model.generation;
  state.zones = model.zones;
  for (const auto& spec : model.fleet) state.loads.push_back({spec.id, 1.0, 0.0, 0.0, 0.0});
  apply_due_events(model, state);
  refresh_demand_and_targets(model, state);
  for (auto& l : state.loads) l.measured_w = l.target_w;
  return state;
}

PlantState apply_commands(const PlantModel& model, PlantState state, std::span<const ShedCommand> commands) {
  for (const auto& cmd : commands) {
    auto it = std::find_if(state.loads.begin(), state.loads.end(),
                           [&](const PlantLoad& l) { return l.load_id == cmd.load_id; });
    if (it == state.loads.end()) {
      ++state.ignored_commands;
      log_warn("ignoring command for unknown load " + std::to_string(cmd.load_id));
      continue;
    }
    const LoadSpec& spec = model.fleet[static_cast<std::size_t>(it - state.loads.begin())];
    it->commanded = spec.variability.floor(std::clamp(cmd.status, 0.0, 1.0));
    const double served = state.forced_off.count(spec.id) ? 0.0 : std::min(it->commanded, it->demand);
    it->target_w = served * spec.rated_power_w;
  }
  return state;
}

SystemSnapshot make_snapshot(const PlantModel& model, const PlantState& state) {
  SystemSnapshot snap;
  snap.time_ms = state.clock_ms;
  snap.mission_id = model.mission_id;
  snap.loads.reserve(state.loads.size());
  double total = 0.0;
  for (const auto& l : state.loads) {
    snap.loads.push_back({l.load_id, l.demand, l.measured_w});
    total += l.measured_w;
  }
  snap.total_capacity_w = online_capacity(state.generation);
  snap.total_loss_w = model.loss_fraction * total;
  const double drawn = total + snap.total_loss_w;
  if (snap.total_capacity_w > 0.0) {
    snap.loading_pu = drawn / snap.total_capacity_w;
  } else {
    snap.loading_pu = drawn > 0.0 ? INFINITY : 0.0;
  }
  return snap;
}

std::pair<PlantState, SystemSnapshot> plant_tick(const PlantModel& model, PlantState state, TimeMs dt_ms) {
  if (dt_ms <= 0) throw std::invalid_argument("plant_tick requires a positive step");
  state.clock_ms += dt_ms;
  apply_due_events(model, state);
  refresh_demand_and_targets(model, state);

  const double dt = to_seconds(dt_ms);
  const double alpha = model.tau_s > 0.0 ? 1.0 - std::exp(-dt / model.tau_s) : 1.0;
  for (auto& l : state.loads) {
    l.measured_w = alpha >= 1.0 ? l.target_w : l.measured_w + (l.target_w - l.measured_w) * alpha;
  }
  SystemSnapshot snap = make_snapshot(model, state);
  return {std::move(state), std::move(snap)};
}

}  // namespace lshed
