#pragma once
// Shared generators and checkers for the property and acceptance tests.

#include <algorithm>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "lshed/baseline.hpp"
#include "lshed/optimizer.hpp"

namespace lshed::fixtures {

struct InstanceShape {
  int max_discrete = 20;
  int max_continuous = 2;
  int max_zones = 2;
  int max_forced = 3;
  bool stepped = true;
};

inline ShedInstance random_instance(std::mt19937_64& rng, const InstanceShape& shape = {}) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };

  ShedInstance inst;
  const int n_disc = pick(0, shape.max_discrete);
  const int n_cont = pick(0, shape.max_continuous);
  const int n = n_disc + n_cont;
  std::vector<LoadId> ids;
  for (int i = 0; i < n; ++i) ids.push_back(static_cast<LoadId>(i + 1));
  std::shuffle(ids.begin(), ids.end(), rng);

  for (int i = 0; i < n; ++i) {
    ShedItem it;
    it.load_id = ids[static_cast<std::size_t>(i)];
    it.weight = 0.5 + 9.5 * u(rng);
    it.rated_power_w = 1e6 + 39e6 * u(rng);
    if (i >= n_disc) {
      it.variability = Variability::continuous();
      it.demand_status = u(rng) < 0.2 ? 1.0 : u(rng);
    } else if (shape.stepped && u(rng) < 0.2) {
      it.variability = Variability::stepped({0.25, 0.5, 0.75, 1.0});
      const double lv[] = {0.0, 0.25, 0.5, 0.75, 1.0, 1.0};
      it.demand_status = lv[pick(0, 5)];
    } else {
      it.variability = Variability::binary();
      it.demand_status = u(rng) < 0.9 ? 1.0 : 0.0;
    }
    it.required_power_w = it.demand_status * it.rated_power_w;
    inst.items.push_back(std::move(it));
  }
  std::sort(inst.items.begin(), inst.items.end(),
            [](const ShedItem& a, const ShedItem& b) { return a.load_id < b.load_id; });

  double total = 0.0;
  for (const auto& it : inst.items) total += it.required_power_w;
  inst.capacity_budget_w = total * u(rng);

  const int n_zones = std::min(pick(0, shape.max_zones), n);
  for (int z = 0; z < n_zones; ++z) inst.zones.push_back({"z" + std::to_string(z), 0.0, {}});
  if (n_zones > 0) {
    for (auto& it : inst.items) {
      const int z = pick(-1, n_zones - 1);
      if (z < 0) continue;
      it.zone = inst.zones[static_cast<std::size_t>(z)].zone;
      inst.zones[static_cast<std::size_t>(z)].members.push_back(it.load_id);
    }
    for (auto& zl : inst.zones) {
      double zt = 0.0;
      for (const auto& it : inst.items) {
        if (it.zone == zl.zone) zt += it.required_power_w;
      }
      zl.limit_w = zt * u(rng);
    }
    inst.zones.erase(std::remove_if(inst.zones.begin(), inst.zones.end(),
                                    [](const ZoneLimit& z) { return z.members.empty(); }),
                     inst.zones.end());
  }

  const int n_forced = std::min(pick(0, shape.max_forced), n);
  for (int f = 0; f < n_forced; ++f) inst.items[static_cast<std::size_t>(pick(0, n - 1))].forced_off = true;
  return inst;
}

// Recomputes every constraint from scratch; returns a description of the first
// violation beyond `tol_w`, if any.
inline std::optional<std::string> independent_violation(const ShedInstance& inst, const ShedPlan& plan,
                                                        double tol_w = 1e-6) {
  if (plan.statuses.size() != inst.items.size()) return "plan size differs from instance";
  std::map<std::string, double> zone_power;
  double served = 0.0;
  for (std::size_t i = 0; i < inst.items.size(); ++i) {
    const ShedItem& it = inst.items[i];
    const LoadState& st = plan.statuses[i];
    if (st.load_id != it.load_id) return "plan order differs from instance";
    const double o = st.status;
    if (o < 0.0 || o > it.demand_status + 1e-12) return "status outside [0, o*] for load " + std::to_string(it.load_id);
    if (!it.variability.admits(o)) return "status outside domain for load " + std::to_string(it.load_id);
    if (it.forced_off && o != 0.0) return "forced-off load " + std::to_string(it.load_id) + " served";
    served += it.rated_power_w * o;
    if (!it.zone.empty()) zone_power[it.zone] += it.rated_power_w * o;
  }
  if (served > inst.capacity_budget_w + tol_w) return "supply constraint exceeded";
  for (const auto& z : inst.zones) {
    if (zone_power[z.zone] > z.limit_w + tol_w) return "zone " + z.zone + " exceeded";
  }
  return std::nullopt;
}

// Steps the baseline over a loading trace and checks the timer rules against an
// independently maintained overload clock. Returns the first failure.
inline std::optional<std::string> check_baseline_trace(const Fleet& fleet, const std::vector<double>& loading,
                                                       TimeMs tick_ms, std::size_t* commands_out = nullptr) {
  BaselineState state = baseline_reset();
  std::map<Category, std::vector<LoadId>> expected_order;
  for (const auto& l : fleet) expected_order[category_of(l.group)].push_back(l.id);
  std::map<Category, std::size_t> next;
  std::map<LoadId, Category> cat;
  for (const auto& l : fleet) cat[l.id] = category_of(l.group);

  std::optional<TimeMs> onset;
  std::size_t commands = 0;
  for (std::size_t k = 0; k < loading.size(); ++k) {
    const TimeMs now = static_cast<TimeMs>(k) * tick_ms;
    if (loading[k] > 1.0) {
      if (!onset) onset = now;
    } else {
      onset.reset();
    }
    const TimeMs sustained = onset ? now - *onset : -1;

    SystemSnapshot snap;
    snap.time_ms = now;
    snap.loading_pu = loading[k];
    BaselineStep step = baseline_step(state, snap, fleet, tick_ms);
    state = step.state;
    for (const auto& c : step.commands) {
      ++commands;
      const std::string where = " at t=" + std::to_string(now) + "ms";
      if (c.status != 0.0) return "non-zero shed command" + where;
      if (sustained <= 250) return "shed with overload <= 250 ms" + where;
      const Category ct = cat.at(c.load_id);
      if (ct == Category::SemiVital && sustained <= 2500) return "semi-vital shed with overload <= 2.5 s" + where;
      if (ct == Category::Vital && sustained <= 5000) return "vital shed with overload <= 5.0 s" + where;
      auto& order = expected_order[ct];
      if (next[ct] >= order.size() || order[next[ct]] != c.load_id) return "out-of-order shed" + where;
      ++next[ct];
    }
  }
  if (commands_out) *commands_out = commands;
  return std::nullopt;
}

inline std::vector<double> random_loading_trace(std::mt19937_64& rng, std::size_t ticks, double overload_bias) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> out;
  out.reserve(ticks);
  bool over = false;
  while (out.size() < ticks) {
    over = u(rng) < overload_bias;
    const auto run = static_cast<std::size_t>(1 + u(rng) * 80);
    for (std::size_t i = 0; i < run && out.size() < ticks; ++i) out.push_back(over ? 1.0 + 0.5 * u(rng) + 1e-9 : 0.5 + 0.5 * u(rng));
  }
  return out;
}

}  // namespace lshed::fixtures
