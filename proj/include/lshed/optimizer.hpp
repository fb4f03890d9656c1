#pragma once
//
// Mission-weighted load-shedding optimization.
//
//   maximize    sum_i w_i * o_i
//   subject to  sum_i P_i * o_i            <= budget          (supply-demand)
//               sum_{i in zone} P_i * o_i  <= zone limit      (line flow)
//               o_i = 0 for forced-off loads                  (physical)
//               0 <= o_i <= o*_i, o_i in the load's variability domain
//
// P_i is the rated power, so P_i * o_i equals the required power P*_i scaled
// by the served fraction o_i / o*_i. `solve` is an exact branch-and-bound;
// `brute_force_solve` is an exhaustive reference used to verify it.
//

#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "lshed/model.hpp"

namespace lshed {

// Slack allowed on every power constraint of a returned plan, in watts.
inline constexpr double kFeasibilityTolerance = 1e-6;

struct ShedItem {
  LoadId load_id = 0;
  double weight = 0.0;
  double demand_status = 0.0;  // o*, also the status upper bound
  double rated_power_w = 0.0;
  double required_power_w = 0.0;  // o* x rated
  Variability variability;
  bool forced_off = false;
  std::string zone;
};

struct ShedInstance {
  std::vector<ShedItem> items;
  double capacity_budget_w = 0.0;
  std::vector<ZoneLimit> zones;
};

struct ShedPlan {
  std::vector<LoadState> statuses;  // ascending load id
  double objective = 0.0;
  double served_power_w = 0.0;
  double solve_time_s = 0.0;
  bool optimal = true;
  std::uint64_t nodes = 0;

  double status_of(LoadId id) const;
};

class ConfigurationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InstanceTooLargeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Budget is the largest served power P with P + loss_fraction * P <= capacity.
double capacity_budget(double online_capacity_w, double loss_fraction);

// Throws ConfigurationError when a fleet load has no weight or no telemetry.
ShedInstance build_instance(const SystemSnapshot& snapshot, const MissionWeightSet& weights,
                            const Fleet& fleet, const std::vector<ZoneLimit>& zones,
                            const std::set<LoadId>& forced_off, double loss_fraction = 0.02);

ShedPlan solve(const ShedInstance& instance, double deadline_s = 0.05);

// Exhaustive enumeration of discrete choices with an exact vertex-enumeration
// LP for the continuous loads. Limits: 2^24 discrete combinations, 4
// continuous loads; beyond them throws InstanceTooLargeError.
ShedPlan brute_force_solve(const ShedInstance& instance);

// Recomputes objective and served power of `statuses` in ascending-id order.
void evaluate_plan(const ShedInstance& instance, ShedPlan& plan);

// Total order used to pick among optimal plans: higher objective, then more
// served power, then lexicographically higher statuses by ascending load id.
bool plan_precedes(const ShedPlan& a, const ShedPlan& b);

// Human-readable list of violated constraints (empty when feasible).
std::vector<std::string> plan_violations(const ShedInstance& instance, const ShedPlan& plan,
                                         double tolerance_w = kFeasibilityTolerance);

}  // namespace lshed
