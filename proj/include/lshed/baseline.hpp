#pragma once
//
// Staged rule-based shedder. A single continuous-overload timer drives three
// stages: non-vital loads after 250 ms, semi-vital after 2.5 s and vital after
// 5.0 s of loading above 1.0 pu. Each active stage sheds one load per call, in
// fleet declaration order, and never restores.
//

#include <array>
#include <set>
#include <vector>

#include "lshed/model.hpp"

namespace lshed {

struct BaselineThresholds {
  TimeMs non_vital_ms = 250;
  TimeMs semi_vital_ms = 2'500;
  TimeMs vital_ms = 5'000;
  double overload_pu = 1.0;
};

struct BaselineState {
  bool overloaded = false;  // previous step saw loading above the threshold
  TimeMs overload_timer_ms = 0;
  std::set<LoadId> shed_set;
  // Next position in each category's declaration-order list, indexed by Category.
  std::array<std::size_t, 3> cursor{0, 0, 0};
};

BaselineState baseline_reset();

struct BaselineStep {
  BaselineState state;
  std::vector<ShedCommand> commands;
};

// `tick_ms` is the time elapsed since the previous step's snapshot.
BaselineStep baseline_step(const BaselineState& state, const SystemSnapshot& snapshot, const Fleet& fleet,
                           TimeMs tick_ms, const BaselineThresholds& thresholds = {});

}  // namespace lshed
