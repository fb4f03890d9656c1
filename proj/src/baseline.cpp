#include "lshed/baseline.hpp"

namespace lshed {

BaselineState baseline_reset() { return BaselineState{}; }

BaselineStep baseline_step(const BaselineState& state, const SystemSnapshot& snapshot, const Fleet& fleet,
                           TimeMs tick_ms, const BaselineThresholds& thresholds) {
  BaselineStep out{state, {}};
  BaselineState& s = out.state;

  if (!(snapshot.loading_pu > thresholds.overload_pu)) {
    s.overloaded = false;
    s.overload_timer_ms = 0;
    return out;
  }

  // The first overloaded sample marks the onset; the timer measures time since.
  if (s.overloaded) {
    s.overload_timer_ms += tick_ms;
  } else {
    s.overloaded = true;
    s.overload_timer_ms = 0;
  }

  auto shed_next = [&](Category category) {
    auto& cursor = s.cursor[static_cast<std::size_t>(category)];
    std::size_t seen = 0;
    for (const auto& load : fleet) {
      if (category_of(load.group) != category) continue;
      if (seen++ < cursor) continue;
      ++cursor;
      if (s.shed_set.insert(load.id).second) {
        out.commands.push_back({load.id, 0.0});
        return;
      }
    }
  };

  if (s.overload_timer_ms > thresholds.non_vital_ms) shed_next(Category::NonVital);
  if (s.overload_timer_ms > thresholds.semi_vital_ms) shed_next(Category::SemiVital);
  if (s.overload_timer_ms > thresholds.vital_ms) shed_next(Category::Vital);
  return out;
}

}  // namespace lshed
