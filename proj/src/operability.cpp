#include "lshed/operability.hpp"

#include <algorithm>
#include <map>
#include <string>

namespace lshed {

OperabilityTerms operability_terms(const MissionWeightSet& weights, std::span<const LoadState> states,
                                   std::span<const DemandPoint> demands) {
  std::map<LoadId, double> status;
  for (const auto& s : states) status[s.load_id] = s.status;

  OperabilityTerms t;
  for (const auto& d : demands) {
    auto w = weights.weights.find(d.load_id);
    if (w == weights.weights.end())
      throw std::invalid_argument("no mission weight for load " + std::to_string(d.load_id));
    auto it = status.find(d.load_id);
    const double o = it == status.end() ? 0.0 : it->second;
    t.numerator += w->second * o;
    t.denominator += w->second * d.demand_status;
  }
  return t;
}

OperabilitySample instantaneous_operability(const MissionWeightSet& weights,
                                            std::span<const LoadState> states,
                                            std::span<const DemandPoint> demands, double time) {
  return {time, operability_terms(weights, states, demands).value()};
}

double integral_operability(std::span<const TimedTerms> samples, const MissionWindow& window) {
  if (!window.valid()) throw std::invalid_argument("mission window is not a whole number of ticks");
  const std::size_t n = window.tick_count();

  // Samples outside the window are ignored; inside it the grid must be dense.
  std::vector<const TimedTerms*> grid(n, nullptr);
  for (const auto& s : samples) {
    if (s.time < window.t_start || s.time >= window.t_end) continue;
    const TimeMs offset = s.time - window.t_start;
    if (offset % window.tick != 0)
      throw IncompleteSeriesError("sample at " + std::to_string(s.time) + " ms is off the tick grid");
    auto& slot = grid[static_cast<std::size_t>(offset / window.tick)];
    if (slot != nullptr)
      throw IncompleteSeriesError("duplicate sample at " + std::to_string(s.time) + " ms");
    slot = &s;
  }

  double num = 0.0;
  double den = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (grid[k] == nullptr) {
      throw IncompleteSeriesError("missing sample at " +
                                  std::to_string(window.t_start + static_cast<TimeMs>(k) * window.tick) +
                                  " ms");
    }
    // Zero-demand ticks add nothing to either integral.
    num += grid[k]->terms.numerator;
    den += grid[k]->terms.denominator;
  }
  return den > 0.0 ? num / den : 1.0;
}

}  // namespace lshed
