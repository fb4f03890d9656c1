#pragma once
//
// Mission-weighted operability: the instantaneous ratio of weighted served
// status to weighted demanded status, and its mission-period integral.
//

#include <span>
#include <stdexcept>
#include <vector>

#include "lshed/model.hpp"

namespace lshed {

struct OperabilitySample {
  double time = 0.0;
  double value = 1.0;
};

// Numerator and denominator of the instantaneous ratio at one tick.
struct OperabilityTerms {
  double numerator = 0.0;    // sum w * o
  double denominator = 0.0;  // sum w * o*

  // Zero demand is reported as full operability; see `vacuous`.
  double value() const { return denominator > 0.0 ? numerator / denominator : 1.0; }
  bool vacuous() const { return !(denominator > 0.0); }
  bool operator==(const OperabilityTerms&) const = default;
};

struct MissionWindow {
  TimeMs t_start = 0;
  TimeMs t_end = 600'000;
  TimeMs tick = 100;

  std::size_t tick_count() const { return static_cast<std::size_t>((t_end - t_start) / tick); }
  bool valid() const { return t_end > t_start && tick > 0 && (t_end - t_start) % tick == 0; }
  bool operator==(const MissionWindow&) const = default;
};

class IncompleteSeriesError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Loads missing from `states` count as status 0; loads missing from `demands`
// count as demand 0. Throws std::invalid_argument on a missing weight.
OperabilityTerms operability_terms(const MissionWeightSet& weights, std::span<const LoadState> states,
                                   std::span<const DemandPoint> demands);

OperabilitySample instantaneous_operability(const MissionWeightSet& weights,
                                            std::span<const LoadState> states,
                                            std::span<const DemandPoint> demands, double time = 0.0);

struct TimedTerms {
  TimeMs time = 0;
  OperabilityTerms terms;
};

// Ratio of the left-rectangle integrals of numerator and denominator over the
// window. Every tick of the window must be present exactly once.
double integral_operability(std::span<const TimedTerms> samples, const MissionWindow& window);

}  // namespace lshed
