#pragma once
//
// Domain types shared by the plant, the controllers and the reporting tools.
// All powers are in watts, all simulated times in integer milliseconds.
//

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lshed {

using LoadId = std::uint16_t;
using MissionId = std::uint16_t;
using TimeMs = std::int64_t;

inline constexpr double kMegawatt = 1.0e6;

inline double to_seconds(TimeMs t) { return static_cast<double>(t) / 1000.0; }
TimeMs to_millis(double seconds);

enum class LoadGroup { AclcVital, AclcNonVital, MwClass, Ipnc, Pmm };
enum class Category { Vital, SemiVital, NonVital };

inline constexpr LoadGroup kAllGroups[] = {LoadGroup::AclcVital, LoadGroup::AclcNonVital,
                                           LoadGroup::MwClass, LoadGroup::Ipnc, LoadGroup::Pmm};

// Baseline shedding stage of each group.
Category category_of(LoadGroup group);
std::string_view to_string(LoadGroup group);
std::string_view to_string(Category category);
std::optional<LoadGroup> parse_group(std::string_view name);

// Admissible operating statuses of a load.
struct Variability {
  enum class Kind { Binary, Stepped, Continuous };
  Kind kind = Kind::Binary;
  std::vector<double> levels;  // stepped only: ascending, in (0,1], last == 1

  static Variability binary() { return {}; }
  static Variability continuous() { return {Kind::Continuous, {}}; }
  static Variability stepped(std::vector<double> lv) { return {Kind::Stepped, std::move(lv)}; }

  bool admits(double status, double tol = 1e-12) const;
  // Largest admissible status not above `status`.
  double floor(double status, double tol = 1e-12) const;
  bool operator==(const Variability&) const = default;
};

struct LoadSpec {
  LoadId id = 0;
  std::string name;
  LoadGroup group = LoadGroup::AclcVital;
  double rated_power_w = 0.0;
  Variability variability;
  std::string zone;  // empty: no zone
  bool operator==(const LoadSpec&) const = default;
};

using Fleet = std::vector<LoadSpec>;

struct LoadState {
  LoadId load_id = 0;
  double status = 0.0;
};

struct DemandPoint {
  LoadId load_id = 0;
  double demand_status = 0.0;
};

struct MissionWeightSet {
  MissionId mission_id = 0;
  std::map<LoadId, double> weights;
  double valid_from = 0.0;  // seconds
  bool operator==(const MissionWeightSet&) const = default;
};

// Mission weight sets keyed by mission id, each with a valid_from schedule.
class MissionDatabase {
 public:
  MissionDatabase() = default;
  explicit MissionDatabase(std::vector<MissionWeightSet> sets);

  // Weight set in force for `mission` at time `t`; nullptr when unknown.
  const MissionWeightSet* lookup(MissionId mission, double t) const;
  const std::vector<MissionWeightSet>& sets() const { return sets_; }

 private:
  std::vector<MissionWeightSet> sets_;  // sorted by (mission_id, valid_from)
};

struct GenerationModule {
  int id = 0;
  std::string name;
  double rated_power_w = 0.0;
  bool online = true;
  bool operator==(const GenerationModule&) const = default;
};

struct ZoneLimit {
  std::string zone;
  double limit_w = 0.0;
  std::vector<LoadId> members;
  bool operator==(const ZoneLimit&) const = default;
};

struct LoadTelemetry {
  LoadId load_id = 0;
  double demand_status = 0.0;
  double measured_power_w = 0.0;
  bool operator==(const LoadTelemetry&) const = default;
};

struct SystemSnapshot {
  TimeMs time_ms = 0;
  std::vector<LoadTelemetry> loads;
  double total_capacity_w = 0.0;
  double total_loss_w = 0.0;
  double loading_pu = 0.0;
  MissionId mission_id = 0;

  double total_measured_w() const;
  bool operator==(const SystemSnapshot&) const = default;
};

// A status ceiling sent from a controller to the plant for one load.
struct ShedCommand {
  LoadId load_id = 0;
  double status = 1.0;
  bool operator==(const ShedCommand&) const = default;
};

struct ValidationIssue {
  std::string subject;  // "load 7", "zone fwd", "weights"
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool ok() const { return issues.empty(); }
  std::string to_string() const;
};

ValidationReport validate_fleet(const Fleet& fleet, const std::vector<ZoneLimit>& zones,
                                const MissionWeightSet& weights);

// P* = o* x P. Throws std::invalid_argument when the ids differ.
double required_power(const LoadSpec& spec, const DemandPoint& demand);

double online_capacity(const std::vector<GenerationModule>& modules);

const LoadSpec* find_load(const Fleet& fleet, LoadId id);

// 42-load notional fleet, four generation modules and the per-group weights.
Fleet default_fleet();
std::vector<GenerationModule> default_generation();
double default_group_weight(LoadGroup group);
MissionWeightSet default_weights(const Fleet& fleet, MissionId mission = 1);

}  // namespace lshed
