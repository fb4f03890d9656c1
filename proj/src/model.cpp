#include "lshed/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace lshed {

TimeMs to_millis(double seconds) { return static_cast<TimeMs>(std::llround(seconds * 1000.0)); }

Category category_of(LoadGroup group) {
  switch (group) {
    case LoadGroup::AclcNonVital:
      return Category::NonVital;
    case LoadGroup::Ipnc:
      return Category::SemiVital;
    case LoadGroup::AclcVital:
    case LoadGroup::MwClass:
    case LoadGroup::Pmm:
      return Category::Vital;
  }
  return Category::Vital;
}

std::string_view to_string(LoadGroup group) {
  switch (group) {
    case LoadGroup::AclcVital:
      return "ACLC_Vital";
    case LoadGroup::AclcNonVital:
      return "ACLC_NonVital";
    case LoadGroup::MwClass:
      return "MWClass";
    case LoadGroup::Ipnc:
      return "IPNC";
    case LoadGroup::Pmm:
      return "PMM";
  }
  return "?";
}

std::string_view to_string(Category category) {
  switch (category) {
    case Category::Vital:
      return "vital";
    case Category::SemiVital:
      return "semi_vital";
    case Category::NonVital:
      return "non_vital";
  }
  return "?";
}

std::optional<LoadGroup> parse_group(std::string_view name) {
  for (LoadGroup g : kAllGroups) {
    if (to_string(g) == name) return g;
  }
  return std::nullopt;
}

bool Variability::admits(double status, double tol) const {
  if (!(status >= -tol && status <= 1.0 + tol)) return false;
  switch (kind) {
    case Kind::Continuous:
      return true;
    case Kind::Binary:
      return std::abs(status) <= tol || std::abs(status - 1.0) <= tol;
    case Kind::Stepped:
      if (std::abs(status) <= tol) return true;
      return std::any_of(levels.begin(), levels.end(),
                         [&](double l) { return std::abs(status - l) <= tol; });
  }
  return false;
}

double Variability::floor(double status, double tol) const {
  if (status <= 0.0) return 0.0;
  switch (kind) {
    case Kind::Continuous:
      return std::min(status, 1.0);
    case Kind::Binary:
      return status >= 1.0 - tol ? 1.0 : 0.0;
    case Kind::Stepped: {
      double best = 0.0;
      for (double l : levels) {
        if (l <= status + tol) best = l;
      }
      return best;
    }
  }
  return 0.0;
}

double SystemSnapshot::total_measured_w() const {
  double sum = 0.0;
  for (const auto& l : loads) sum += l.measured_power_w;
  return sum;
}

MissionDatabase::MissionDatabase(std::vector<MissionWeightSet> sets) : sets_(std::move(sets)) {
  std::stable_sort(sets_.begin(), sets_.end(), [](const auto& a, const auto& b) {
    return a.mission_id != b.mission_id ? a.mission_id < b.mission_id : a.valid_from < b.valid_from;
  });
}

const MissionWeightSet* MissionDatabase::lookup(MissionId mission, double t) const {
  const MissionWeightSet* found = nullptr;
  for (const auto& s : sets_) {
    if (s.mission_id != mission) continue;
    if (s.valid_from <= t || found == nullptr) found = &s;
    if (s.valid_from > t) break;
  }
  return found;
}

std::string ValidationReport::to_string() const {
  std::ostringstream os;
  for (const auto& i : issues) os << i.subject << ": " << i.message << '\n';
  return os.str();
}

ValidationReport validate_fleet(const Fleet& fleet, const std::vector<ZoneLimit>& zones,
                                const MissionWeightSet& weights) {
  ValidationReport report;
  auto add = [&](std::string subject, std::string message) {
    report.issues.push_back({std::move(subject), std::move(message)});
  };
  auto load_subject = [](LoadId id) { return "load " + std::to_string(id); };

  std::set<LoadId> seen;
  for (const auto& load : fleet) {
    if (!seen.insert(load.id).second) add(load_subject(load.id), "duplicate load id");
    if (!(load.rated_power_w > 0.0)) add(load_subject(load.id), "rated power must be positive");
    if (load.variability.kind == Variability::Kind::Stepped) {
      const auto& lv = load.variability.levels;
      if (lv.empty()) add(load_subject(load.id), "stepped load has no levels");
      for (std::size_t k = 0; k < lv.size(); ++k) {
        if (!(lv[k] > 0.0 && lv[k] <= 1.0))
          add(load_subject(load.id), "stepped level outside (0,1]");
        if (k > 0 && !(lv[k] > lv[k - 1]))
          add(load_subject(load.id), "stepped levels not strictly ascending");
      }
      if (!lv.empty() && lv.back() != 1.0)
        add(load_subject(load.id), "last stepped level must be 1");
    }
  }

  std::set<std::string> zone_names;
  for (const auto& z : zones) {
    const std::string subject = "zone " + z.zone;
    if (!zone_names.insert(z.zone).second) add(subject, "duplicate zone");
    if (!(z.limit_w >= 0.0)) add(subject, "limit must be nonnegative");
    if (z.members.empty()) add(subject, "zone has no member loads");
    for (LoadId m : z.members) {
      const LoadSpec* spec = find_load(fleet, m);
      if (spec == nullptr) {
        add(subject, "member load " + std::to_string(m) + " not in fleet");
      } else if (spec->zone != z.zone) {
        add(subject, "member load " + std::to_string(m) + " declares zone '" + spec->zone + "'");
      }
    }
  }

  bool any_positive = false;
  for (const auto& load : fleet) {
    auto it = weights.weights.find(load.id);
    if (it == weights.weights.end()) {
      add(load_subject(load.id), "missing mission weight");
      continue;
    }
    if (!(it->second >= 0.0)) add(load_subject(load.id), "negative mission weight");
    if (it->second > 0.0) any_positive = true;
  }
  for (const auto& [id, w] : weights.weights) {
    if (find_load(fleet, id) == nullptr) add("weights", "weight for unknown load " + std::to_string(id));
  }
  if (!fleet.empty() && !any_positive) add("weights", "no positive mission weight");
  return report;
}

double required_power(const LoadSpec& spec, const DemandPoint& demand) {
  if (spec.id != demand.load_id) {
    throw std::invalid_argument("required_power: demand for load " + std::to_string(demand.load_id) +
                                " applied to load " + std::to_string(spec.id));
  }
  return demand.demand_status * spec.rated_power_w;
}

double online_capacity(const std::vector<GenerationModule>& modules) {
  double sum = 0.0;
  for (const auto& m : modules) {
    if (m.online) sum += m.rated_power_w;
  }
  return sum;
}

const LoadSpec* find_load(const Fleet& fleet, LoadId id) {
  for (const auto& l : fleet) {
    if (l.id == id) return &l;
  }
  return nullptr;
}

Fleet default_fleet() {
  Fleet fleet;
  LoadId next = 1;
  auto add = [&](LoadGroup g, int count, double rated_mw, Variability v, const char* prefix) {
    for (int k = 1; k <= count; ++k) {
      LoadSpec s;
      s.id = next++;
      s.name = std::string(prefix) + (k < 10 ? "0" : "") + std::to_string(k);
      s.group = g;
      s.rated_power_w = rated_mw * kMegawatt;
      s.variability = v;
      s.zone = "Z" + std::to_string((k - 1) % 4 + 1);
      fleet.push_back(std::move(s));
    }
  };
  add(LoadGroup::AclcVital, 16, 1.25, Variability::binary(), "ACLC-V");
  add(LoadGroup::AclcNonVital, 12, 0.8, Variability::binary(), "ACLC-NV");
  add(LoadGroup::MwClass, 4, 4.0, Variability::binary(), "MW");
  add(LoadGroup::Ipnc, 6, 0.5, Variability::binary(), "IPNC");
  add(LoadGroup::Pmm, 4, 20.0, Variability::continuous(), "PMM");
  return fleet;
}

std::vector<GenerationModule> default_generation() {
  return {
      {1, "MPGM1", 36.0 * kMegawatt, true},
      {2, "MPGM2", 36.0 * kMegawatt, true},
      {3, "APGM1", 12.0 * kMegawatt, true},
      {4, "APGM2", 12.0 * kMegawatt, true},
  };
}

double default_group_weight(LoadGroup group) {
  switch (group) {
    case LoadGroup::AclcVital:
      return 5.0;
    case LoadGroup::AclcNonVital:
      return 2.5;
    case LoadGroup::MwClass:
      return 8.0;
    case LoadGroup::Ipnc:
      return 5.0;
    case LoadGroup::Pmm:
      return 5.0;
  }
  return 0.0;
}

MissionWeightSet default_weights(const Fleet& fleet, MissionId mission) {
  MissionWeightSet set;
  set.mission_id = mission;
  for (const auto& l : fleet) set.weights[l.id] = default_group_weight(l.group);
  return set;
}

}  // namespace lshed
