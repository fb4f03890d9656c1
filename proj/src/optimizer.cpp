#include "lshed/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>

namespace lshed {

namespace {

// Discrete choices may overrun a budget by this much before being rejected.
constexpr double kFitTol = 1e-7;
constexpr double kStatusTol = 1e-9;
constexpr double kPowerTieTol = 1e-6;

double objective_eps(double a, double b) { return 1e-9 * std::max({1.0, std::abs(a), std::abs(b)}); }

// Instance normalized to ascending load id with per-item bounds and options.
struct Prepared {
  std::vector<LoadId> ids;
  std::vector<double> weight;
  std::vector<double> power;  // rated
  std::vector<double> ub;     // status upper bound (0 when forced off)
  std::vector<bool> continuous;
  std::vector<std::vector<double>> options;  // discrete: admissible statuses, descending
  std::vector<int> zone;                     // index into zone_limit, -1 for none
  std::vector<double> zone_limit;
  double budget = 0.0;

  std::size_t size() const { return ids.size(); }
  double density(std::size_t i) const { return weight[i] / power[i]; }
};

Prepared prepare(const ShedInstance& instance) {
  if (!(instance.capacity_budget_w >= 0.0))
    throw std::invalid_argument("capacity budget must be nonnegative");

  std::vector<const ShedItem*> items;
  for (const auto& it : instance.items) items.push_back(&it);
  std::sort(items.begin(), items.end(), [](auto* a, auto* b) { return a->load_id < b->load_id; });

  std::map<LoadId, int> zone_of;
  Prepared p;
  p.budget = instance.capacity_budget_w;
  for (const auto& z : instance.zones) {
    if (!(z.limit_w >= 0.0)) throw std::invalid_argument("zone limit must be nonnegative");
    const int index = static_cast<int>(p.zone_limit.size());
    p.zone_limit.push_back(z.limit_w);
    for (LoadId m : z.members) {
      if (!zone_of.emplace(m, index).second)
        throw std::invalid_argument("load " + std::to_string(m) + " belongs to more than one zone");
    }
  }

  for (std::size_t k = 0; k < items.size(); ++k) {
    const ShedItem& it = *items[k];
    if (k > 0 && items[k - 1]->load_id == it.load_id)
      throw std::invalid_argument("duplicate load " + std::to_string(it.load_id) + " in instance");
    if (!(it.rated_power_w > 0.0) || !(it.weight >= 0.0))
      throw std::invalid_argument("load " + std::to_string(it.load_id) + " has invalid power or weight");

    const double ub = it.forced_off ? 0.0 : it.variability.floor(std::clamp(it.demand_status, 0.0, 1.0));
    p.ids.push_back(it.load_id);
    p.weight.push_back(it.weight);
    p.power.push_back(it.rated_power_w);
    p.ub.push_back(ub);
    auto z = zone_of.find(it.load_id);
    p.zone.push_back(z == zone_of.end() ? -1 : z->second);

    std::vector<double> opts;
    const bool cont = it.variability.kind == Variability::Kind::Continuous && ub > 0.0;
    if (!cont) {
      if (it.variability.kind == Variability::Kind::Stepped) {
        for (auto l = it.variability.levels.rbegin(); l != it.variability.levels.rend(); ++l) {
          if (*l <= ub) opts.push_back(*l);
        }
      } else if (it.variability.kind == Variability::Kind::Binary && ub >= 1.0) {
        opts.push_back(1.0);
      }
      opts.push_back(0.0);
    }
    p.continuous.push_back(cont);
    p.options.push_back(std::move(opts));
  }
  return p;
}

void evaluate(const Prepared& p, ShedPlan& plan) {
  double obj = 0.0;
  double served = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    obj += p.weight[i] * plan.statuses[i].status;
    served += p.power[i] * plan.statuses[i].status;
  }
  plan.objective = obj;
  plan.served_power_w = served;
}

ShedPlan make_plan(const Prepared& p, const std::vector<double>& status) {
  ShedPlan plan;
  plan.statuses.reserve(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) plan.statuses.push_back({p.ids[i], status[i]});
  evaluate(p, plan);
  return plan;
}

// Returns +1 if a is lexicographically higher, -1 if lower, 0 if equal.
int lex_compare(const std::vector<LoadState>& a, const std::vector<LoadState>& b) {
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t k = 0; k < n; ++k) {
    if (a[k].status > b[k].status + kStatusTol) return 1;
    if (a[k].status < b[k].status - kStatusTol) return -1;
  }
  return 0;
}

std::vector<std::size_t> density_order(const Prepared& p, const std::vector<std::size_t>& subset) {
  std::vector<std::size_t> order = subset;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return p.density(a) > p.density(b); });
  return order;
}

class BranchAndBound {
 public:
  BranchAndBound(const Prepared& p, double deadline_s)
      : p_(p),
        deadline_(std::chrono::steady_clock::now() +
                  std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                      std::chrono::duration<double>(deadline_s))),
        status_(p.size(), 0.0),
        zone_used_(p.zone_limit.size(), 0.0),
        disc_pos_(p.size(), -1) {
    std::vector<std::size_t> disc;
    std::vector<std::size_t> cont;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (p.continuous[i]) {
        cont.push_back(i);
      } else if (p.options[i].size() > 1) {
        disc.push_back(i);
      }
    }
    disc_ = density_order(p, disc);
    cont_ = density_order(p, cont);
    std::vector<std::size_t> all = disc;
    all.insert(all.end(), cont.begin(), cont.end());
    std::sort(all.begin(), all.end());
    relax_order_ = density_order(p, all);
    for (std::size_t d = 0; d < disc_.size(); ++d) disc_pos_[disc_[d]] = static_cast<int>(d);
  }

  ShedPlan run() {
    // All discrete loads off plus the continuous fill is always feasible.
    fill_continuous();
    incumbent_ = make_plan(p_, status_);
    clear_continuous();

    search(0);

    incumbent_.nodes = nodes_;
    incumbent_.optimal = !expired_;
    return incumbent_;
  }

 private:
  double remaining_global() const { return std::max(0.0, p_.budget - fixed_power_); }
  double remaining_zone(int z) const { return z < 0 ? INFINITY : std::max(0.0, p_.zone_limit[z] - zone_used_[z]); }

  bool fits(std::size_t i, double add) const {
    if (fixed_power_ + add > p_.budget + kFitTol) return false;
    const int z = p_.zone[i];
    return z < 0 || zone_used_[z] + add <= p_.zone_limit[z] + kFitTol;
  }

  double max_status(std::size_t i) const { return p_.continuous[i] ? p_.ub[i] : p_.options[i].front(); }

  // Greedy fill in density order is exact for the LP because the budget and
  // the disjoint zone limits form a laminar family of capacity constraints.
  void fill_continuous() {
    double global = remaining_global();
    std::vector<double> zone_rem(p_.zone_limit.size());
    for (std::size_t z = 0; z < zone_rem.size(); ++z) zone_rem[z] = remaining_zone(static_cast<int>(z));
    for (std::size_t i : cont_) {
      const int z = p_.zone[i];
      const double cap = p_.power[i] * p_.ub[i];
      const double y = std::min({cap, global, z < 0 ? INFINITY : zone_rem[z]});
      status_[i] = y >= cap ? p_.ub[i] : y / p_.power[i];
      global = std::max(0.0, global - y);
      if (z >= 0) zone_rem[z] = std::max(0.0, zone_rem[z] - y);
    }
  }

  void clear_continuous() {
    for (std::size_t i : cont_) status_[i] = 0.0;
  }

  struct Bound {
    double objective;
    double power;
  };

  // LP relaxation: unfixed discrete loads become continuous on [0, max option].
  Bound relaxation(std::size_t depth) const {
    double global = remaining_global();
    std::vector<double> zone_rem(p_.zone_limit.size());
    for (std::size_t z = 0; z < zone_rem.size(); ++z) zone_rem[z] = remaining_zone(static_cast<int>(z));
    double obj = fixed_obj_;
    double free_power = 0.0;
    for (std::size_t i : relax_order_) {
      if (disc_pos_[i] >= 0 && static_cast<std::size_t>(disc_pos_[i]) < depth) continue;
      const int z = p_.zone[i];
      const double cap = p_.power[i] * max_status(i);
      free_power += cap;
      const double y = std::min({cap, global, z < 0 ? INFINITY : zone_rem[z]});
      obj += p_.density(i) * y;
      global = std::max(0.0, global - y);
      if (z >= 0) zone_rem[z] = std::max(0.0, zone_rem[z] - y);
    }
    return {obj, fixed_power_ + std::min(free_power, remaining_global())};
  }

  bool prune(const Bound& b, std::size_t depth) const {
    const double eps = objective_eps(b.objective, incumbent_.objective);
    if (b.objective < incumbent_.objective - eps) return true;
    if (b.objective > incumbent_.objective + eps) return false;
    // Within the tie band only the served-power and lexicographic keys matter.
    if (b.power < incumbent_.served_power_w - kPowerTieTol) return true;
    if (b.power > incumbent_.served_power_w + kPowerTieTol) return false;
    for (std::size_t i = 0; i < p_.size(); ++i) {
      double best = status_[i];
      if (p_.continuous[i]) {
        best = p_.ub[i];
      } else if (disc_pos_[i] >= 0 && static_cast<std::size_t>(disc_pos_[i]) >= depth) {
        best = p_.options[i].front();
      }
      const double inc = incumbent_.statuses[i].status;
      if (best > inc + kStatusTol) return false;
      if (best < inc - kStatusTol) return true;
    }
    return true;
  }

  bool out_of_time() {
    if (expired_) return true;
    if ((nodes_ & 0xFF) == 0 && std::chrono::steady_clock::now() > deadline_) expired_ = true;
    return expired_;
  }

  void search(std::size_t depth) {
    ++nodes_;
    if (out_of_time()) return;
    if (prune(relaxation(depth), depth)) return;

    if (depth == disc_.size()) {
      fill_continuous();
      ShedPlan candidate = make_plan(p_, status_);
      clear_continuous();
      if (plan_precedes(candidate, incumbent_)) incumbent_ = std::move(candidate);
      return;
    }

    const std::size_t i = disc_[depth];
    const int z = p_.zone[i];
    for (double opt : p_.options[i]) {
      const double add = p_.power[i] * opt;
      if (!fits(i, add)) continue;
      status_[i] = opt;
      fixed_power_ += add;
      fixed_obj_ += p_.weight[i] * opt;
      if (z >= 0) zone_used_[z] += add;
      search(depth + 1);
      if (z >= 0) zone_used_[z] -= add;
      fixed_obj_ -= p_.weight[i] * opt;
      fixed_power_ -= add;
      status_[i] = 0.0;
      if (expired_) return;
    }
  }

  const Prepared& p_;
  std::chrono::steady_clock::time_point deadline_;
  std::vector<double> status_;
  std::vector<double> zone_used_;
  std::vector<int> disc_pos_;
  std::vector<std::size_t> disc_;
  std::vector<std::size_t> cont_;
  std::vector<std::size_t> relax_order_;
  double fixed_power_ = 0.0;
  double fixed_obj_ = 0.0;
  ShedPlan incumbent_;
  std::uint64_t nodes_ = 0;
  bool expired_ = false;
};

// Solves A x = b for a k x k system; false when (numerically) singular.
bool solve_linear(std::vector<std::vector<double>> a, std::vector<double> b, std::vector<double>& x) {
  const std::size_t k = b.size();
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < k; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    }
    if (std::abs(a[piv][c]) < 1e-12) return false;
    std::swap(a[piv], a[c]);
    std::swap(b[piv], b[c]);
    for (std::size_t r = 0; r < k; ++r) {
      if (r == c) continue;
      const double f = a[r][c] / a[c][c];
      if (f == 0.0) continue;
      for (std::size_t cc = c; cc < k; ++cc) a[r][cc] -= f * a[c][cc];
      b[r] -= f * b[c];
    }
  }
  x.assign(k, 0.0);
  for (std::size_t c = 0; c < k; ++c) x[c] = b[c] / a[c][c];
  return true;
}

class Exhaustive {
 public:
  explicit Exhaustive(const Prepared& p) : p_(p), status_(p.size(), 0.0), zone_used_(p.zone_limit.size(), 0.0) {
    double combos = 1.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (p.continuous[i]) {
        cont_.push_back(i);
      } else {
        disc_.push_back(i);
        combos *= static_cast<double>(p.options[i].size());
      }
    }
    if (cont_.size() > 4) throw InstanceTooLargeError("brute force supports at most 4 continuous loads");
    if (combos > static_cast<double>(1 << 24))
      throw InstanceTooLargeError("brute force limited to 2^24 discrete combinations");
  }

  ShedPlan run() {
    enumerate(0);
    best_.nodes = leaves_;
    best_.optimal = true;
    return best_;
  }

 private:
  void enumerate(std::size_t k) {
    if (k == disc_.size()) {
      ++leaves_;
      solve_continuous();
      return;
    }
    const std::size_t i = disc_[k];
    for (double opt : p_.options[i]) {
      status_[i] = opt;
      enumerate(k + 1);
    }
    status_[i] = 0.0;
  }

  // Constraint rows a.x <= b over the continuous variables.
  struct Row {
    std::vector<double> a;
    double b;
    double tol;
  };

  void solve_continuous() {
    double used = 0.0;
    std::vector<double> zone_used(p_.zone_limit.size(), 0.0);
    for (std::size_t i : disc_) {
      const double pw = p_.power[i] * status_[i];
      used += pw;
      if (p_.zone[i] >= 0) zone_used[p_.zone[i]] += pw;
    }
    if (used > p_.budget + kFitTol) return;
    for (std::size_t z = 0; z < zone_used.size(); ++z) {
      if (zone_used[z] > p_.zone_limit[z] + kFitTol) return;
    }

    const std::size_t k = cont_.size();
    std::vector<Row> rows;
    for (std::size_t j = 0; j < k; ++j) {
      std::vector<double> up(k, 0.0), lo(k, 0.0);
      up[j] = 1.0;
      lo[j] = -1.0;
      rows.push_back({up, p_.ub[cont_[j]], kStatusTol});
      rows.push_back({lo, 0.0, kStatusTol});
    }
    {
      std::vector<double> a(k);
      for (std::size_t j = 0; j < k; ++j) a[j] = p_.power[cont_[j]];
      rows.push_back({a, p_.budget - used, kFitTol});
    }
    for (std::size_t z = 0; z < p_.zone_limit.size(); ++z) {
      std::vector<double> a(k, 0.0);
      bool any = false;
      for (std::size_t j = 0; j < k; ++j) {
        if (p_.zone[cont_[j]] == static_cast<int>(z)) {
          a[j] = p_.power[cont_[j]];
          any = true;
        }
      }
      if (any) rows.push_back({a, p_.zone_limit[z] - zone_used[z], kFitTol});
    }

    if (k == 0) {
      consider();
      return;
    }
    // Every vertex of the feasible polytope makes k linearly independent rows tight.
    std::vector<std::size_t> pick(k);
    std::iota(pick.begin(), pick.end(), 0);
    const std::size_t m = rows.size();
    while (true) {
      std::vector<std::vector<double>> a;
      std::vector<double> b;
      for (std::size_t r : pick) {
        a.push_back(rows[r].a);
        b.push_back(rows[r].b);
      }
      std::vector<double> x;
      if (solve_linear(a, b, x)) {
        bool feasible = true;
        for (const auto& row : rows) {
          double lhs = 0.0;
          for (std::size_t j = 0; j < k; ++j) lhs += row.a[j] * x[j];
          if (lhs > row.b + row.tol) {
            feasible = false;
            break;
          }
        }
        if (feasible) {
          for (std::size_t j = 0; j < k; ++j) status_[cont_[j]] = std::clamp(x[j], 0.0, p_.ub[cont_[j]]);
          consider();
        }
      }
      // Next k-combination of m rows.
      std::size_t pos = k;
      while (pos > 0 && pick[pos - 1] == m - k + pos - 1) --pos;
      if (pos == 0) break;
      ++pick[pos - 1];
      for (std::size_t q = pos; q < k; ++q) pick[q] = pick[q - 1] + 1;
    }
    for (std::size_t i : cont_) status_[i] = 0.0;
  }

  void consider() {
    ShedPlan candidate = make_plan(p_, status_);
    if (!have_best_ || plan_precedes(candidate, best_)) {
      best_ = std::move(candidate);
      have_best_ = true;
    }
  }

  const Prepared& p_;
  std::vector<double> status_;
  std::vector<double> zone_used_;
  std::vector<std::size_t> disc_;
  std::vector<std::size_t> cont_;
  ShedPlan best_;
  bool have_best_ = false;
  std::uint64_t leaves_ = 0;
};

}  // namespace

double ShedPlan::status_of(LoadId id) const {
  for (const auto& s : statuses) {
    if (s.load_id == id) return s.status;
  }
  return 0.0;
}

double capacity_budget(double online_capacity_w, double loss_fraction) {
  return std::max(0.0, online_capacity_w) / (1.0 + loss_fraction);
}

ShedInstance build_instance(const SystemSnapshot& snapshot, const MissionWeightSet& weights,
                            const Fleet& fleet, const std::vector<ZoneLimit>& zones,
                            const std::set<LoadId>& forced_off, double loss_fraction) {
  std::map<LoadId, const LoadTelemetry*> telemetry;
  for (const auto& t : snapshot.loads) telemetry[t.load_id] = &t;

  ShedInstance inst;
  inst.capacity_budget_w = capacity_budget(snapshot.total_capacity_w, loss_fraction);
  inst.zones = zones;
  for (const auto& load : fleet) {
    auto w = weights.weights.find(load.id);
    if (w == weights.weights.end())
      throw ConfigurationError("no mission weight for load " + std::to_string(load.id));
    auto t = telemetry.find(load.id);
    if (t == telemetry.end()) throw ConfigurationError("no telemetry for load " + std::to_string(load.id));

    ShedItem item;
    item.load_id = load.id;
    item.weight = w->second;
    item.demand_status = load.variability.floor(std::clamp(t->second->demand_status, 0.0, 1.0));
    item.rated_power_w = load.rated_power_w;
    item.required_power_w = required_power(load, {load.id, item.demand_status});
    item.variability = load.variability;
    item.forced_off = forced_off.count(load.id) > 0;
    item.zone = load.zone;
    inst.items.push_back(std::move(item));
  }
  return inst;
}

ShedPlan solve(const ShedInstance& instance, double deadline_s) {
  const auto start = std::chrono::steady_clock::now();
  const Prepared p = prepare(instance);
  ShedPlan plan = BranchAndBound(p, deadline_s).run();
  plan.solve_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return plan;
}

ShedPlan brute_force_solve(const ShedInstance& instance) {
  const auto start = std::chrono::steady_clock::now();
  const Prepared p = prepare(instance);
  ShedPlan plan = Exhaustive(p).run();
  plan.solve_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return plan;
}

void evaluate_plan(const ShedInstance& instance, ShedPlan& plan) {
  const Prepared p = prepare(instance);
  std::sort(plan.statuses.begin(), plan.statuses.end(),
            [](const LoadState& a, const LoadState& b) { return a.load_id < b.load_id; });
  if (plan.statuses.size() != p.size()) throw std::invalid_argument("plan does not cover the instance");
  evaluate(p, plan);
}

bool plan_precedes(const ShedPlan& a, const ShedPlan& b) {
  const double eps = objective_eps(a.objective, b.objective);
  if (a.objective > b.objective + eps) return true;
  if (a.objective < b.objective - eps) return false;
  if (a.served_power_w > b.served_power_w + kPowerTieTol) return true;
  if (a.served_power_w < b.served_power_w - kPowerTieTol) return false;
  return lex_compare(a.statuses, b.statuses) > 0;
}

std::vector<std::string> plan_violations(const ShedInstance& instance, const ShedPlan& plan,
                                         double tolerance_w) {
  std::vector<std::string> out;
  std::map<LoadId, double> status;
  for (const auto& s : plan.statuses) status[s.load_id] = s.status;

  double total = 0.0;
  std::map<LoadId, double> power;
  for (const auto& it : instance.items) {
    auto s = status.find(it.load_id);
    if (s == status.end()) {
      out.push_back("load " + std::to_string(it.load_id) + " missing from plan");
      continue;
    }
    const double o = s->second;
    if (!it.variability.admits(o, kStatusTol))
      out.push_back("load " + std::to_string(it.load_id) + " status outside its domain");
    if (o > it.demand_status + kStatusTol)
      out.push_back("load " + std::to_string(it.load_id) + " served above demand");
    if (it.forced_off && o != 0.0)
      out.push_back("forced-off load " + std::to_string(it.load_id) + " is served");
    power[it.load_id] = it.rated_power_w * o;
    total += it.rated_power_w * o;
  }
  if (total > instance.capacity_budget_w + tolerance_w)
    out.push_back("supply-demand: served " + std::to_string(total) + " W exceeds budget " +
                  std::to_string(instance.capacity_budget_w) + " W");
  for (const auto& z : instance.zones) {
    double zsum = 0.0;
    for (LoadId m : z.members) {
      auto p = power.find(m);
      if (p != power.end()) zsum += p->second;
    }
    if (zsum > z.limit_w + tolerance_w)
      out.push_back("line-flow: zone " + z.zone + " carries " + std::to_string(zsum) + " W over limit " +
                    std::to_string(z.limit_w) + " W");
  }
  return out;
}

}  // namespace lshed
