// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "lshed/link.hpp"
#include "lshed/optimizer.hpp"
#include "lshed/report.hpp"
#include "lshed/runner.hpp"
#include "lshed/scenario.hpp"
#include "support.hpp"

using namespace lshed;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string num(double v, int digits = 4) {
  std::ostringstream ss;
  ss.setf(std::ios::fixed);
  ss.precision(digits);
  ss << v;
  return ss.str();
}

// Bundled runs shared by several criteria.
struct Runs {
  RunRecord advanced;
  RunRecord baseline;
  double advanced_s = 0.0;
  double baseline_s = 0.0;
};

const Runs& bundled_runs() {
  static const Runs runs = [] {
    Runs r;
    ScenarioConfig s = bundled_scenario();
    s.controller.algorithm = Algorithm::Advanced;
    auto t0 = Clock::now();
    r.advanced = run_lockstep(s);
    r.advanced_s = seconds_since(t0);
    s.controller.algorithm = Algorithm::Baseline;
    t0 = Clock::now();
    r.baseline = run_lockstep(s);
    r.baseline_s = seconds_since(t0);
    return r;
  }();
  return runs;
}

Outcome oracle_equivalence() {
  std::mt19937_64 rng(1001);
  fixtures::InstanceShape shape;
  shape.max_discrete = 20;
  shape.max_continuous = 2;
  const auto t0 = Clock::now();
  int mismatches = 0;
  std::string first;
  for (int trial = 0; trial < 200; ++trial) {
    const ShedInstance inst = fixtures::random_instance(rng, shape);
    const ShedPlan a = solve(inst, 60.0);
    const ShedPlan b = brute_force_solve(inst);
    bool same = std::abs(a.objective - b.objective) <= 1e-9 * std::max(1.0, std::abs(b.objective)) &&
                a.statuses.size() == b.statuses.size();
    for (std::size_t i = 0; same && i < a.statuses.size(); ++i) {
      const bool continuous = inst.items[i].variability.kind == Variability::Kind::Continuous;
      const double d = std::abs(a.statuses[i].status - b.statuses[i].status);
      same = continuous ? d <= 1e-9 : d == 0.0;
    }
    if (!same) {
      if (mismatches++ == 0) first = " first mismatch at trial " + std::to_string(trial);
    }
  }
  const double elapsed = seconds_since(t0);
  Outcome o;
  o.pass = mismatches == 0 && elapsed < 60.0;
  o.detail = "200 instances, " + std::to_string(mismatches) + " mismatches, " + num(elapsed, 2) + " s" + first;
  return o;
}

Outcome feasibility_suite() {
  std::mt19937_64 rng(2002);
  int violations = 0;
  std::string first;
  for (int trial = 0; trial < 10'000; ++trial) {
    const ShedInstance inst = fixtures::random_instance(rng);
    const ShedPlan p = solve(inst);
    if (auto v = fixtures::independent_violation(inst, p, kFeasibilityTolerance)) {
      if (violations++ == 0) first = " first: " + *v;
    }
  }
  return {violations == 0, "10000 solves, " + std::to_string(violations) + " violations" + first};
}

Outcome deadline() {
  const RunSummary s = summarize(bundled_runs().advanced);
  Outcome o;
  o.pass = s.solves == 6000 && s.p99_solve_s < 0.050;
  o.detail = std::to_string(s.solves) + " solves, p99 " + num(s.p99_solve_s * 1e3, 3) + " ms, max " +
             num(s.max_solve_s * 1e3, 3) + " ms, non-optimal " + std::to_string(s.non_optimal);
  return o;
}

Outcome replication() {
  const Runs& r = bundled_runs();
  const double adv = summarize(r.advanced).integral_commanded;
  const double base = summarize(r.baseline).integral_commanded;
  Outcome o;
  o.pass = adv >= 0.99 && base <= 0.90 && adv - base >= 0.09 && r.advanced_s < 120.0 && r.baseline_s < 120.0;
  o.detail = "advanced " + num(adv) + ", baseline " + num(base) + ", gap " + num(adv - base) + ", runtimes " +
             num(r.advanced_s, 2) + " s / " + num(r.baseline_s, 2) + " s";
  return o;
}

Outcome shortfall_floor() {
  double lo = 1.0;
  TimeMs at = 0;
  std::size_t n = 0;
  for (const auto& row : bundled_runs().advanced.rows) {
    if (row.time_ms < 310'000 || row.time_ms > 395'000) continue;
    ++n;
    if (row.op_commanded.value() < lo) {
      lo = row.op_commanded.value();
      at = row.time_ms;
    }
  }
  return {lo >= 0.95 && n == 851, "min " + num(lo) + " at " + num(to_seconds(at), 1) + " s over " + std::to_string(n) + " ticks"};
}

Outcome restoration() {
  const Runs& r = bundled_runs();
  std::optional<TimeMs> restored;
  bool stays = true;
  for (const auto& row : r.advanced.rows) {
    if (row.time_ms < 395'000) continue;
    const bool full = row.op_commanded.value() >= 1.0 - 1e-12;
    if (!restored && full) restored = row.time_ms;
    if (restored && !full) stays = false;
  }
  const bool quick = restored && *restored <= 395'000 + 2 * r.advanced.window.tick;

  bool monotone = true;
  TimeMs rise_at = 0;
  const auto& rows = r.baseline.rows;
  for (std::size_t k = 1; k < rows.size(); ++k) {
    if (rows[k].time_ms <= 310'000) continue;
    if (rows[k].served_w > rows[k - 1].served_w + kFeasibilityTolerance) {
      if (monotone) rise_at = rows[k].time_ms;
      monotone = false;
    }
  }
  std::string detail = "advanced back to 1.0 at " + (restored ? num(to_seconds(*restored), 1) + " s" : "never") +
                       (stays ? "" : " (not sustained)") + "; baseline served " +
                       (monotone ? "non-increasing after 310 s" : "rises at " + num(to_seconds(rise_at), 1) + " s");
  return {quick && stays && monotone, detail};
}

Outcome group_behavior() {
  const Runs& r = bundled_runs();
  auto served_equals_demand = [](const GroupSeries& g) {
    for (std::size_t k = 0; k < g.time_ms.size(); ++k) {
      if (std::abs(g.served_w[k] - g.demand_w[k]) > kFeasibilityTolerance) return false;
    }
    return true;
  };
  const bool ipnc = served_equals_demand(emit_plot_data(r.advanced, "IPNC"));
  const bool mw = served_equals_demand(emit_plot_data(r.advanced, "MWClass"));
  const bool aclc_v = served_equals_demand(emit_plot_data(r.advanced, "ACLC_Vital"));
  const bool aclc_nv = served_equals_demand(emit_plot_data(r.advanced, "ACLC_NonVital"));

  // During the shortfall every curtailment is PMM.
  const GroupSeries pmm = emit_plot_data(r.advanced, "PMM");
  bool pmm_absorbs = false;
  for (std::size_t k = 0; k < pmm.time_ms.size(); ++k) {
    if (pmm.time_ms[k] > 310'000 && pmm.time_ms[k] < 395'000 && pmm.served_w[k] < pmm.demand_w[k] - 1.0)
      pmm_absorbs = true;
  }

  const RunRecord& b = r.baseline;
  const RunRow& last = b.rows.back();
  std::size_t nv_total = 0, nv_shed = 0, vital_shed = 0;
  for (std::size_t i = 0; i < b.fleet.size(); ++i) {
    const bool off = last.loads[i].commanded == 0.0;
    if (b.fleet[i].group == LoadGroup::AclcNonVital) {
      ++nv_total;
      nv_shed += off;
    }
    if (category_of(b.fleet[i].group) == Category::Vital) vital_shed += off;
  }
  Outcome o;
  o.pass = ipnc && mw && aclc_v && pmm_absorbs && nv_shed == nv_total && vital_shed >= 1;
  o.detail = std::string("advanced: IPNC ") + (ipnc ? "full" : "curtailed") + ", MWClass " + (mw ? "full" : "curtailed") +
             ", ACLC vital " + (aclc_v ? "full" : "curtailed") + ", ACLC non-vital " + (aclc_nv ? "full" : "curtailed") +
             ", PMM " + (pmm_absorbs ? "throttled" : "untouched") + "; baseline: non-vital shed " +
             std::to_string(nv_shed) + "/" + std::to_string(nv_total) + ", vital-category shed " + std::to_string(vital_shed);
  return o;
}

Outcome baseline_timers() {
  std::mt19937_64 rng(3003);
  const Fleet fleet = default_fleet();
  std::size_t traces = 0;
  for (int trial = 0; trial < 1000; ++trial, ++traces) {
    const auto trace = fixtures::random_loading_trace(rng, 1200, 0.2 + 0.7 * (trial % 4) / 3.0);
    if (auto failure = fixtures::check_baseline_trace(fleet, trace, 100))
      return {false, "trace " + std::to_string(trial) + ": " + *failure};
  }
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial, ++traces) {
    std::vector<double> trace(1200);
    for (auto& v : trace) v = u(rng);  // never above 1.0 pu
    std::size_t cmds = 0;
    if (auto failure = fixtures::check_baseline_trace(fleet, trace, 100, &cmds)) return {false, *failure};
    if (cmds != 0) return {false, "commands on a never-overloaded trace"};
  }
  return {true, std::to_string(traces) + " traces"};
}

void le_f64(Bytes& out, double d) {
  std::uint64_t bits;
  std::memcpy(&bits, &d, 8);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

Outcome codec() {
  std::mt19937_64 rng(4004);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int bad_roundtrips = 0;
  for (int i = 0; i < 10'000; ++i) {
    if (i % 2 == 0) {
      SystemSnapshot s;
      s.time_ms = static_cast<TimeMs>(rng() >> 12);
      s.total_capacity_w = 1e8 * u(rng);
      s.total_loss_w = 1e6 * u(rng);
      s.loading_pu = 2 * u(rng);
      s.mission_id = static_cast<MissionId>(rng());
      const std::size_t n = rng() % 160;
      for (std::size_t k = 0; k < n; ++k) s.loads.push_back({static_cast<LoadId>(rng()), u(rng), 4e7 * u(rng)});
      TelemetryAssembler a;
      std::optional<SystemSnapshot> got;
      for (const auto& dg : encode_telemetry(s, static_cast<std::uint32_t>(i))) {
        auto f = decode_telemetry(dg);
        if (dg.size() > kMaxDatagramSize || !f) break;
        if (auto done = a.push(f.value())) got = done->second;
      }
      bad_roundtrips += !(got && *got == s);
    } else {
      std::vector<ShedCommand> cmds(rng() % 300);
      for (auto& c : cmds) c = {static_cast<LoadId>(rng()), u(rng)};
      const TimeMs ts = static_cast<TimeMs>(rng() >> 12);
      CommandAssembler a;
      std::optional<CommandFrame> got;
      for (const auto& dg : encode_commands(cmds, static_cast<std::uint32_t>(i), ts)) {
        auto f = decode_commands(dg);
        if (dg.size() > kMaxDatagramSize || !f) break;
        if (auto done = a.push(f.value())) got = done;
      }
      bad_roundtrips += !(got && got->commands == cmds && got->timestamp_ms == ts);
    }
  }

  std::size_t decoded = 0;
  for (int i = 0; i < 100'000; ++i) {
    Bytes b(rng() % 256);
    for (auto& x : b) x = static_cast<std::uint8_t>(rng());
    if (i % 3 == 0 && b.size() >= 4) {
      b[0] = kMagic0;
      b[1] = kMagic1;
      b[2] = kProtocolVersion;
      b[3] = static_cast<std::uint8_t>(1 + rng() % 2);
    }
    decoded += decode_telemetry(b).ok() + decode_commands(b).ok();
  }

  // Layout examples.
  int layout_fail = 0;
  {
    SystemSnapshot s;
    auto dg = encode_telemetry(s, 1).at(0);
    const Bytes head = {0x4C, 0x53, 0x01, 0x01, 0x01, 0x00, 0x00, 0x00, 0, 0, 0, 0, 0, 0, 0, 0, 0x00, 0x00};
    layout_fail += !(dg.size() == head.size() + kTelemetryTrailerSize && std::equal(head.begin(), head.end(), dg.begin()));
  }
  {
    SystemSnapshot s;
    s.loads = {{7, 1.0, 0.0}};
    auto dg = encode_telemetry(s, 0).at(0);
    Bytes expect = {0x07, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0xF0, 0x3F};
    le_f64(expect, 0.0);
    layout_fail += !std::equal(expect.begin(), expect.end(), dg.begin() + kHeaderSize);
  }
  {
    auto dg = encode_commands(std::vector<ShedCommand>{{3, 0.5}}, 0, 0).at(0);
    const Bytes expect = {0x03, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0xE0, 0x3F};
    layout_fail += !(dg.size() == kHeaderSize + 10 && std::equal(expect.begin(), expect.end(), dg.begin() + kHeaderSize));
  }
  Outcome o;
  o.pass = bad_roundtrips == 0 && layout_fail == 0;
  o.detail = "10000 round trips (" + std::to_string(bad_roundtrips) + " bad), 100000 fuzz strings (no crash, " +
             std::to_string(decoded) + " accepted), layouts " + std::to_string(3 - layout_fail) + "/3";
  return o;
}

Outcome determinism() {
  ScenarioConfig s = bundled_scenario();
  s.impairment = {0.1, 0.0, 0.0, 42};
  const std::string a = run_csv(run_lockstep(s));
  const std::string b = run_csv(run_lockstep(s));

  const ScenarioConfig clean = bundled_scenario();
  const RunRecord lock = bundled_runs().advanced;
  NetworkOptions net;
  net.plant_port = 0;
  net.controller_port = 0;
  RunRecord networked;
  std::string error;
  try {
    networked = run_networked(clean, net);
  } catch (const std::exception& e) {
    error = e.what();
  }
  bool same_commands = error.empty() && networked.batches.size() == lock.batches.size();
  for (std::size_t i = 0; same_commands && i < lock.batches.size(); ++i) {
    same_commands = networked.batches[i].answers_ms == lock.batches[i].answers_ms &&
                    networked.batches[i].commands == lock.batches[i].commands;
  }
  Outcome o;
  o.pass = a == b && same_commands;
  o.detail = std::string("repeat run.csv ") + (a == b ? "identical" : "differs") + " (" + std::to_string(a.size()) +
             " bytes); networked command sequence " + (same_commands ? "matches" : "differs") + " (" +
             std::to_string(lock.batches.size()) + " batches)" + (error.empty() ? "" : ": " + error);
  return o;
}

// Degraded ticks must match an independent replay of the drop schedule. The
// 60% pass exists because 10% loss almost never drops stale_limit in a row.
Outcome impairment() {
  Outcome o;
  for (double loss : {0.1, 0.6}) {
    ScenarioConfig s = bundled_scenario();
    s.impairment = {loss, 0.0, 0.0, 42};
    RunRecord r;
    try {
      r = run_lockstep(s);
    } catch (const std::exception& e) {
      return {false, std::string("run failed: ") + e.what()};
    }
    Impairment replay(s.impairment);
    std::vector<bool> delivered;
    for (const auto& row : r.rows) delivered.push_back(replay.impair(row.time_ms).has_value());
    const auto limit = static_cast<std::size_t>(s.controller.stale_limit);
    std::size_t expected = 0, mismatched = 0, actual = 0;
    for (std::size_t k = 0; k < r.rows.size(); ++k) {
      bool all_dropped = k + 1 >= limit;
      for (std::size_t j = 0; j < limit && all_dropped; ++j) all_dropped = !delivered[k - j];
      expected += all_dropped;
      actual += r.rows[k].degraded;
      mismatched += all_dropped != r.rows[k].degraded;
    }
    std::size_t infeasible = 0;
    for (const auto& b : r.batches) infeasible += !b.feasible;
    o.pass = o.pass && r.rows.size() == 6000 && mismatched == 0 && infeasible == 0;
    if (!o.detail.empty()) o.detail += "; ";
    o.detail += "loss " + num(loss, 1) + ": " + std::to_string(r.rows.size()) + " ticks, degraded " +
                std::to_string(actual) + " (replay " + std::to_string(expected) + "), " +
                std::to_string(r.batches.size()) + " batches, " + std::to_string(infeasible) + " infeasible";
  }
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"1 oracle equivalence", oracle_equivalence},
      {"2 feasibility suite", feasibility_suite},
      {"3 solve deadline", deadline},
      {"4 scenario replication", replication},
      {"5 shortfall floor", shortfall_floor},
      {"6 restoration", restoration},
      {"7 group behavior", group_behavior},
      {"8 baseline timer semantics", baseline_timers},
      {"9 codec", codec},
      {"10 determinism and mode equivalence", determinism},
      {"11 impairment robustness", impairment},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
  return failed == 0 ? 0 : 1;
}
