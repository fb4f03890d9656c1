#include "lshed/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <thread>

#include "lshed/log.hpp"
#include "lshed/udp.hpp"

namespace lshed {

namespace {

using Clock = std::chrono::steady_clock;

RunRecord empty_record(const ScenarioConfig& s) {
  RunRecord rec;
  rec.scenario_name = s.name;
  rec.algorithm = s.controller.algorithm;
  rec.fleet = s.fleet;
  rec.window = s.window;
  rec.rows.reserve(s.window.tick_count());
  return rec;
}

// Row for the plant state at its current clock, before this tick's commands land.
RunRow observe(const PlantModel& model, const PlantState& st, const MissionDatabase& missions) {
  const SystemSnapshot snap = make_snapshot(model, st);
  RunRow row;
  row.time_ms = st.clock_ms;
  row.capacity_w = snap.total_capacity_w;
  row.loss_w = snap.total_loss_w;
  row.loading_pu = snap.loading_pu;
  row.budget_w = capacity_budget(snap.total_capacity_w, model.loss_fraction);

  const MissionWeightSet* weights = missions.lookup(model.mission_id, to_seconds(st.clock_ms));
  row.loads.reserve(st.loads.size());
  for (std::size_t i = 0; i < st.loads.size(); ++i) {
    const LoadSpec& spec = model.fleet[i];
    const PlantLoad& pl = st.loads[i];
    const bool forced = st.forced_off.count(spec.id) > 0;
    const double o_cmd = forced ? 0.0 : std::min(pl.commanded, pl.demand);
    double o_meas = spec.rated_power_w > 0.0 ? pl.measured_w / spec.rated_power_w : 0.0;
    o_meas = std::clamp(o_meas, 0.0, pl.demand);

    double w = 0.0;
    if (weights != nullptr) {
      auto it = weights->weights.find(spec.id);
      if (it != weights->weights.end()) w = it->second;
    }
    row.op_commanded.numerator += w * o_cmd;
    row.op_commanded.denominator += w * pl.demand;
    row.op_measured.numerator += w * o_meas;
    row.op_measured.denominator += w * pl.demand;

    row.demand_w += spec.rated_power_w * pl.demand;
    row.served_w += spec.rated_power_w * o_cmd;
    row.measured_w += pl.measured_w;
    row.loads.push_back({pl.demand, forced ? 0.0 : pl.commanded, pl.measured_w});
  }
  return row;
}

// Feeds command datagrams through the codec and returns the complete batches.
std::vector<CommandFrame> receive_commands(CommandAssembler& assembler, const std::vector<Bytes>& datagrams) {
  std::vector<CommandFrame> out;
  for (const auto& dg : datagrams) {
    auto frame = decode_commands(dg);
    if (!frame) {
      log_warn("dropping command datagram: " + std::string(to_string(frame.error())));
      continue;
    }
    if (auto done = assembler.push(std::move(frame.value()))) out.push_back(std::move(*done));
  }
  return out;
}

}  // namespace

RunRecord run_lockstep(const ScenarioConfig& s) {
  const PlantModel model = plant_model(s);
  const MissionDatabase missions = mission_database(s);
  Controller ctl(s.controller, control_database(s));
  Impairment impairment(s.impairment);
  DelayLine line;
  TelemetryAssembler telemetry_in;
  CommandAssembler commands_in;

  RunRecord rec = empty_record(s);
  const TimeMs tick = s.window.tick;
  const int stale_limit = s.controller.stale_limit;

  PlantState st;
  // Before any telemetry has arrived the controller's data is one tick old.
  TimeMs last_known = s.window.t_start - tick;
  std::optional<TimeMs> last_processed;
  bool last_feasible = true;
  std::uint32_t cmd_seq = 0;

  const std::size_t n = s.window.tick_count();
  for (std::size_t k = 0; k < n; ++k) {
    const TimeMs t = s.window.t_start + static_cast<TimeMs>(k) * tick;
    SystemSnapshot snap;
    if (k == 0) {
      st = plant_init(model, t);
      snap = make_snapshot(model, st);
    } else {
      std::tie(st, snap) = plant_tick(model, std::move(st), tick);
    }

    for (auto& dg : encode_telemetry(snap, static_cast<std::uint32_t>(k))) {
      if (auto at = impairment.impair(t)) line.push(std::move(dg), *at);
    }

    // Controller side: freshest complete snapshot that arrived by t.
    std::optional<SystemSnapshot> fresh;
    for (const auto& dg : line.pop_due(t)) {
      auto frame = decode_telemetry(dg);
      if (!frame) continue;
      auto done = telemetry_in.push(std::move(frame.value()));
      if (!done) continue;
      const TimeMs ts = done->second.time_ms;
      if (last_processed && ts <= *last_processed) continue;
      if (!fresh || ts > fresh->time_ms) fresh = std::move(done->second);
    }

    RunRow row = observe(model, st, missions);

    const TimeMs newest = fresh ? std::max(fresh->time_ms, last_known) : last_known;
    const TimeMs age_ticks = (t - newest) / tick;
    std::optional<CommandBatch> batch;
    if (age_ticks >= stale_limit) {
      row.degraded = true;
      batch = CommandBatch{t, last_processed.value_or(t), 0, true, last_feasible, ctl.held_commands()};
    } else if (fresh) {
      auto cmds = ctl.on_telemetry(*fresh);
      const ControlDiagnostics& d = ctl.diagnostics();
      row.fresh = true;
      row.solved = d.solved;
      row.optimal = d.optimal;
      row.solve_nodes = d.nodes;
      if (d.solved) rec.timings.push_back({fresh->time_ms, d.solve_time_s, d.nodes, d.optimal});
      last_feasible = d.feasible;
      batch = CommandBatch{t, fresh->time_ms, 0, false, d.feasible, std::move(cmds)};
    }
    if (fresh) {
      last_known = std::max(last_known, fresh->time_ms);
      last_processed = std::max(last_processed.value_or(fresh->time_ms), fresh->time_ms);
    }

    if (batch) {
      batch->seq = cmd_seq++;
      row.commands_sent = static_cast<int>(batch->commands.size());
      for (const auto& frame : receive_commands(commands_in, encode_commands(batch->commands, batch->seq,
                                                                             batch->answers_ms))) {
        st = apply_commands(model, std::move(st), frame.commands);
      }
      rec.batches.push_back(std::move(*batch));
    }
    rec.rows.push_back(std::move(row));
  }
  return rec;
}

namespace {

struct ControllerLogEntry {
  TimeMs telemetry_ms = 0;
  ControlDiagnostics diag;
};

struct ControllerLog {
  std::vector<ControllerLogEntry> entries;
  std::vector<SolveTiming> timings;
};

ControllerLog controller_loop(const ScenarioConfig& s, UdpSocket& sock, std::uint16_t peer,
                              const NetworkOptions& opt, const std::atomic<bool>* stop) {
  Controller ctl(s.controller, control_database(s));
  TelemetryAssembler telemetry_in;
  ControllerLog log;
  std::uint32_t seq = 0;
  std::optional<TimeMs> last_time;
  int empty_periods = 0;
  const TimeMs final_tick = s.window.t_end - s.window.tick;
  const int period_ms =
      opt.pace > 0.0 ? std::max(1, static_cast<int>(std::llround(s.window.tick * opt.pace))) : 50;
  auto idle_since = Clock::now();

  auto send = [&](const std::vector<ShedCommand>& cmds, TimeMs ts) {
    for (const auto& dg : encode_commands(cmds, seq, ts)) sock.send_to(peer, dg, opt.host);
    ++seq;
  };

  while (stop == nullptr || !stop->load()) {
    auto dg = sock.receive(period_ms);
    if (!dg) {
      const auto idle = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - idle_since).count();
      if (idle > opt.idle_timeout_ms) {
        log_warn("controller: no telemetry for " + std::to_string(idle) + " ms, stopping");
        break;
      }
      if (last_time && ++empty_periods >= s.controller.stale_limit) send(ctl.held_commands(), *last_time);
      continue;
    }
    idle_since = Clock::now();
    auto frame = decode_telemetry(*dg);
    if (!frame) {
      log_warn("controller: dropping telemetry datagram: " + std::string(to_string(frame.error())));
      continue;
    }
    auto done = telemetry_in.push(std::move(frame.value()));
    if (!done) continue;
    const SystemSnapshot& snap = done->second;
    if (last_time && snap.time_ms <= *last_time) continue;

    auto cmds = ctl.on_telemetry(snap);
    last_time = snap.time_ms;
    empty_periods = 0;
    send(cmds, snap.time_ms);
    const ControlDiagnostics& d = ctl.diagnostics();
    log.entries.push_back({snap.time_ms, d});
    if (d.solved) log.timings.push_back({snap.time_ms, d.solve_time_s, d.nodes, d.optimal});
    if (snap.time_ms >= final_tick) break;
  }
  return log;
}

RunRecord plant_loop(const ScenarioConfig& s, UdpSocket& sock, std::uint16_t peer, const NetworkOptions& opt) {
  const PlantModel model = plant_model(s);
  const MissionDatabase missions = mission_database(s);
  Impairment impairment(s.impairment);
  DelayLine line;
  CommandAssembler commands_in;
  RunRecord rec = empty_record(s);
  const TimeMs tick = s.window.tick;
  std::optional<TimeMs> answered;  // newest telemetry time a batch has answered
  std::size_t timeouts = 0;

  // Applies one complete batch; returns true when it answers `expect`.
  auto take = [&](CommandFrame&& frame, PlantState& st, RunRow* row, std::optional<TimeMs> expect) {
    const bool resend = answered && frame.timestamp_ms <= *answered;
    if (!resend) answered = frame.timestamp_ms;
    st = apply_commands(model, std::move(st), frame.commands);
    if (row != nullptr) {
      row->commands_sent += static_cast<int>(frame.commands.size());
      row->degraded = row->degraded || resend;
    }
    rec.batches.push_back({st.clock_ms, frame.timestamp_ms, frame.seq, resend, true, std::move(frame.commands)});
    return expect && frame.timestamp_ms == *expect;
  };
  auto feed = [&](const Bytes& dg) -> std::optional<CommandFrame> {
    auto frame = decode_commands(dg);
    if (!frame) {
      log_warn("plant: dropping command datagram: " + std::string(to_string(frame.error())));
      return std::nullopt;
    }
    return commands_in.push(std::move(frame.value()));
  };

  PlantState st;
  const auto wall_start = Clock::now();
  const std::size_t n = s.window.tick_count();
  for (std::size_t k = 0; k < n; ++k) {
    const TimeMs t = s.window.t_start + static_cast<TimeMs>(k) * tick;
    RunRow* prev = rec.rows.empty() ? nullptr : &rec.rows.back();
    // Late batches (failsafe resends, delayed replies) act from this step on.
    while (auto dg = sock.receive(0)) {
      if (auto frame = feed(*dg)) take(std::move(*frame), st, prev, std::nullopt);
    }

    SystemSnapshot snap;
    if (k == 0) {
      st = plant_init(model, t);
      snap = make_snapshot(model, st);
    } else {
      std::tie(st, snap) = plant_tick(model, std::move(st), tick);
    }
    for (auto& dg : encode_telemetry(snap, static_cast<std::uint32_t>(k))) {
      if (auto at = impairment.impair(t)) line.push(std::move(dg), *at);
    }
    std::optional<TimeMs> expect;
    for (const auto& dg : line.pop_due(t)) {
      sock.send_to(peer, dg, opt.host);
      if (auto frame = decode_telemetry(dg)) expect = std::max(expect.value_or(frame.value().snapshot.time_ms),
                                                               frame.value().snapshot.time_ms);
    }
    if (expect && answered && *expect <= *answered) expect.reset();

    rec.rows.push_back(observe(model, st, missions));
    RunRow& row = rec.rows.back();

    if (expect) {
      const auto deadline = Clock::now() + std::chrono::milliseconds(opt.reply_timeout_ms);
      bool got = false;
      while (!got) {
        const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
        if (left < 0) break;
        auto dg = sock.receive(static_cast<int>(left));
        if (!dg) break;
        if (auto frame = feed(*dg)) got = take(std::move(*frame), st, &row, expect);
      }
      row.fresh = got;
      if (!got) ++timeouts;
    }

    if (opt.pace > 0.0) {
      const auto due = wall_start + std::chrono::microseconds(
                                        std::llround(static_cast<double>((k + 1) * tick) * opt.pace * 1000.0));
      std::this_thread::sleep_until(due);
    }
  }
  if (timeouts > 0) log_warn("plant: " + std::to_string(timeouts) + " telemetry datagrams went unanswered");
  return rec;
}

void merge(RunRecord& rec, const ControllerLog& log) {
  const TimeMs t0 = rec.window.t_start;
  const TimeMs tick = rec.window.tick;
  for (const auto& e : log.entries) {
    const TimeMs idx = (e.telemetry_ms - t0) / tick;
    if (idx < 0 || static_cast<std::size_t>(idx) >= rec.rows.size()) continue;
    RunRow& row = rec.rows[static_cast<std::size_t>(idx)];
    row.solved = e.diag.solved;
    row.optimal = e.diag.optimal;
    row.solve_nodes = e.diag.nodes;
  }
  for (auto& b : rec.batches) {
    for (const auto& e : log.entries) {
      if (e.telemetry_ms == b.answers_ms) b.feasible = e.diag.feasible;
    }
  }
  rec.timings = log.timings;
}

}  // namespace

RunRecord run_networked(const ScenarioConfig& s, const NetworkOptions& opt) {
  UdpSocket plant_sock(opt.plant_port, opt.host);
  UdpSocket ctl_sock(opt.controller_port, opt.host);
  std::atomic<bool> stop{false};
  ControllerLog log;
  std::exception_ptr ctl_error;
  std::thread ctl_thread([&] {
    try {
      log = controller_loop(s, ctl_sock, plant_sock.port(), opt, &stop);
    } catch (...) {
      ctl_error = std::current_exception();
    }
  });
  RunRecord rec;
  try {
    rec = plant_loop(s, plant_sock, ctl_sock.port(), opt);
  } catch (...) {
    stop = true;
    ctl_thread.join();
    throw;
  }
  stop = true;
  ctl_thread.join();
  if (ctl_error) std::rethrow_exception(ctl_error);
  merge(rec, log);
  return rec;
}

RunRecord run_plant_endpoint(const ScenarioConfig& s, const NetworkOptions& opt) {
  UdpSocket sock(opt.plant_port, opt.host);
  return plant_loop(s, sock, opt.controller_port, opt);
}

std::vector<SolveTiming> run_controller_endpoint(const ScenarioConfig& s, const NetworkOptions& opt) {
  UdpSocket sock(opt.controller_port, opt.host);
  return controller_loop(s, sock, opt.plant_port, opt, nullptr).timings;
}

RunRecord run_scenario(const ScenarioConfig& s, RunMode mode, const NetworkOptions& options) {
  return mode == RunMode::Lockstep ? run_lockstep(s) : run_networked(s, options);
}

}  // namespace lshed
