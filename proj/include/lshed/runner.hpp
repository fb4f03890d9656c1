#pragma once
//
// Closed-loop experiment execution. Lockstep mode advances plant and
// controller alternately on one simulated clock; networked mode runs them as
// two loops exchanging datagrams over UDP. Both go through the same codec,
// impairment model and controller code.
//
// Per tick t_k the plant advances to t_k and emits telemetry, the controller
// reacts to whatever telemetry has arrived, the tick is recorded, and the
// resulting ceilings take effect for the step to t_{k+1}.
//

#include <atomic>
#include <cstdint>
#include <string>
#include <vector>

#include "lshed/controller.hpp"
#include "lshed/operability.hpp"
#include "lshed/scenario.hpp"

namespace lshed {

enum class RunMode { Lockstep, Networked };

struct LoadSample {
  double demand = 0.0;     // o*
  double commanded = 1.0;  // ceiling in effect; 0 for a failed load
  double measured_w = 0.0;
  bool operator==(const LoadSample&) const = default;
};

struct RunRow {
  TimeMs time_ms = 0;
  double capacity_w = 0.0;
  double loss_w = 0.0;
  double loading_pu = 0.0;
  double budget_w = 0.0;
  double demand_w = 0.0;    // sum of rated x o*
  double served_w = 0.0;    // sum of rated x effective commanded status
  double measured_w = 0.0;  // sum of measured power
  OperabilityTerms op_commanded;
  OperabilityTerms op_measured;
  bool solved = false;
  bool optimal = true;
  std::uint64_t solve_nodes = 0;
  int commands_sent = 0;
  bool fresh = false;
  bool degraded = false;
  std::vector<LoadSample> loads;  // fleet order
  bool operator==(const RunRow&) const = default;
};

struct CommandBatch {
  TimeMs sent_at_ms = 0;
  TimeMs answers_ms = 0;  // timestamp of the telemetry behind the batch
  std::uint32_t seq = 0;
  bool resend = false;
  bool feasible = true;
  std::vector<ShedCommand> commands;
};

struct SolveTiming {
  TimeMs time_ms = 0;
  double solve_time_s = 0.0;
  std::uint64_t nodes = 0;
  bool optimal = true;
};

struct RunRecord {
  std::string scenario_name;
  Algorithm algorithm = Algorithm::Advanced;
  Fleet fleet;
  MissionWindow window;
  std::vector<RunRow> rows;
  // Populated by the runners; not persisted in run.csv.
  std::vector<CommandBatch> batches;
  std::vector<SolveTiming> timings;
};

struct NetworkOptions {
  std::uint16_t plant_port = 47001;       // plant listens here for commands
  std::uint16_t controller_port = 47002;  // controller listens here for telemetry
  std::string host = "127.0.0.1";
  double pace = 0.0;            // wall seconds per simulated second; 0 runs as fast as replies allow
  int reply_timeout_ms = 1000;  // plant wait for the answer to a telemetry datagram
  int idle_timeout_ms = 5000;   // controller gives up after this long without telemetry
};

RunRecord run_lockstep(const ScenarioConfig& scenario);

// Both halves in this process, on separate threads, talking only via UDP.
RunRecord run_networked(const ScenarioConfig& scenario, const NetworkOptions& options);

// Separate-process halves. The plant half returns the run record without
// solver diagnostics; the controller half returns its solve timings.
RunRecord run_plant_endpoint(const ScenarioConfig& scenario, const NetworkOptions& options);
std::vector<SolveTiming> run_controller_endpoint(const ScenarioConfig& scenario, const NetworkOptions& options);

RunRecord run_scenario(const ScenarioConfig& scenario, RunMode mode, const NetworkOptions& options = {});

}  // namespace lshed
