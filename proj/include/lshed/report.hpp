#pragma once
//
// Run artifacts: run.csv (one row per tick, versioned header), timing.csv,
// summary.txt, per-group power series and the side-by-side comparison.
//

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "lshed/runner.hpp"

namespace lshed {

inline constexpr int kRunCsvVersion = 1;

class RunFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IncompatibleRunsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnknownGroupError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

std::string run_csv(const RunRecord& record);
void write_run_csv(const RunRecord& record, const std::filesystem::path& path);
// Rows, fleet (id, group, rated power) and window; batches and timings stay empty.
RunRecord parse_run_csv(const std::string& text);
RunRecord read_run_csv(const std::filesystem::path& path);

std::string timing_csv(const RunRecord& record);
std::vector<SolveTiming> read_timing_csv(const std::filesystem::path& path);

struct GroupShed {
  std::size_t loads = 0;      // loads in the group
  std::size_t shed = 0;       // loads commanded below full at least once
  std::size_t curtailed_ticks = 0;
};

struct RunSummary {
  std::string scenario_name;
  Algorithm algorithm = Algorithm::Advanced;
  std::size_t ticks = 0;
  double integral_commanded = 1.0;
  double integral_measured = 1.0;
  double min_instantaneous = 1.0;
  std::map<std::string, GroupShed> groups;  // keyed by group name
  std::size_t commands_sent = 0;
  std::size_t command_batches = 0;
  std::size_t degraded_ticks = 0;
  std::size_t solves = 0;
  std::size_t non_optimal = 0;
  double max_solve_s = 0.0;
  double p99_solve_s = 0.0;
};

// Nearest-rank p99 of solve times; 0 when there are none.
double p99(std::vector<double> values);

RunSummary summarize(const RunRecord& record);
std::string summary_text(const RunSummary& summary);

struct GroupSeries {
  std::string group;
  std::vector<TimeMs> time_ms;
  std::vector<double> demand_w;
  std::vector<double> served_w;    // rated x commanded effective status
  std::vector<double> measured_w;
};

// Group names: total, ACLC_Vital, ACLC_NonVital, MWClass, IPNC, PMM.
std::vector<std::string> plot_groups();
GroupSeries emit_plot_data(const RunRecord& record, const std::string& group);
std::string group_csv(const GroupSeries& series);

// Throws IncompatibleRunsError on differing tick grid or fleet.
std::string compare_runs(const RunRecord& a, const RunRecord& b);

// run.csv, timing.csv, summary.txt and group_<name>.csv under `dir`.
void write_artifacts(const RunRecord& record, const std::filesystem::path& dir);

}  // namespace lshed
