// lshed: run load-shedding experiments, compare runs, export plot data.
//
// Exit codes: 0 ok, 1 validation or usage failure, 2 runtime failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "lshed/log.hpp"
#include "lshed/report.hpp"
#include "lshed/runner.hpp"
#include "lshed/scenario.hpp"

namespace fs = std::filesystem;
using namespace lshed;

namespace {

constexpr int kOk = 0;
constexpr int kValidation = 1;
constexpr int kRuntime = 2;

struct ValidationFailure {
  std::string message;
};

struct ScenarioArgs {
  std::string scenario = "bundled";
  std::string algorithm;
  std::optional<std::uint64_t> seed;
  std::optional<double> tau;
  std::optional<double> loss;
  std::optional<double> latency_ms;
  std::optional<double> jitter_ms;
};

void add_scenario_flags(CLI::App* cmd, ScenarioArgs& a) {
  cmd->add_option("--scenario", a.scenario, "Scenario JSON file, or 'bundled'")->capture_default_str();
  cmd->add_option("--algorithm", a.algorithm, "baseline | advanced (overrides the scenario)");
  cmd->add_option("--seed", a.seed, "Impairment RNG seed");
  cmd->add_option("--tau", a.tau, "Plant actuator time constant, seconds");
  cmd->add_option("--loss", a.loss, "Telemetry loss probability [0, 1]");
  cmd->add_option("--latency-ms", a.latency_ms, "Telemetry one-way latency, ms");
  cmd->add_option("--jitter-ms", a.jitter_ms, "Uniform extra telemetry delay, ms");
}

ScenarioConfig resolve_scenario(const ScenarioArgs& a) {
  ScenarioConfig s;
  if (a.scenario == "bundled") {
    s = bundled_scenario();
  } else {
    try {
      s = load_scenario(a.scenario);
    } catch (const ScenarioError& e) {
      throw ValidationFailure{a.scenario + ": " + e.what()};
    }
  }
  if (!a.algorithm.empty()) {
    auto alg = parse_algorithm(a.algorithm);
    if (!alg) throw ValidationFailure{"unknown algorithm '" + a.algorithm + "'"};
    s.controller.algorithm = *alg;
  }
  if (a.seed) s.impairment.seed = *a.seed;
  if (a.tau) s.tau_s = *a.tau;
  if (a.loss) s.impairment.loss_probability = *a.loss;
  if (a.latency_ms) s.impairment.latency_ms = *a.latency_ms;
  if (a.jitter_ms) s.impairment.jitter_ms = *a.jitter_ms;

  ValidationReport report = validate_scenario(s);
  if (!report.ok()) throw ValidationFailure{"invalid scenario:\n" + report.to_string()};
  return s;
}

// Accepts a run directory or a run.csv path; picks up timing.csv next to it.
RunRecord load_run(const fs::path& p) {
  const fs::path csv = fs::is_directory(p) ? p / "run.csv" : p;
  RunRecord rec;
  try {
    rec = read_run_csv(csv);
  } catch (const RunFormatError& e) {
    throw ValidationFailure{csv.string() + ": " + e.what()};
  }
  const fs::path timing = csv.parent_path() / "timing.csv";
  if (fs::exists(timing)) rec.timings = read_timing_csv(timing);
  return rec;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shipboard load-shedding experiment runner"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Log info messages");

  ScenarioArgs run_args;
  std::string mode = "lockstep";
  std::string role = "both";
  std::string out_dir = "out";
  NetworkOptions net;
  auto* run = app.add_subcommand("run", "Run a closed-loop experiment and write run artifacts");
  add_scenario_flags(run, run_args);
  run->add_option("--mode", mode, "lockstep | networked")->capture_default_str();
  run->add_option("--role", role, "networked only: both | plant | controller")->capture_default_str();
  run->add_option("--out", out_dir, "Output directory")->capture_default_str();
  run->add_option("--pace", net.pace, "networked: wall seconds per simulated second (0 = unpaced)")
      ->capture_default_str();
  run->add_option("--plant-port", net.plant_port, "networked: plant UDP port")->capture_default_str();
  run->add_option("--controller-port", net.controller_port, "networked: controller UDP port")->capture_default_str();

  std::string cmp_a, cmp_b, cmp_out;
  auto* compare = app.add_subcommand("compare", "Compare two runs side by side");
  compare->add_option("run_a", cmp_a, "Run directory or run.csv")->required();
  compare->add_option("run_b", cmp_b, "Run directory or run.csv")->required();
  compare->add_option("--out", cmp_out, "Write the table to this file as well");

  std::string plot_run, plot_out = "plot";
  std::vector<std::string> plot_group_names;
  auto* plot = app.add_subcommand("plot-data", "Write per-group demand / served power series");
  plot->add_option("run", plot_run, "Run directory or run.csv")->required();
  plot->add_option("--group", plot_group_names, "total, ACLC_Vital, ACLC_NonVital, MWClass, IPNC, PMM (default: all)");
  plot->add_option("--out", plot_out, "Output directory")->capture_default_str();

  ScenarioArgs val_args;
  std::string emit;
  auto* validate = app.add_subcommand("validate", "Check a scenario file");
  add_scenario_flags(validate, val_args);
  validate->add_option("--out", emit, "Write the normalized scenario JSON here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }
  if (verbose) log_threshold().store(LogLevel::Info);

  try {
    if (*run) {
      ScenarioConfig s = resolve_scenario(run_args);
      RunMode run_mode;
      if (mode == "lockstep") {
        run_mode = RunMode::Lockstep;
      } else if (mode == "networked") {
        run_mode = RunMode::Networked;
      } else {
        throw ValidationFailure{"unknown mode '" + mode + "'"};
      }
      if (role != "both" && role != "plant" && role != "controller") throw ValidationFailure{"unknown role '" + role + "'"};
      if (role != "both" && run_mode != RunMode::Networked) throw ValidationFailure{"--role requires --mode networked"};

      if (role == "controller") {
        RunRecord rec;
        rec.scenario_name = s.name;
        rec.algorithm = s.controller.algorithm;
        rec.timings = run_controller_endpoint(s, net);
        fs::create_directories(out_dir);
        write_text(fs::path(out_dir) / "timing.csv", timing_csv(rec));
        std::cout << "controller: " << rec.timings.size() << " solves\n";
        return kOk;
      }
      RunRecord rec = role == "plant" ? run_plant_endpoint(s, net) : run_scenario(s, run_mode, net);
      write_artifacts(rec, out_dir);
      std::cout << summary_text(summarize(rec));
      return kOk;
    }

    if (*compare) {
      const std::string table = compare_runs(load_run(cmp_a), load_run(cmp_b));
      std::cout << table;
      if (!cmp_out.empty()) write_text(cmp_out, table);
      return kOk;
    }

    if (*plot) {
      RunRecord rec = load_run(plot_run);
      if (plot_group_names.empty()) plot_group_names = plot_groups();
      fs::create_directories(plot_out);
      for (const auto& g : plot_group_names) {
        GroupSeries series;
        try {
          series = emit_plot_data(rec, g);
        } catch (const UnknownGroupError& e) {
          throw ValidationFailure{e.what()};
        }
        const fs::path path = fs::path(plot_out) / ("group_" + g + ".csv");
        write_text(path, group_csv(series));
        std::cout << path.string() << "\n";
      }
      return kOk;
    }

    if (*validate) {
      ScenarioConfig s = resolve_scenario(val_args);
      if (!emit.empty()) save_scenario(s, emit);
      std::cout << s.name << ": ok (" << s.fleet.size() << " loads, " << s.window.tick_count() << " ticks)\n";
      return kOk;
    }
  } catch (const ValidationFailure& f) {
    std::cerr << "error: " << f.message << "\n";
    return kValidation;
  } catch (const IncompatibleRunsError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return kRuntime;
  }
  return kOk;
}
