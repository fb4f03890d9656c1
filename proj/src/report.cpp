#include "lshed/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace lshed {

namespace {

void put(std::string& out, double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

void put(std::string& out, long long v) {
  char buf[24];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

void put_time(std::string& out, TimeMs t) { put(out, to_seconds(t)); }

double get_double(std::string_view s, std::size_t line) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw RunFormatError("line " + std::to_string(line) + ": bad number '" + std::string(s) + "'");
  return v;
}

long long get_int(std::string_view s, std::size_t line) {
  long long v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw RunFormatError("line " + std::to_string(line) + ": bad integer '" + std::string(s) + "'");
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

const std::vector<std::string>& fixed_columns() {
  static const std::vector<std::string> cols = {
      "time_s",      "capacity_w",  "loss_w",      "loading_pu", "budget_w",     "demand_w",
      "served_w",    "measured_w",  "op_num_cmd",  "op_num_meas", "op_den",      "op_cmd",
      "op_meas",     "op_vacuous",  "solved",      "optimal",    "solve_nodes",  "commands_sent",
      "fresh",       "degraded"};
  return cols;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string fmt(double v, int digits = 6) {
  std::ostringstream ss;
  ss.setf(std::ios::fixed);
  ss.precision(digits);
  ss << v;
  return ss.str();
}

}  // namespace

std::string run_csv(const RunRecord& rec) {
  std::string out;
  out.reserve(rec.rows.size() * (200 + rec.fleet.size() * 40));
  out += "# lshed-run v" + std::to_string(kRunCsvVersion) + " algorithm=" + std::string(to_string(rec.algorithm)) +
         " t_start_ms=" + std::to_string(rec.window.t_start) + " t_end_ms=" + std::to_string(rec.window.t_end) +
         " tick_ms=" + std::to_string(rec.window.tick) + " scenario=" + rec.scenario_name + "\n";
  out += "# fleet";
  for (const auto& l : rec.fleet) {
    out += ' ' + std::to_string(l.id) + ':' + std::string(to_string(l.group)) + ':';
    put(out, l.rated_power_w);
  }
  out += '\n';

  const auto& cols = fixed_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out += (i ? "," : "") + cols[i];
  for (const auto& l : rec.fleet) {
    const std::string id = std::to_string(l.id);
    out += ",d_" + id + ",c_" + id + ",p_" + id;
  }
  out += '\n';

  for (const auto& r : rec.rows) {
    put_time(out, r.time_ms);
    for (double v : {r.capacity_w, r.loss_w, r.loading_pu, r.budget_w, r.demand_w, r.served_w, r.measured_w,
                     r.op_commanded.numerator, r.op_measured.numerator, r.op_commanded.denominator,
                     r.op_commanded.value(), r.op_measured.value()}) {
      out += ',';
      put(out, v);
    }
    for (long long v : {static_cast<long long>(r.op_commanded.vacuous()), static_cast<long long>(r.solved),
                        static_cast<long long>(r.optimal), static_cast<long long>(r.solve_nodes),
                        static_cast<long long>(r.commands_sent), static_cast<long long>(r.fresh),
                        static_cast<long long>(r.degraded)}) {
      out += ',';
      put(out, v);
    }
    for (const auto& l : r.loads) {
      out += ',';
      put(out, l.demand);
      out += ',';
      put(out, l.commanded);
      out += ',';
      put(out, l.measured_w);
    }
    out += '\n';
  }
  return out;
}

void write_run_csv(const RunRecord& record, const std::filesystem::path& path) { write_file(path, run_csv(record)); }

RunRecord parse_run_csv(const std::string& text) {
  RunRecord rec;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;

  auto next = [&]() -> bool {
    ++lineno;
    if (!std::getline(in, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };

  if (!next() || line.rfind("# lshed-run v", 0) != 0) throw RunFormatError("missing run header");
  {
    std::string_view h(line);
    auto scen = h.find(" scenario=");
    if (scen != std::string_view::npos) rec.scenario_name = std::string(h.substr(scen + 10));
    for (auto tok : split(h.substr(0, scen), ' ')) {
      auto eq = tok.find('=');
      if (tok.rfind("v", 0) == 0 && eq == std::string_view::npos) {
        if (get_int(tok.substr(1), lineno) != kRunCsvVersion) throw RunFormatError("unsupported run.csv version");
        continue;
      }
      if (eq == std::string_view::npos) continue;
      auto key = tok.substr(0, eq);
      auto val = tok.substr(eq + 1);
      if (key == "algorithm") {
        auto a = parse_algorithm(val);
        if (!a) throw RunFormatError("unknown algorithm '" + std::string(val) + "'");
        rec.algorithm = *a;
      } else if (key == "t_start_ms") {
        rec.window.t_start = get_int(val, lineno);
      } else if (key == "t_end_ms") {
        rec.window.t_end = get_int(val, lineno);
      } else if (key == "tick_ms") {
        rec.window.tick = get_int(val, lineno);
      }
    }
  }
  if (!next() || line.rfind("# fleet", 0) != 0) throw RunFormatError("missing fleet line");
  for (auto tok : split(std::string_view(line).substr(7), ' ')) {
    if (tok.empty()) continue;
    auto parts = split(tok, ':');
    if (parts.size() != 3) throw RunFormatError("bad fleet entry '" + std::string(tok) + "'");
    LoadSpec spec;
    spec.id = static_cast<LoadId>(get_int(parts[0], lineno));
    auto g = parse_group(parts[1]);
    if (!g) throw RunFormatError("unknown group '" + std::string(parts[1]) + "'");
    spec.group = *g;
    spec.rated_power_w = get_double(parts[2], lineno);
    rec.fleet.push_back(spec);
  }

  if (!next()) throw RunFormatError("missing column header");
  const auto& cols = fixed_columns();
  const std::size_t width = cols.size() + 3 * rec.fleet.size();
  if (split(line, ',').size() != width) throw RunFormatError("column count does not match fleet");

  while (next()) {
    if (line.empty()) continue;
    auto f = split(line, ',');
    if (f.size() != width) throw RunFormatError("line " + std::to_string(lineno) + ": wrong field count");
    RunRow r;
    r.time_ms = to_millis(get_double(f[0], lineno));
    r.capacity_w = get_double(f[1], lineno);
    r.loss_w = get_double(f[2], lineno);
    r.loading_pu = get_double(f[3], lineno);
    r.budget_w = get_double(f[4], lineno);
    r.demand_w = get_double(f[5], lineno);
    r.served_w = get_double(f[6], lineno);
    r.measured_w = get_double(f[7], lineno);
    r.op_commanded.numerator = get_double(f[8], lineno);
    r.op_measured.numerator = get_double(f[9], lineno);
    r.op_commanded.denominator = r.op_measured.denominator = get_double(f[10], lineno);
    r.solved = get_int(f[14], lineno) != 0;
    r.optimal = get_int(f[15], lineno) != 0;
    r.solve_nodes = static_cast<std::uint64_t>(get_int(f[16], lineno));
    r.commands_sent = static_cast<int>(get_int(f[17], lineno));
    r.fresh = get_int(f[18], lineno) != 0;
    r.degraded = get_int(f[19], lineno) != 0;
    for (std::size_t i = 0; i < rec.fleet.size(); ++i) {
      const std::size_t b = cols.size() + 3 * i;
      r.loads.push_back({get_double(f[b], lineno), get_double(f[b + 1], lineno), get_double(f[b + 2], lineno)});
    }
    rec.rows.push_back(std::move(r));
  }
  return rec;
}

RunRecord read_run_csv(const std::filesystem::path& path) { return parse_run_csv(read_file(path)); }

std::string timing_csv(const RunRecord& rec) {
  std::string out = "time_s,solve_time_s,nodes,optimal\n";
  for (const auto& t : rec.timings) {
    put_time(out, t.time_ms);
    out += ',';
    put(out, t.solve_time_s);
    out += ',';
    put(out, static_cast<long long>(t.nodes));
    out += t.optimal ? ",1\n" : ",0\n";
  }
  return out;
}

std::vector<SolveTiming> read_timing_csv(const std::filesystem::path& path) {
  std::vector<SolveTiming> out;
  std::istringstream in(read_file(path));
  std::string line;
  std::size_t lineno = 1;
  std::getline(in, line);
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto f = split(line, ',');
    if (f.size() != 4) throw RunFormatError("timing.csv line " + std::to_string(lineno) + ": wrong field count");
    out.push_back({to_millis(get_double(f[0], lineno)), get_double(f[1], lineno),
                   static_cast<std::uint64_t>(get_int(f[2], lineno)), get_int(f[3], lineno) != 0});
  }
  return out;
}

double p99(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const auto rank = static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(values.size())));
  return values[std::max<std::size_t>(rank, 1) - 1];
}

RunSummary summarize(const RunRecord& rec) {
  RunSummary s;
  s.scenario_name = rec.scenario_name;
  s.algorithm = rec.algorithm;
  s.ticks = rec.rows.size();

  std::vector<TimedTerms> cmd, meas;
  cmd.reserve(rec.rows.size());
  meas.reserve(rec.rows.size());
  for (const auto& r : rec.rows) {
    cmd.push_back({r.time_ms, r.op_commanded});
    meas.push_back({r.time_ms, r.op_measured});
    s.min_instantaneous = std::min(s.min_instantaneous, r.op_commanded.value());
    s.commands_sent += static_cast<std::size_t>(r.commands_sent);
    if (r.fresh || r.degraded) ++s.command_batches;
    if (r.degraded) ++s.degraded_ticks;
  }
  s.integral_commanded = integral_operability(cmd, rec.window);
  s.integral_measured = integral_operability(meas, rec.window);

  for (LoadGroup g : kAllGroups) s.groups[std::string(to_string(g))];
  for (std::size_t i = 0; i < rec.fleet.size(); ++i) {
    GroupShed& gs = s.groups[std::string(to_string(rec.fleet[i].group))];
    ++gs.loads;
    bool shed = false;
    for (const auto& r : rec.rows) {
      const LoadSample& l = r.loads[i];
      if (l.commanded < 1.0) shed = true;
      if (l.commanded < l.demand) ++gs.curtailed_ticks;
    }
    if (shed) ++gs.shed;
  }

  std::vector<double> times;
  for (const auto& t : rec.timings) {
    times.push_back(t.solve_time_s);
    if (!t.optimal) ++s.non_optimal;
  }
  s.solves = times.size();
  if (!times.empty()) s.max_solve_s = *std::max_element(times.begin(), times.end());
  s.p99_solve_s = p99(std::move(times));
  return s;
}

std::string summary_text(const RunSummary& s) {
  std::ostringstream out;
  out << "scenario                 " << s.scenario_name << "\n"
      << "algorithm                " << to_string(s.algorithm) << "\n"
      << "ticks                    " << s.ticks << "\n"
      << "integral_operability     " << fmt(s.integral_commanded) << "\n"
      << "integral_operability_measured " << fmt(s.integral_measured) << "\n"
      << "min_instantaneous        " << fmt(s.min_instantaneous) << "\n"
      << "solves                   " << s.solves << "\n"
      << "non_optimal_solves       " << s.non_optimal << "\n"
      << "solve_time_max_ms        " << fmt(s.max_solve_s * 1e3, 3) << "\n"
      << "solve_time_p99_ms        " << fmt(s.p99_solve_s * 1e3, 3) << "\n"
      << "command_batches          " << s.command_batches << "\n"
      << "commands_sent            " << s.commands_sent << "\n"
      << "degraded_ticks           " << s.degraded_ticks << "\n";
  for (const auto& [name, g] : s.groups) {
    out << "shed " << name << " " << g.shed << "/" << g.loads << " curtailed_ticks " << g.curtailed_ticks << "\n";
  }
  return out.str();
}

std::vector<std::string> plot_groups() {
  std::vector<std::string> out = {"total"};
  for (LoadGroup g : kAllGroups) out.emplace_back(to_string(g));
  return out;
}

GroupSeries emit_plot_data(const RunRecord& rec, const std::string& group) {
  std::optional<LoadGroup> only;
  if (group != "total") {
    only = parse_group(group);
    if (!only) throw UnknownGroupError("unknown group '" + group + "'");
  }
  GroupSeries out;
  out.group = group;
  for (const auto& r : rec.rows) {
    double d = 0.0, sv = 0.0, m = 0.0;
    for (std::size_t i = 0; i < rec.fleet.size(); ++i) {
      if (only && rec.fleet[i].group != *only) continue;
      const double rated = rec.fleet[i].rated_power_w;
      const LoadSample& l = r.loads[i];
      d += rated * l.demand;
      sv += rated * std::min(l.commanded, l.demand);
      m += l.measured_w;
    }
    out.time_ms.push_back(r.time_ms);
    out.demand_w.push_back(d);
    out.served_w.push_back(sv);
    out.measured_w.push_back(m);
  }
  return out;
}

std::string group_csv(const GroupSeries& g) {
  std::string out = "time_s,demand_w,served_w,measured_w\n";
  for (std::size_t k = 0; k < g.time_ms.size(); ++k) {
    put_time(out, g.time_ms[k]);
    out += ',';
    put(out, g.demand_w[k]);
    out += ',';
    put(out, g.served_w[k]);
    out += ',';
    put(out, g.measured_w[k]);
    out += '\n';
  }
  return out;
}

std::string compare_runs(const RunRecord& a, const RunRecord& b) {
  if (a.window.tick != b.window.tick || a.window.t_start != b.window.t_start || a.rows.size() != b.rows.size())
    throw IncompatibleRunsError("runs do not share a tick grid");
  for (std::size_t k = 0; k < a.rows.size(); ++k) {
    if (a.rows[k].time_ms != b.rows[k].time_ms) throw IncompatibleRunsError("runs do not share a tick grid");
  }
  if (a.fleet.size() != b.fleet.size()) throw IncompatibleRunsError("runs have different fleet sizes");
  for (std::size_t i = 0; i < a.fleet.size(); ++i) {
    if (a.fleet[i].id != b.fleet[i].id || a.fleet[i].group != b.fleet[i].group ||
        a.fleet[i].rated_power_w != b.fleet[i].rated_power_w)
      throw IncompatibleRunsError("runs have different fleets (load " + std::to_string(a.fleet[i].id) + ")");
  }

  const RunSummary sa = summarize(a);
  const RunSummary sb = summarize(b);
  std::ostringstream out;
  auto row = [&](const std::string& metric, double va, double vb, int digits) {
    out << metric << std::string(metric.size() < 30 ? 30 - metric.size() : 1, ' ') << fmt(va, digits) << "  "
        << fmt(vb, digits) << "  " << fmt(vb - va, digits) << "\n";
  };
  out << "metric" << std::string(24, ' ') << "a (" << to_string(sa.algorithm) << ")  b (" << to_string(sb.algorithm)
      << ")  delta\n";
  row("integral_operability", sa.integral_commanded, sb.integral_commanded, 6);
  row("integral_operability_measured", sa.integral_measured, sb.integral_measured, 6);
  row("min_instantaneous", sa.min_instantaneous, sb.min_instantaneous, 6);
  row("solve_time_p99_ms", sa.p99_solve_s * 1e3, sb.p99_solve_s * 1e3, 3);
  row("solve_time_max_ms", sa.max_solve_s * 1e3, sb.max_solve_s * 1e3, 3);
  row("command_batches", double(sa.command_batches), double(sb.command_batches), 0);
  row("commands_sent", double(sa.commands_sent), double(sb.commands_sent), 0);
  row("degraded_ticks", double(sa.degraded_ticks), double(sb.degraded_ticks), 0);
  for (const auto& [name, ga] : sa.groups) {
    const GroupShed& gb = sb.groups.at(name);
    row("shed_" + name, double(ga.shed), double(gb.shed), 0);
    row("curtailed_ticks_" + name, double(ga.curtailed_ticks), double(gb.curtailed_ticks), 0);
  }
  return out.str();
}

void write_artifacts(const RunRecord& rec, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_run_csv(rec, dir / "run.csv");
  write_file(dir / "timing.csv", timing_csv(rec));
  write_file(dir / "summary.txt", summary_text(summarize(rec)));
  for (const auto& g : plot_groups()) write_file(dir / ("group_" + g + ".csv"), group_csv(emit_plot_data(rec, g)));
}

}  // namespace lshed
