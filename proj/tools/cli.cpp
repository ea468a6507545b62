#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <json.hpp>

#include <qmrom/basis.hpp>
#include <qmrom/errors.hpp>
#include <qmrom/integrate.hpp>
#include <qmrom/io.hpp>
#include <qmrom/log.hpp>
#include <qmrom/metrics.hpp>
#include <qmrom/reduction.hpp>
#include <qmrom/scenarios.hpp>

namespace qmrom::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

/// Raised for user-facing configuration problems (exit code 1).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ScenarioSource {
  std::string scenario;
  std::string config;
  std::string probe;
};

void add_source_options(CLI::App& cmd, ScenarioSource& src) {
  auto* s = cmd.add_option("--scenario", src.scenario, "built-in scenario name");
  auto* c = cmd.add_option("--config", src.config, "scenario JSON file");
  s->excludes(c);
  c->excludes(s);
}

Probe parse_probe(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) parts.push_back(item);
  if (parts.size() != 3) throw UsageError("--probe expects \"x,y,component\"");
  Probe p;
  try {
    p.x = std::stod(parts[0]);
    p.y = std::stod(parts[1]);
  } catch (const std::exception&) {
    throw UsageError("--probe: coordinates must be numbers");
  }
  const std::string& c = parts[2];
  if (c == "x" || c == "0") p.component = 0;
  else if (c == "y" || c == "1") p.component = 1;
  else if (c == "rot" || c == "2") p.component = 2;
  else throw UsageError("--probe: component must be x, y, rot or 0..2");
  return p;
}

ScenarioConfig resolve(const ScenarioSource& src) {
  if (src.scenario.empty() == src.config.empty()) {
    throw UsageError("exactly one of --scenario or --config is required");
  }
  ScenarioConfig cfg = src.config.empty() ? builtin_scenario(src.scenario) : load_scenario(src.config);
  if (!src.probe.empty()) cfg.probe = parse_probe(src.probe);
  cfg.validate();
  return cfg;
}

int thread_cap() {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("QMROM_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) return n;
    } catch (const std::exception&) {
    }
    throw UsageError("QMROM_THREADS must be a positive integer");
  }
  return static_cast<int>(hw);
}

json versions() {
  return {{"qmrom", QMROM_VERSION},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
#if defined(__clang__)
          {"compiler", "clang " __clang_version__},
#elif defined(__GNUC__)
          {"compiler", "gcc " __VERSION__},
#else
          {"compiler", "unknown"},
#endif
          {"schema_version", ScenarioConfig::kSchemaVersion}};
}

/// Tracks written files so the metadata only lists what exists.
class Artifacts {
 public:
  explicit Artifacts(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

  template <class Writer>
  void write(const std::string& name, Writer&& writer) {
    const fs::path path = dir_ / name;
    fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw UsageError("cannot write " + path.string());
    writer(out);
    out.close();
    if (!out) throw UsageError("write failed: " + path.string());
    files_.push_back(name);
  }

  void finish(json meta) {
    files_.push_back("run.json");
    meta["files"] = files_;
    std::ofstream out(dir_ / "run.json");
    out << meta.dump(2) << '\n';
    if (!out) throw UsageError("cannot write run.json");
  }

  const fs::path& dir() const { return dir_; }

 private:
  fs::path dir_;
  json files_ = json::array();
};

// Reference trajectories -----------------------------------------------------

struct Reference {
  Trajectory trajectory;
  std::string source;  // "computed" or "cache"
  double seconds = 0.0;
};

Trajectory read_reference(const fs::path& path) {
  std::ifstream in(path);
  const Matrix data = read_matrix(in);
  Trajectory t;
  for (Index k = 0; k < data.cols(); ++k) {
    t.times.push_back(data(0, k));
    t.full.push_back(data.col(k).tail(data.rows() - 1));
  }
  return t;
}

void write_reference(const fs::path& path, const Trajectory& t, const std::string& hash) {
  Matrix data(t.full.front().size() + 1, t.size());
  for (Index k = 0; k < t.size(); ++k) {
    data(0, k) = t.times[static_cast<std::size_t>(k)];
    data.col(k).tail(data.rows() - 1) = t.full[static_cast<std::size_t>(k)];
  }
  fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    write_matrix(out, data, "reference trajectory " + hash + ": row 0 times, then one column per saved state");
  }
  fs::rename(tmp, path);
}

/// Full-model trajectory, cached on disk by scenario hash.
Reference reference_for(const ScenarioConfig& cfg, const StructuralModel& model, const std::string& cache_dir) {
  const std::string hash = scenario_hash(cfg);
  const fs::path path = fs::path(cache_dir) / ("reference-" + hash + ".mat");
  const auto t0 = Clock::now();
  if (!cache_dir.empty() && fs::exists(path)) {
    try {
      return {read_reference(path), "cache", seconds_since(t0)};
    } catch (const InvalidArgument& e) {
      log::warn("ignoring unreadable reference cache " + path.string() + ": " + e.what());
    }
  }
  const Reduction full = build_reduction(model, Method::full, 0);
  Trajectory t = hht_run(*full.system, cfg.integrator);
  if (!t.completed()) {
    throw Error("reference run diverged at t = " + std::to_string(t.diverged_at) + ": " + t.message);
  }
  if (!cache_dir.empty()) write_reference(path, t, hash);
  return {std::move(t), "computed", seconds_since(t0)};
}

// Single simulation ------------------------------------------------------------

struct CellResult {
  Method method = Method::full;
  Index modes = 0;
  Index reduced_dofs = 0;
  Trajectory trajectory;
  Reduction reduction;
  double build_seconds = 0.0;
  double run_seconds = 0.0;
};

CellResult simulate(const ScenarioConfig& cfg, const StructuralModel& model, Method m, Index modes) {
  CellResult r;
  r.method = m;
  r.modes = is_reduced(m) ? modes : 0;
  auto t0 = Clock::now();
  r.reduction = build_reduction(model, m, r.modes);
  r.reduced_dofs = r.reduction.reduced_dofs;
  r.build_seconds = seconds_since(t0);
  t0 = Clock::now();
  r.trajectory = hht_run(*r.reduction.system, cfg.integrator);
  r.run_seconds = seconds_since(t0);
  return r;
}

ErrorReport::Cell error_cell(const CellResult& r, const Trajectory& ref, const SparseMatrix& M) {
  ErrorReport::Cell cell;
  if (r.trajectory.completed()) {
    cell.value = gre_m(r.trajectory, ref, M);
  } else {
    cell.status = "diverged";
    cell.diverged_at = r.trajectory.diverged_at;
  }
  return cell;
}

json status_json(const Trajectory& t) {
  json j = {{"status", t.completed() ? "completed" : "diverged"}, {"saved_states", t.size()}};
  if (!t.completed()) {
    j["diverged_at"] = t.diverged_at;
    j["message"] = t.message;
  }
  if (!t.diagnostics.empty()) j["diagnostics"] = t.diagnostics;
  return j;
}

std::string probe_label(const ScenarioConfig& cfg) {
  static const char* names[] = {"u_x", "u_y", "rot"};
  return names[cfg.probe.component];
}

std::string plot_script_run() {
  return R"(#!/usr/bin/env python3
# Probe trace of this run against the full reference, if present.
import csv, os, sys
import matplotlib.pyplot as plt

def load(name):
    with open(name) as f:
        rows = list(csv.reader(f))
    return rows[0][1], [float(r[0]) for r in rows[1:]], [float(r[1]) for r in rows[1:]]

here = os.path.dirname(os.path.abspath(__file__))
label, t, u = load(os.path.join(here, "probe.csv"))
plt.plot(t, u, label="run")
ref = os.path.join(here, "reference_probe.csv")
if os.path.exists(ref):
    _, tr, ur = load(ref)
    plt.plot(tr, ur, "k--", label="full")
plt.xlabel("t [s]")
plt.ylabel(label + " [m]")
plt.legend()
plt.savefig(os.path.join(here, "probe.png"), dpi=150) if "--save" in sys.argv else plt.show()
)";
}

std::string plot_script_compare() {
  return R"(#!/usr/bin/env python3
# GRE_M against the number of reduced dofs, one line per method.
import csv, os, sys
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
with open(os.path.join(here, "error_report.csv")) as f:
    rows = list(csv.reader(f))
methods = rows[0][1:]
for col, name in enumerate(methods, start=1):
    pts = [(int(r[0]), float(r[col])) for r in rows[1:] if r[col] not in ("", "diverged")]
    if pts:
        plt.semilogy(*zip(*pts), "o-", label=name)
plt.xlabel("reduced dofs")
plt.ylabel("GRE_M")
plt.legend()
plt.savefig(os.path.join(here, "error_report.png"), dpi=150) if "--save" in sys.argv else plt.show()
)";
}

// Subcommands ----------------------------------------------------------------

struct RunOptions {
  ScenarioSource source;
  std::string method;
  Index modes = 0;
  std::string out;
  std::string cache = ".qmrom-cache";
  bool no_reference = false;
};

int cmd_run(const RunOptions& o, std::ostream& out) {
  const auto t_total = Clock::now();
  const ScenarioConfig cfg = resolve(o.source);
  const Method m = parse_method(o.method);
  if (is_reduced(m) && o.modes < 1) throw UsageError("--modes is required for " + o.method);
  const auto model = build_model(cfg);
  const Index probe = probe_dof(*model, cfg);

  const CellResult r = simulate(cfg, *model, m, o.modes);
  Artifacts art(o.out);
  json meta = {{"command", "run"},
               {"scenario", cfg.name},
               {"scenario_hash", scenario_hash(cfg)},
               {"method", method_name(m)},
               {"modes", r.modes},
               {"reduced_dofs", r.reduced_dofs},
               {"full_dofs", model->dofs()},
               {"probe_dof", probe}};
  meta.update(status_json(r.trajectory));
  meta["warnings"] = r.reduction.warnings;

  art.write("trajectory.csv", [&](std::ostream& s) { write_trajectory_csv(s, r.trajectory); });
  art.write("probe.csv", [&](std::ostream& s) { write_probe_csv(s, r.trajectory, probe, probe_label(cfg)); });
  if (r.reduction.singular_values.size() > 0) {
    art.write("singular_values.csv",
              [&](std::ostream& s) { write_singular_values_csv(s, r.reduction.singular_values); });
  }
  if (is_linear_basis(m) && r.reduction.theta && r.trajectory.completed()) {
    try {
      const Amplitudes amp = reconstruct_amplitudes(r.trajectory.times, r.trajectory.full, r.reduction.basis.V,
                                                    *r.reduction.theta, model->mass());
      const CouplingReport rep = coupling_report(amp);
      art.write("coupling.csv", [&](std::ostream& s) { write_coupling_csv(s, rep); });
      meta["coupling_score"] = rep.score;
    } catch (const Error& e) {
      meta["warnings"].push_back(std::string("coupling report skipped: ") + e.what());
    }
  }

  json timings = {{"reduction_s", r.build_seconds}, {"integration_s", r.run_seconds}};
  if (m != Method::full && !o.no_reference) {
    const Reference ref = reference_for(cfg, *model, o.cache);
    art.write("reference_probe.csv",
              [&](std::ostream& s) { write_probe_csv(s, ref.trajectory, probe, probe_label(cfg)); });
    ErrorReport report;
    report.scenario = cfg.name;
    report.dt = cfg.integrator.dt;
    report.t_end = cfg.integrator.t_end;
    report.methods = {std::string(method_name(m))};
    const ErrorReport::Cell cell = error_cell(r, ref.trajectory, model->mass());
    report.add(r.reduced_dofs, report.methods.front(), cell);
    art.write("error_report.csv", [&](std::ostream& s) { report.write_csv(s); });
    meta["gre_m"] = cell.value ? json(*cell.value) : json(nullptr);
    meta["reference"] = ref.source;
    timings["reference_s"] = ref.seconds;
  }
  art.write("plot_probe.py", [&](std::ostream& s) { s << plot_script_run(); });
  timings["total_s"] = seconds_since(t_total);
  meta["timings"] = timings;
  meta["versions"] = versions();
  meta["config"] = json::parse(scenario_to_json(cfg));
  art.finish(std::move(meta));

  out << method_name(m) << ": " << (r.trajectory.completed() ? "completed" : "diverged") << ", "
      << r.reduced_dofs << " dofs";
  if (!r.trajectory.completed()) out << ", diverged at t = " << r.trajectory.diverged_at << " s";
  out << '\n';
  return r.trajectory.completed() ? ExitCode::ok : ExitCode::diverged;
}

struct CompareOptions {
  ScenarioSource source;
  std::vector<std::string> methods;
  std::vector<Index> modes;
  std::string out;
  std::string cache = ".qmrom-cache";
};

int cmd_compare(const CompareOptions& o, std::ostream& out) {
  const auto t_total = Clock::now();
  const ScenarioConfig cfg = resolve(o.source);
  const int cap = thread_cap();

  std::vector<Method> methods;
  if (o.methods.size() == 1 && o.methods.front() == "all") {
    for (Method m : all_methods())
      if (m != Method::full) methods.push_back(m);
  } else if (!o.methods.empty()) {
    for (const auto& name : o.methods) methods.push_back(parse_method(name));
  } else {
    methods = cfg.methods;
  }
  const std::vector<Index> modes = o.modes.empty() ? cfg.mode_counts : o.modes;
  if (methods.empty()) throw UsageError("no methods given");
  if (std::any_of(methods.begin(), methods.end(), is_reduced) &&
      (modes.empty() || std::any_of(modes.begin(), modes.end(), [](Index n) { return n < 1; }))) {
    throw UsageError("--modes must list positive mode counts");
  }

  struct Task {
    Method method;
    Index modes;
  };
  std::vector<Task> tasks;
  for (Method m : methods) {
    if (is_reduced(m)) {
      for (Index n : modes) tasks.push_back({m, n});
    } else {
      tasks.push_back({m, 0});
    }
  }

  const auto model = build_model(cfg);
  const Index probe = probe_dof(*model, cfg);
  const Reference ref = reference_for(cfg, *model, o.cache);

  std::vector<std::optional<CellResult>> results(tasks.size());
  std::vector<std::string> failures(tasks.size());
  std::atomic<std::size_t> next{0};
  const int threads = std::min<int>(cap, static_cast<int>(tasks.size()));
  {
    std::vector<std::jthread> pool;
    for (int w = 0; w < threads; ++w) {
      pool.emplace_back([&] {
        for (std::size_t k; (k = next++) < tasks.size();) {
          try {
            results[k] = simulate(cfg, *model, tasks[k].method, tasks[k].modes);
          } catch (const Error& e) {
            failures[k] = e.what();
          }
        }
      });
    }
  }

  Artifacts art(o.out);
  ErrorReport report;
  report.scenario = cfg.name;
  report.dt = cfg.integrator.dt;
  report.t_end = cfg.integrator.t_end;
  for (Method m : methods) report.methods.emplace_back(method_name(m));
  json cells = json::array();
  for (std::size_t k = 0; k < tasks.size(); ++k) {
    const std::string name(method_name(tasks[k].method));
    json c = {{"method", name}, {"modes", tasks[k].modes}};
    if (!results[k]) {
      c["status"] = "failed";
      c["message"] = failures[k];
      cells.push_back(c);
      out << name << " n=" << tasks[k].modes << ": failed: " << failures[k] << '\n';
      continue;
    }
    const CellResult& r = *results[k];
    const ErrorReport::Cell cell = error_cell(r, ref.trajectory, model->mass());
    report.add(r.reduced_dofs, name, cell);
    const std::string stem = name + "_" + std::to_string(r.modes);
    art.write("probes/" + stem + ".csv",
              [&](std::ostream& s) { write_probe_csv(s, r.trajectory, probe, probe_label(cfg)); });
    if (r.reduction.singular_values.size() > 0) {
      art.write("singular_values/" + stem + ".csv",
                [&](std::ostream& s) { write_singular_values_csv(s, r.reduction.singular_values); });
    }
    c["reduced_dofs"] = r.reduced_dofs;
    c.update(status_json(r.trajectory));
    c["gre_m"] = cell.value ? json(*cell.value) : json(nullptr);
    c["warnings"] = r.reduction.warnings;
    c["timings"] = {{"reduction_s", r.build_seconds}, {"integration_s", r.run_seconds}};
    cells.push_back(c);
    out << name << " n=" << r.modes << " (" << r.reduced_dofs << " dofs): ";
    if (cell.value) out << "GRE_M " << *cell.value << '\n';
    else out << "diverged at t = " << cell.diverged_at << " s\n";
  }
  art.write("error_report.csv", [&](std::ostream& s) { report.write_csv(s); });
  art.write("probes/full.csv", [&](std::ostream& s) { write_probe_csv(s, ref.trajectory, probe, probe_label(cfg)); });
  art.write("plot_errors.py", [&](std::ostream& s) { s << plot_script_compare(); });

  json meta = {{"command", "compare"},
               {"scenario", cfg.name},
               {"scenario_hash", scenario_hash(cfg)},
               {"full_dofs", model->dofs()},
               {"probe_dof", probe},
               {"reference", ref.source},
               {"threads", threads},
               {"cells", cells},
               {"timings", {{"reference_s", ref.seconds}, {"total_s", seconds_since(t_total)}}},
               {"versions", versions()},
               {"config", json::parse(scenario_to_json(cfg))}};
  art.finish(std::move(meta));
  const bool any_failed = std::any_of(results.begin(), results.end(), [](const auto& r) { return !r; });
  return any_failed ? ExitCode::config_error : ExitCode::ok;
}

struct ModesOptions {
  ScenarioSource source;
  Index count = 3;
  std::string out;
};

int cmd_modes(const ModesOptions& o, std::ostream& out) {
  const auto t0 = Clock::now();
  const ScenarioConfig cfg = resolve(o.source);
  const auto model = build_model(cfg);
  const ReductionBasis modes = vibration_modes(*model, o.count);
  const std::vector<double> f = modes.frequencies_hz();
  out << "mode,frequency_hz\n";
  for (std::size_t k = 0; k < f.size(); ++k) out << k + 1 << ',' << f[k] << '\n';
  if (o.out.empty()) return ExitCode::ok;

  Artifacts art(o.out);
  art.write("frequencies.csv", [&](std::ostream& s) {
    s.precision(17);
    s << "mode,frequency_hz\n";
    for (std::size_t k = 0; k < f.size(); ++k) s << k + 1 << ',' << f[k] << '\n';
  });
  art.write("modes.mat", [&](std::ostream& s) {
    write_matrix(s, modes.V, "mass-normalized vibration modes of " + cfg.name + ", one column per mode");
  });
  art.finish({{"command", "modes"},
              {"scenario", cfg.name},
              {"scenario_hash", scenario_hash(cfg)},
              {"full_dofs", model->dofs()},
              {"frequencies_hz", f},
              {"timings", {{"total_s", seconds_since(t0)}}},
              {"versions", versions()},
              {"config", json::parse(scenario_to_json(cfg))}});
  return ExitCode::ok;
}

}  // namespace

int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quadratic-manifold and linear-basis reduced-order simulations"};
  app.require_subcommand(1);
  app.set_version_flag("--version", QMROM_VERSION);

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "simulate one scenario with one method");
  add_source_options(*run_cmd, run.source);
  run_cmd->add_option("--method", run.method, "method name, e.g. QM-SMD")->required();
  run_cmd->add_option("--modes,-n", run.modes, "number of linear modes (reduced methods)");
  run_cmd->add_option("--out", run.out, "output directory")->required();
  run_cmd->add_option("--probe", run.source.probe, "output point \"x,y,component\"");
  run_cmd->add_option("--cache", run.cache, "reference cache directory (empty disables)")->capture_default_str();
  run_cmd->add_flag("--no-reference", run.no_reference, "skip the full reference and GRE_M");

  CompareOptions cmp;
  auto* cmp_cmd = app.add_subcommand("compare", "sweep methods and mode counts against the full model");
  add_source_options(*cmp_cmd, cmp.source);
  cmp_cmd->add_option("--methods", cmp.methods, "method names or \"all\"")->delimiter(',');
  cmp_cmd->add_option("--modes", cmp.modes, "mode counts")->delimiter(',');
  cmp_cmd->add_option("--out", cmp.out, "output directory")->required();
  cmp_cmd->add_option("--probe", cmp.source.probe, "output point \"x,y,component\"");
  cmp_cmd->add_option("--cache", cmp.cache, "reference cache directory (empty disables)")->capture_default_str();

  ModesOptions md;
  auto* modes_cmd = app.add_subcommand("modes", "eigenfrequencies and mode shapes");
  add_source_options(*modes_cmd, md.source);
  modes_cmd->add_option("-n,--count", md.count, "number of modes")->capture_default_str()->check(CLI::PositiveNumber);
  modes_cmd->add_option("--out", md.out, "output directory for frequencies and mode shapes");

  auto* list_cmd = app.add_subcommand("list", "list built-in scenarios");
  std::string show_name;
  auto* show_cmd = app.add_subcommand("show", "print a built-in scenario as JSON");
  show_cmd->add_option("scenario", show_name, "scenario name")->required();

  try {
    std::vector<std::string> rest(args.rbegin(), args.rend());
    if (!rest.empty()) rest.pop_back();  // program name
    app.parse(rest);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ExitCode::ok : ExitCode::config_error;
  }

  try {
    if (*run_cmd) return cmd_run(run, out);
    if (*cmp_cmd) return cmd_compare(cmp, out);
    if (*modes_cmd) return cmd_modes(md, out);
    if (*list_cmd) {
      for (const auto& [name, cfg] : builtin_scenarios()) out << name << '\n';
      return ExitCode::ok;
    }
    if (*show_cmd) {
      out << scenario_to_json(builtin_scenario(show_name)) << '\n';
      return ExitCode::ok;
    }
  } catch (const UsageError& e) {
    err << "qmrom: " << e.what() << '\n';
  } catch (const InvalidArgument& e) {
    err << "qmrom: invalid configuration: " << e.what() << '\n';
  } catch (const NotFound& e) {
    err << "qmrom: " << e.what() << '\n';
  } catch (const std::exception& e) {
    err << "qmrom: " << e.what() << '\n';
  }
  return ExitCode::config_error;
}

}  // namespace qmrom::cli
