#include "dmpc/cli/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "dmpc/cli/config_file.hpp"
#include "dmpc/cli/daemon.hpp"
#include "dmpc/cli/format.hpp"
#include "dmpc/cli/model_file.hpp"
#include "dmpc/cli/telemetry_csv.hpp"
#include "dmpc/cli/trace_io.hpp"
#include "dmpc/identify.hpp"
#include "dmpc/kernels.hpp"
#include "dmpc/mpc.hpp"
#include "dmpc/sim.hpp"
#include "json.hpp"

namespace dmpc::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InsufficientData:
    case ErrorCode::DegenerateSweep:
      return kExitInsufficientData;
    case ErrorCode::NonFiniteObjective:
      return kExitFailure;
    default:
      return kExitInput;
  }
}

template <class Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Schema, "cannot open " + path.string());
  return in;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Schema, "cannot write " + path.string());
  return out;
}

std::string opt_path(const std::optional<fs::path>& p) { return p ? p->string() : std::string(); }

ScenarioConfig require_config(const CommonOptions& opt) {
  if (!opt.config) throw Error(ErrorCode::Schema, "--config is required", "config");
  return load_config(*opt.config);
}

ModelSet require_model(const CommonOptions& opt) {
  if (!opt.model) throw Error(ErrorCode::Schema, "--model is required", "model");
  return load_models(*opt.model);
}

// Records what a run used; resolved.cfg, when written, re-runs it exactly.
void write_manifest(const CommonOptions& opt, std::string_view command, const json& inputs,
                    std::optional<std::uint64_t> seed, const std::vector<std::string>& outputs,
                    const std::optional<ScenarioConfig>& resolved) {
  fs::create_directories(opt.out_dir);
  json manifest = {{"tool", "dmpc"},
                   {"version", kVersion},
                   {"command", command},
                   {"config_path", opt_path(opt.config)},
                   {"model_path", opt_path(opt.model)},
                   {"inputs", inputs},
                   {"output_dir", opt.out_dir.string()},
                   {"outputs", outputs},
                   {"model_format", {{"name", kModelFormat}, {"version", kModelVersion}}},
                   {"kernel", to_string(kernels::active_isa())}};
  manifest["seed"] = seed ? json(*seed) : json(nullptr);
  if (resolved) {
    const std::string text = emit_config(*resolved);
    open_output(opt.out_dir / "resolved.cfg") << text;
    manifest["resolved_config"] = "resolved.cfg";
    manifest["parameters"] = text;
  }
  open_output(opt.out_dir / "manifest.json") << manifest.dump(2) << '\n';
}

void print_fit(std::ostream& out, OutputFormat format, const char* name, const FitReport& r) {
  if (format == OutputFormat::Csv) {
    out << name << ',' << fmt6(r.rmse) << ',' << r.n_samples << ',' << r.rank << ','
        << (r.condition_warning ? 1 : 0) << '\n';
  } else {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-4s rmse=%-12s samples=%-6zu rank=%-3zu%s\n", name,
                  fmt6(r.rmse).c_str(), r.n_samples, r.rank,
                  r.condition_warning ? " condition_warning" : "");
    out << buf;
  }
}

}  // namespace

int cmd_identify(const fs::path& telemetry, const CommonOptions& opt, std::ostream& out,
                 std::ostream& err) {
  return guarded(err, [&] {
    const OutputFormat format = opt.format.value_or(OutputFormat::Text);
    auto in = open_input(telemetry);
    const TelemetryTable table = read_telemetry(in, telemetry.string());
    const DlFit dl = fit_dl_model(table);
    const IdtFit idt = fit_idt_coeffs(table);
    const AmiFit ami = fit_ami_model(table);
    const ModelSet models{dl.model, idt.model, ami.model};
    models.validate();

    const fs::path model_path = opt.model ? *opt.model : opt.out_dir / "model.json";
    if (model_path.has_parent_path()) fs::create_directories(model_path.parent_path());
    save_models(model_path, models);

    if (format == OutputFormat::Csv) out << "model,rmse,n_samples,rank,condition_warning\n";
    print_fit(out, format, "dl", dl.report);
    print_fit(out, format, "idt", idt.report);
    print_fit(out, format, "ami", ami.report);

    write_manifest(opt, "identify", {{"telemetry", telemetry.string()}}, std::nullopt,
                   {model_path.string()}, std::nullopt);
    return static_cast<int>(kExitOk);
  });
}

int cmd_solve(const fs::path& snapshot_path, const CommonOptions& opt, std::ostream& out,
              std::ostream& err) {
  return guarded(err, [&] {
    ScenarioConfig sc = require_config(opt);
    const ModelSet models = require_model(opt);
    if (opt.seed) sc.de.seed = *opt.seed;
    const OutputFormat format = opt.format.value_or(OutputFormat::Csv);
    auto in = open_input(snapshot_path);
    const StateSnapshot snapshot = read_snapshot(in, snapshot_path.string());

    const MpcSolution sol = solve(models, snapshot, sc.mpc, sc.de);
    const auto& temps = sol.schedule.temp_setpoints();
    const auto& illums = sol.schedule.illum_setpoints();
    if (format == OutputFormat::Csv) {
      out << "# mode=" << to_string(sc.mpc.mode) << " objective=" << fmt6(sol.objective_value)
          << " violation=" << fmt6(sol.violation)
          << " feasible=" << (sol.feasible ? "true" : "false") << '\n'
          << "step,t_set_c,l_set_lx\n";
      for (std::size_t t = 0; t < temps.size(); ++t) {
        out << t + 1 << ',' << fmt6(temps[t]) << ',' << fmt6(illums[t]) << '\n';
      }
    } else {
      out << "mode       " << to_string(sc.mpc.mode) << '\n'
          << "objective  " << fmt6(sol.objective_value) << '\n'
          << "violation  " << fmt6(sol.violation) << '\n'
          << "feasible   " << (sol.feasible ? "yes" : "no") << '\n'
          << "step  t_set_c   l_set_lx\n";
      for (std::size_t t = 0; t < temps.size(); ++t) {
        char buf[80];
        std::snprintf(buf, sizeof buf, "%-5zu %-9s %s\n", t + 1, fmt6(temps[t]).c_str(),
                      fmt6(illums[t]).c_str());
        out << buf;
      }
    }
    if (!sol.feasible) err << "warning: no schedule satisfies the comfort cap\n";

    write_manifest(opt, "solve", {{"snapshot", snapshot_path.string()}}, sc.de.seed, {}, sc);
    return static_cast<int>(sol.feasible ? kExitOk : kExitInfeasible);
  });
}

int cmd_simulate(const CommonOptions& opt, const std::optional<std::string>& mode,
                 std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const OutputFormat format = opt.format.value_or(OutputFormat::Text);
    ScenarioConfig sc = require_config(opt);
    if (mode) {
      const auto m = parse_control_mode(*mode);
      if (!m) throw Error(ErrorCode::Schema, "unknown mode '" + *mode + "'", "mode");
      sc.mpc.mode = *m;
    }
    if (opt.seed) sc.seed = *opt.seed;
    if (opt.model) {
      sc.controller_models = load_models(*opt.model);
      sc.model_mismatch = true;
    }
    sc.validate();
    const SimResult result = run_scenario(sc);

    fs::create_directories(opt.out_dir);
    {
      auto trace = open_output(opt.out_dir / "trace.csv");
      write_trace(trace, result.trace);
      auto metrics = open_output(opt.out_dir / "metrics.csv");
      write_metrics(metrics, result.trace, result.metrics);
      auto telemetry = open_output(opt.out_dir / "telemetry.csv");
      write_telemetry(telemetry, result.telemetry);
      auto samples = open_output(opt.out_dir / "samples.jsonl");
      write_samples(samples, result.samples, sc.mpc.step_hours, sc.plant.substeps,
                    default_origin());
    }
    save_models(opt.out_dir / "controller_model.json",
                sc.model_mismatch ? sc.controller_models : sc.plant.truth);

    const Metrics& m = result.metrics;
    if (format == OutputFormat::Csv) {
      write_metrics(out, result.trace, m);
    } else {
      out << "mode                    " << to_string(sc.mpc.mode) << '\n'
          << "seed                    " << sc.seed << '\n'
          << "steps                   " << sc.steps << '\n'
          << "mean_dl                 " << fmt6(m.mean_dl) << '\n'
          << "comfort_violation_rate  " << fmt6(m.comfort_violation_rate) << '\n'
          << "mean_abs_temp_dev       " << fmt6(m.mean_abs_temp_dev) << '\n'
          << "mean_abs_illum_dev      " << fmt6(m.mean_abs_illum_dev) << '\n'
          << "setpoint_change_count   " << m.setpoint_change_count << '\n';
    }

    write_manifest(opt, "simulate", json::object(), sc.seed,
                   {"trace.csv", "metrics.csv", "telemetry.csv", "samples.jsonl",
                    "controller_model.json"},
                   sc);
    return static_cast<int>(kExitOk);
  });
}

int cmd_report(const std::vector<fs::path>& traces, const CommonOptions& opt, std::ostream& out,
               std::ostream& err) {
  return guarded(err, [&] {
    const OutputFormat format = opt.format.value_or(OutputFormat::Text);
    if (traces.empty()) throw Error(ErrorCode::Schema, "report needs at least one trace");

    struct Run {
      std::uint64_t seed;
      Metrics metrics;
    };
    std::vector<std::string> arm_order;
    std::map<std::string, std::vector<Run>> arms;
    std::optional<SimTrace> first;
    for (const auto& path : traces) {
      auto in = open_input(path);
      SimTrace trace = read_trace(in, path.string());
      if (!first) {
        first = trace;
      } else if (trace.workers != first->workers ||
                 trace.comfort.temp_comfort != first->comfort.temp_comfort ||
                 trace.comfort.illum_comfort != first->comfort.illum_comfort ||
                 trace.comfort.p_temp != first->comfort.p_temp ||
                 trace.comfort.p_illum != first->comfort.p_illum ||
                 trace.comfort.penalty_cap != first->comfort.penalty_cap) {
        throw Error(ErrorCode::Schema,
                    path.string() + ": workers or comfort parameters differ from " +
                        traces.front().string());
      }
      const std::string arm(to_string(trace.mode));
      auto& runs = arms[arm];
      if (runs.empty()) arm_order.push_back(arm);
      if (std::any_of(runs.begin(), runs.end(),
                      [&](const Run& r) { return r.seed == trace.seed; })) {
        throw Error(ErrorCode::Schema,
                    path.string() + ": duplicate " + arm + " run for seed " +
                        std::to_string(trace.seed));
      }
      runs.push_back({trace.seed, compute_metrics(trace)});
    }

    const std::string ref = arms.count("NOC") ? "NOC" : arm_order.front();
    auto seeds_of = [&](const std::string& arm) {
      std::set<std::uint64_t> s;
      for (const auto& r : arms[arm]) s.insert(r.seed);
      return s;
    };
    bool paired = arm_order.size() > 1;
    for (const auto& arm : arm_order) paired = paired && seeds_of(arm) == seeds_of(ref);
    if (arm_order.size() > 1 && !paired) {
      err << "warning: arms were not run on the same seeds; deltas omitted\n";
    }

    auto mean_of = [](const std::vector<Run>& runs, auto field) {
      double s = 0.0;
      for (const auto& r : runs) s += field(r.metrics);
      return s / static_cast<double>(runs.size());
    };
    auto delta_of = [&](const std::string& arm) {
      std::map<std::uint64_t, double> ref_dl;
      for (const auto& r : arms[ref]) ref_dl[r.seed] = r.metrics.mean_dl;
      double s = 0.0;
      for (const auto& r : arms[arm]) s += r.metrics.mean_dl - ref_dl.at(r.seed);
      return s / static_cast<double>(arms[arm].size());
    };

    std::ostringstream table;
    if (format == OutputFormat::Csv) {
      table << "arm,runs,mean_dl,comfort_violation_rate,mean_abs_temp_dev,mean_abs_illum_dev,"
               "setpoint_change_count";
      if (paired) table << ",delta_mean_dl_vs_" << ref;
      table << '\n';
    } else {
      char buf[200];
      std::snprintf(buf, sizeof buf, "%-6s %5s %10s %15s %10s %10s %10s", "arm", "runs",
                    "mean_dl", "violation_rate", "temp_dev", "illum_dev", "changes");
      table << buf;
      if (paired) table << "  delta_dl_vs_" << ref;
      table << '\n';
    }
    for (const auto& arm : arm_order) {
      const auto& runs = arms[arm];
      const double dl = mean_of(runs, [](const Metrics& m) { return m.mean_dl; });
      const double viol = mean_of(runs, [](const Metrics& m) { return m.comfort_violation_rate; });
      const double tdev = mean_of(runs, [](const Metrics& m) { return m.mean_abs_temp_dev; });
      const double ldev = mean_of(runs, [](const Metrics& m) { return m.mean_abs_illum_dev; });
      const double changes = mean_of(
          runs, [](const Metrics& m) { return static_cast<double>(m.setpoint_change_count); });
      if (format == OutputFormat::Csv) {
        table << arm << ',' << runs.size() << ',' << fmt6(dl) << ',' << fmt6(viol) << ','
              << fmt6(tdev) << ',' << fmt6(ldev) << ',' << fmt6(changes);
        if (paired) table << ',' << fmt6(delta_of(arm));
      } else {
        char buf[200];
        std::snprintf(buf, sizeof buf, "%-6s %5zu %10s %15s %10s %10s %10s", arm.c_str(),
                      runs.size(), fmt6(dl).c_str(), fmt6(viol).c_str(), fmt6(tdev).c_str(),
                      fmt6(ldev).c_str(), fmt6(changes).c_str());
        table << buf;
        if (paired) table << "  " << fmt6(delta_of(arm));
      }
      table << '\n';
    }
    out << table.str();

    json inputs = json::array();
    for (const auto& p : traces) inputs.push_back(p.string());
    write_manifest(opt, "report", {{"traces", inputs}}, std::nullopt, {}, std::nullopt);
    return static_cast<int>(kExitOk);
  });
}

int cmd_daemon(const CommonOptions& opt, std::istream& in, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    ScenarioConfig sc = require_config(opt);
    const ModelSet models = require_model(opt);
    if (opt.seed) sc.de.seed = *opt.seed;
    write_manifest(opt, "daemon", {{"stream", "stdin"}}, sc.de.seed, {}, sc);
    const DaemonStats stats = run_daemon(models, sc.mpc, sc.de, in, out);
    if (stats.malformed > 0) {
      err << "warning: skipped " << stats.malformed << " malformed line(s)\n";
    }
    return static_cast<int>(kExitOk);
  });
}

int run_cli(int argc, const char* const* argv, std::istream& in, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Drowsiness-minimizing MPC for office air conditioning and lighting", "dmpc"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  CommonOptions opt;
  std::string config, model, out_dir = ".", format;
  std::uint64_t seed = 0;
  std::vector<CLI::Option*> seed_options;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config, "scenario / controller config file");
    cmd->add_option("--model", model, "model file (JSON)");
    seed_options.push_back(cmd->add_option("--seed", seed, "seed override"));
    cmd->add_option("--out-dir", out_dir, "directory for outputs and the run manifest");
    cmd->add_option("--format", format, "stdout format")
        ->check(CLI::IsMember({"csv", "text"}));
  };

  std::string telemetry, snapshot;
  std::optional<std::string> mode;
  std::vector<std::string> traces;

  auto* identify = app.add_subcommand("identify", "fit models from telemetry CSV");
  add_common(identify);
  identify->add_option("telemetry", telemetry, "telemetry CSV")->required();

  auto* solve_cmd = app.add_subcommand("solve", "one-shot solve for a state snapshot");
  add_common(solve_cmd);
  solve_cmd->add_option("snapshot", snapshot, "snapshot CSV")->required();

  auto* simulate = app.add_subcommand("simulate", "closed-loop scenario run");
  add_common(simulate);
  simulate->add_option("--mode", mode, "override the control mode (NOC, MPC1, MPC2)");

  auto* report = app.add_subcommand("report", "compare arms across trace files");
  add_common(report);
  report->add_option("traces", traces, "trace CSV files")->required();

  auto* daemon = app.add_subcommand("daemon", "streaming controller on stdin/stdout");
  add_common(daemon);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  if (!config.empty()) opt.config = config;
  if (!model.empty()) opt.model = model;
  for (const auto* o : seed_options) {
    if (o->count()) opt.seed = seed;
  }
  opt.out_dir = out_dir;
  if (!format.empty()) opt.format = format == "csv" ? OutputFormat::Csv : OutputFormat::Text;

  if (identify->parsed()) return cmd_identify(telemetry, opt, out, err);
  if (solve_cmd->parsed()) return cmd_solve(snapshot, opt, out, err);
  if (simulate->parsed()) return cmd_simulate(opt, mode, out, err);
  if (report->parsed()) {
    std::vector<fs::path> paths(traces.begin(), traces.end());
    return cmd_report(paths, opt, out, err);
  }
  return cmd_daemon(opt, in, out, err);
}

}  // namespace dmpc::cli
