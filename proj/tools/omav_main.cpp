// omav: planar multi-link vehicle simulation and robustness CLI.

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "omav/analysis.hpp"
#include "omav/csvio.hpp"
#include "omav/oracle.hpp"
#include "omav/robustness.hpp"
#include "omav/scenario.hpp"
#include "omav/svgplot.hpp"

namespace {

using nlohmann::json;
using namespace omav;

struct CommonOpts {
  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  int samples = 0;
  int workers = 0;
  double dt = 0.0;
  double t_final = 0.0;
  bool have_seed = false, have_samples = false, have_workers = false;
  bool have_dt = false, have_t_final = false;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config_path, "Scenario config file (JSON)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", o.out_dir, "Output directory");
  cmd->add_option("--seed", o.seed, "Sampling seed")
      ->each([&](const std::string&) { o.have_seed = true; });
  cmd->add_option("--samples", o.samples, "Sample count")
      ->each([&](const std::string&) { o.have_samples = true; });
  cmd->add_option("--workers", o.workers, "Worker threads")
      ->each([&](const std::string&) { o.have_workers = true; });
  cmd->add_option("--dt", o.dt, "Integration step (s)")
      ->each([&](const std::string&) { o.have_dt = true; });
  cmd->add_option("--t-final", o.t_final, "Simulation horizon (s)")
      ->each([&](const std::string&) { o.have_t_final = true; });
}

ScenarioConfig resolve_config(const CommonOpts& o,
                              const ScenarioConfig& fallback) {
  ScenarioConfig cfg =
      o.config_path.empty() ? fallback : load_scenario(o.config_path);
  if (o.have_seed) cfg.seed = o.seed;
  if (o.have_samples) cfg.samples = o.samples;
  if (o.have_workers) cfg.workers = o.workers;
  if (o.have_dt) cfg.scenario.options.dt = o.dt;
  if (o.have_t_final) cfg.scenario.options.t_final = o.t_final;
  if (!(cfg.scenario.options.dt > 0.0) ||
      !(cfg.scenario.options.t_final > 0.0))
    throw ScenarioError("dt and t_final must be positive");
  cfg.config_hash = scenario_hash(cfg);
  return cfg;
}

std::string hash_hex(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

std::filesystem::path prepare_out(const std::string& dir) {
  std::filesystem::path p(dir);
  std::filesystem::create_directories(p);
  return p;
}

void write_manifest(const std::filesystem::path& out_dir,
                    const std::string& command, const ScenarioConfig& cfg,
                    std::vector<std::string> outputs) {
  json manifest;
  manifest["command"] = command;
  manifest["config_hash"] = hash_hex(cfg.config_hash);
  manifest["config"] = json::parse(canonical_scenario_json(cfg));
  std::sort(outputs.begin(), outputs.end());
  manifest["outputs"] = outputs;
  write_text_file((out_dir / "manifest.json").string(),
                  manifest.dump(2) + "\n");
}

std::vector<std::pair<std::string, std::string>> report_context(
    const ScenarioConfig& cfg) {
  return {{"config_hash", hash_hex(cfg.config_hash)},
          {"preset", cfg.params.preset_name}};
}

// Plot decimation stride: the CSV keeps every step, the charts do not need
// thousands of segments per series.
std::size_t plot_stride(std::size_t n) { return n / 2000 + 1; }

std::vector<double> decimate(const std::vector<double>& v,
                             std::size_t stride) {
  std::vector<double> out;
  out.reserve(v.size() / stride + 2);
  for (std::size_t i = 0; i < v.size(); i += stride) out.push_back(v[i]);
  if (!v.empty() && (v.size() - 1) % stride != 0) out.push_back(v.back());
  return out;
}

// Decimated time series of one logged state column.
std::vector<double> column(const SimLog& log, int idx, std::size_t stride) {
  std::vector<double> v(log.size());
  for (std::size_t i = 0; i < log.size(); ++i) v[i] = log.state[i][idx];
  return decimate(v, stride);
}

void write_sim_artifacts(const std::filesystem::path& out_dir,
                         const ScenarioConfig& cfg, const SimLog& log,
                         std::vector<std::string>& outputs) {
  write_sim_log_csv((out_dir / "log.csv").string(), log);
  outputs.push_back("log.csv");

  const std::size_t stride = plot_stride(log.size());
  const std::vector<double> t = decimate(log.t, stride);
  std::vector<double> rx, ry, rphi;
  for (double ti : t) {
    const PoseRef r = eval_reference(cfg.scenario.reference, ti);
    rx.push_back(r.x[0]);
    ry.push_back(r.y[0]);
    rphi.push_back(r.phi[0]);
  }
  write_svg_plot((out_dir / "pose.svg").string(), "Platform pose",
                 "t (s)", "position (m), angle (rad)",
                 {{"x", t, column(log, 0, stride), ""},
                  {"x ref", t, rx, "#9ec2f7"},
                  {"y", t, column(log, 1, stride), ""},
                  {"y ref", t, ry, "#f7b2ba"},
                  {"phi", t, column(log, 2, stride), ""},
                  {"phi ref", t, rphi, "#b6e2bc"}});
  outputs.push_back("pose.svg");

  write_svg_plot((out_dir / "errors.svg").string(), "Tracking errors",
                 "t (s)", "error",
                 {{"|e_pos| (m)", t, decimate(log.e_pos, stride), ""},
                  {"|e_phi| (rad)", t, decimate(log.e_phi, stride), ""}});
  outputs.push_back("errors.svg");

  std::vector<double> f1, lift, mom;
  for (std::size_t i = 0; i < log.size(); i += stride) {
    f1.push_back(log.input[i][0]);
    lift.push_back(log.input[i][1]);
    mom.push_back(log.input[i][2]);
  }
  if ((log.size() - 1) % stride != 0) {
    f1.push_back(log.input.back()[0]);
    lift.push_back(log.input.back()[1]);
    mom.push_back(log.input.back()[2]);
  }
  write_svg_plot((out_dir / "inputs.svg").string(), "Input channels",
                 "t (s)", "N, N m",
                 {{"thrust 1", t, f1, ""},
                  {"lift", t, lift, ""},
                  {"moment", t, mom, ""}});
  outputs.push_back("inputs.svg");

  const Metrics m = compute_metrics(log);
  std::size_t infeasible = 0;
  for (auto f : log.input_feasible)
    if (!f) ++infeasible;
  json summary;
  summary["termination"] = termination_name(log.termination);
  summary["t_end"] = log.t_end;
  summary["samples"] = log.size();
  summary["e_pos_max"] = m.e_pos_max;
  summary["e_phi_max"] = m.e_phi_max;
  summary["e_pos_steady"] = m.e_pos_steady;
  summary["e_phi_steady"] = m.e_phi_steady;
  summary["infeasible_input_samples"] = infeasible;
  summary["config_hash"] = hash_hex(cfg.config_hash);
  write_text_file((out_dir / "summary.json").string(),
                  summary.dump(2) + "\n");
  outputs.push_back("summary.json");

  std::printf("%s after %.3f s; e_pos_max=%.6g m, e_phi_max=%.6g rad\n",
              termination_name(log.termination), log.t_end, m.e_pos_max,
              m.e_phi_max);
}

int run_sim_command(const std::string& name, const CommonOpts& o,
                    const ScenarioConfig& fallback) {
  const ScenarioConfig cfg = resolve_config(o, fallback);
  const auto out_dir = prepare_out(o.out_dir);
  const SimLog log = run_scenario(cfg.params, cfg.params, cfg.scenario);
  std::vector<std::string> outputs;
  write_sim_artifacts(out_dir, cfg, log, outputs);
  write_manifest(out_dir, name, cfg, outputs);
  return log.termination == TerminationReason::Completed ? 0 : 1;
}

const char* omni_name(OmniClass c) {
  switch (c) {
    case OmniClass::FullyOmnidirectional: return "fully-omnidirectional";
    case OmniClass::PartiallyOmnidirectional:
      return "partially-omnidirectional";
    case OmniClass::NotOmnidirectional: return "not-omnidirectional";
  }
  return "?";
}

int cmd_analyze(const CommonOpts& o) {
  const ScenarioConfig cfg = resolve_config(o, default_config());
  const auto out_dir = prepare_out(o.out_dir);
  const VehicleParams& p = cfg.params;

  json j;
  j["config_hash"] = hash_hex(cfg.config_hash);
  j["preset"] = p.preset_name;
  j["coords"] = p.coords();
  j["inputs"] = p.input_count();
  j["total_mass"] = p.m_tot();

  const EquilibriumPose pose = cfg.scenario.start;
  VectorD res = static_balance_residual(p, pose);
  double res_max = 0.0;
  for (int i = 0; i < res.n; ++i)
    res_max = std::max(res_max, std::abs(res[i]));
  j["static_balance_residual"] = res_max;
  json ue = json::array();
  for (double v : equilibrium_input(p).values) ue.push_back(v);
  j["equilibrium_input"] = ue;

  const GenState eq = equilibrium_state(p, pose);
  const OmniReport omni = omni_classify(p, eq);
  j["omni"] = {{"class", omni_name(omni.classification)},
               {"wrench_rank", omni.wrench_rank},
               {"moment_authority", omni.moment_authority},
               {"full_actuation", omni.full_actuation},
               {"worst_lift_margin", omni.worst_lift_margin},
               {"feasible_directions", omni.feasible_directions},
               {"grid", omni.grid}};

  if (p.type == VehicleType::Type2 && p.n_links == 2) {
    const ExtendedState hover = hover_extended_state(p, pose);
    const ExtendedDecoupling ed = extended_decoupling(p, hover);
    j["hover_decoupling"] = {{"det", ed.det}, {"cond", ed.cond}};
    j["singularity_margin"] = singularity_margin(p, hover);
    const double l = fit_simplified_l(p, pose.phi);
    const ZeroDynEval zd =
        zero_dynamics_general_rhs(p, pose, {-pose.phi, 0.0});
    j["zero_dynamics"] = {{"fitted_l", l},
                          {"rhs_at_equilibrium", zd.rhs.rate},
                          {"newton_residual", zd.residual}};
  }

  const std::string text = j.dump(2) + "\n";
  write_text_file((out_dir / "analysis.json").string(), text);
  write_manifest(out_dir, "analyze", cfg, {"analysis.json"});
  std::printf("%s", text.c_str());
  return 0;
}

int cmd_validate(const CommonOpts& o) {
  try {
    const ScenarioConfig cfg = resolve_config(o, default_config());
    std::printf("config ok; hash %s\n%s\n",
                hash_hex(cfg.config_hash).c_str(),
                canonical_scenario_json(cfg).c_str());
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "invalid config: %s\n", e.what());
    return 2;
  }
}

int cmd_param_range(const CommonOpts& o, const std::string& param_arg) {
  const ScenarioConfig cfg = resolve_config(o, default_config());
  const auto out_dir = prepare_out(o.out_dir);

  std::vector<PerturbedParam> params;
  if (param_arg == "all") {
    for (int k = 0; k < kPerturbationDim; ++k)
      params.push_back(static_cast<PerturbedParam>(k));
  } else {
    bool found = false;
    for (int k = 0; k < kPerturbationDim; ++k)
      if (param_arg == param_name(static_cast<PerturbedParam>(k))) {
        params.push_back(static_cast<PerturbedParam>(k));
        found = true;
      }
    if (!found) {
      std::fprintf(stderr, "unknown parameter \"%s\"\n", param_arg.c_str());
      return 2;
    }
  }

  std::vector<std::pair<PerturbedParam, ParamRange>> ranges(params.size());
  parallel_for(static_cast<int>(params.size()), cfg.workers, [&](int i) {
    ranges[i] = {params[i], param_range_search(cfg.params, cfg.scenario,
                                               params[i], cfg.range_opt)};
  });

  std::vector<std::vector<double>> rows;
  for (const auto& [param, r] : ranges) {
    std::printf("%-4s  [%+8.4f, %+8.4f]%s%s  (%d sims)\n",
                param_name(param), r.lo, r.hi,
                r.lo_censored ? " lo-censored" : "",
                r.hi_censored ? " hi-censored" : "", r.evals);
    rows.push_back({static_cast<double>(static_cast<int>(param)), r.lo,
                    r.hi, static_cast<double>(r.evals)});
  }
  write_table_csv((out_dir / "param_range.csv").string(),
                  {"param", "lo", "hi", "evals"}, rows);
  write_text_file((out_dir / "param_range.json").string(),
                  param_range_report_json(ranges, report_context(cfg)) +
                      "\n");
  write_manifest(out_dir, "param-range", cfg,
                 {"param_range.csv", "param_range.json"});
  return 0;
}

int cmd_worst_case(const CommonOpts& o) {
  const ScenarioConfig cfg = resolve_config(o, default_config());
  const auto out_dir = prepare_out(o.out_dir);
  const WorstCaseReport report =
      worst_case_search(cfg.params, cfg.scenario, cfg.box, cfg.samples,
                        cfg.seed, cfg.workers);
  write_text_file((out_dir / "worst_case.json").string(),
                  worst_case_report_json(report, report_context(cfg)) +
                      "\n");
  std::vector<std::string> outputs{"worst_case.json"};

  if (report.worst_pos_index >= 0) {
    const SampleOutcome& w = report.outcomes[report.worst_pos_index];
    const PerturbedParams pp = apply_perturbation(cfg.params, w.delta);
    const SimLog log = run_scenario(pp.params, cfg.params, cfg.scenario);
    write_sim_log_csv((out_dir / "worst_case_log.csv").string(), log);
    const std::size_t stride = plot_stride(log.size());
    const std::vector<double> t = decimate(log.t, stride);
    write_svg_plot((out_dir / "worst_case_errors.svg").string(),
                   "Worst-case tracking errors", "t (s)", "error",
                   {{"|e_pos| (m)", t, decimate(log.e_pos, stride), ""},
                    {"|e_phi| (rad)", t, decimate(log.e_phi, stride), ""}});
    outputs.push_back("worst_case_log.csv");
    outputs.push_back("worst_case_errors.svg");
  }
  write_manifest(out_dir, "worst-case", cfg, outputs);

  std::printf("samples=%d failures=%d invalid=%d\n", report.samples,
              report.failures, report.invalid);
  std::printf("bound e_pos_max=%.6g (sample %d), e_phi_max=%.6g (sample %d)\n",
              report.e_pos_bound, report.worst_pos_index,
              report.e_phi_bound, report.worst_phi_index);
  return 0;
}

int cmd_disturbance_sweep(const CommonOpts& o) {
  const ScenarioConfig cfg = resolve_config(o, default_config());
  const auto out_dir = prepare_out(o.out_dir);
  const auto entries =
      disturbance_tolerance(cfg.params, cfg.scenario, cfg.sweep_omegas,
                            cfg.tol_opt, cfg.workers);
  write_text_file((out_dir / "disturbance.json").string(),
                  disturbance_report_json(entries, report_context(cfg)) +
                      "\n");
  std::vector<double> w, amp;
  std::vector<std::vector<double>> rows;
  for (const auto& e : entries) {
    std::printf("omega=%-6g amplitude=%.6g%s e_pos_steady=%.6g\n", e.omega,
                e.amplitude, e.censored ? " (censored)" : "",
                e.e_pos_steady);
    w.push_back(e.omega);
    amp.push_back(e.amplitude);
    rows.push_back({e.omega, e.amplitude,
                    static_cast<double>(e.censored), e.e_pos_steady});
  }
  write_table_csv((out_dir / "disturbance.csv").string(),
                  {"omega", "amplitude", "censored", "e_pos_steady"}, rows);
  write_svg_plot((out_dir / "disturbance.svg").string(),
                 "Disturbance tolerance", "omega (rad/s)",
                 "amplitude (m/s^2)", {{"max amplitude", w, amp, ""}});
  write_manifest(out_dir, "disturbance-sweep", cfg,
                 {"disturbance.json", "disturbance.csv",
                  "disturbance.svg"});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Planar multi-link omnidirectional vehicle: simulation, analysis and "
      "robustness searches"};
  app.require_subcommand(1);

  CommonOpts o;
  bool track_phi = false;
  std::string range_param = "all";

  CLI::App* regulate =
      app.add_subcommand("regulate", "Pose regulation run");
  add_common(regulate, o);
  CLI::App* track = app.add_subcommand("track", "Circle tracking run");
  add_common(track, o);
  track->add_flag("--phi", track_phi,
                  "Add the sinusoidal orientation reference");
  CLI::App* analyze =
      app.add_subcommand("analyze", "Vehicle property report");
  add_common(analyze, o);
  CLI::App* validate =
      app.add_subcommand("validate", "Check a config file");
  add_common(validate, o);
  CLI::App* param_range = app.add_subcommand(
      "param-range", "Single-parameter mismatch range search");
  add_common(param_range, o);
  param_range->add_option("--param", range_param,
                          "Parameter name (a, c, m_p, m_b, b_f, I_p, I_b) "
                          "or \"all\"");
  CLI::App* worst_case = app.add_subcommand(
      "worst-case", "Sampled combined-perturbation search");
  add_common(worst_case, o);
  CLI::App* sweep = app.add_subcommand(
      "disturbance-sweep", "Disturbance amplitude tolerance per frequency");
  add_common(sweep, o);

  CLI11_PARSE(app, argc, argv);

  try {
    if (regulate->parsed())
      return run_sim_command("regulate", o, default_config());
    if (track->parsed())
      return run_sim_command("track", o, default_track_config(track_phi));
    if (analyze->parsed()) return cmd_analyze(o);
    if (validate->parsed()) return cmd_validate(o);
    if (param_range->parsed()) return cmd_param_range(o, range_param);
    if (worst_case->parsed()) return cmd_worst_case(o);
    if (sweep->parsed()) return cmd_disturbance_sweep(o);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
