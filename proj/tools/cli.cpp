#include "cli.hpp"

#include "ibckit/io.hpp"
#include "ibckit/linalg.hpp"

#include <CLI11.hpp>
#include <openssl/evp.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

namespace ibckit::cli {

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::kSchema:
    case ErrorCode::kInvalidArgument:
      return 2;
    case ErrorCode::kDecompositionFails:
      return 3;
    default:
      return 10 + static_cast<int>(code);
  }
}

std::string sha256_file(const std::string& path) {
  const std::string data = io::read_text_file(path);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int{digest[i]};
  return hex.str();
}

namespace {

using io::Json;

std::shared_ptr<spdlog::logger> logger() {
  static const auto log = [] {
    auto l = spdlog::stderr_color_mt("ibckit");
    l->set_pattern("[%l] %v");
    return l;
  }();
  const char* env = std::getenv("IBCKIT_LOG");
  log->set_level(env ? spdlog::level::from_str(env) : spdlog::level::warn);
  return log;
}

struct Options {
  std::optional<double> alpha;
  std::optional<std::string> lambda_grid;
  std::optional<std::string> input_box;
  std::optional<double> dt;
  std::optional<double> horizon;
  std::uint64_t seed = 0;
  std::optional<std::string> out;
  std::optional<std::string> manifest;
  bool assume_mild = false;
  bool no_replan = false;
  std::vector<std::string> files;
};

class Run {
 public:
  Run(const Options& o, std::ostream& out) : opts_(o), out_(out) {}

  Json input(const std::string& path) {
    inputs_.push_back(path);
    return io::read_json_file(path);
  }
  void note_input(const std::string& path) { inputs_.push_back(path); }

  /// Writes `text` to `path`, or to stdout without one.
  void emit(const std::string& text, const std::optional<std::string>& path) {
    if (!path) {
      out_ << text;
      return;
    }
    io::write_text_file(*path, text);
    outputs_.push_back(*path);
  }

  const std::vector<std::string>& inputs() const { return inputs_; }
  const std::vector<std::string>& outputs() const { return outputs_; }
  const Options& opts() const { return opts_; }
  std::ostream& out() { return out_; }

 private:
  const Options& opts_;
  std::ostream& out_;
  std::vector<std::string> inputs_;
  std::vector<std::string> outputs_;
};

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

LinearSystem load_system(Run& run, const std::string& path) {
  return shift_to_linear(io::system_from_json(run.input(path)));
}

int cmd_analyze(Run& run) {
  const LinearSystem sys = load_system(run, run.opts().files.at(0));
  Json r{{"n", sys.n()}, {"m", sys.m()}, {"controllable", is_controllable(sys)},
         {"dim_equilibria", equilibrium_set(sys).cols()}, {"spans_state_space", spans_state_space(sys)}};
  int code = 0;
  try {
    const Decomposition d = decompose(sys);
    r["decomposition"] = "ok";
    r["t_condition"] = linalg::condition_number(d.t);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kDecompositionFails) throw;
    r["decomposition"] = "fails";
    r["reason"] = e.what();
    code = exit_code(ErrorCode::kDecompositionFails);
  }
  run.emit(dump(r), run.opts().out);
  return code;
}

int cmd_check(Run& run) {
  const LinearSystem sys = load_system(run, run.opts().files.at(0));
  const Polytope x = io::polytope_from_json(run.input(run.opts().files.at(1)));
  const InputSet u = run.opts().input_box ? io::parse_input_box(*run.opts().input_box, sys.m()) : InputSet{};
  const IbcCertificate c = check_ibc(sys, x, u, CheckOptions{run.opts().assume_mild});
  logger()->info("verdict {}", to_string(c.verdict));
  run.emit(dump(io::certificate_to_json(c)), run.opts().out);
  return 0;
}

int cmd_construct(Run& run) {
  if (!run.opts().alpha) throw Error(ErrorCode::kSchema, "construct: --alpha is required");
  const LinearSystem sys = load_system(run, run.opts().files.at(0));
  const Polytope p = io::polytope_from_json(run.input(run.opts().files.at(1)));
  const Polytope x = construct_ibc_polytope(sys, p, *run.opts().alpha);
  run.emit(dump(io::polytope_to_json(x)), run.opts().out);
  return 0;
}

std::vector<double> grid(const Run& run) {
  return run.opts().lambda_grid ? io::parse_grid(*run.opts().lambda_grid) : default_lambda_grid();
}

int cmd_profile(Run& run) {
  const AxisSpec spec = io::axis_spec_from_json(run.input(run.opts().files.at(0)));
  const AxisProfile p = safe_speed_profile(spec, grid(run));
  if (!run.opts().out) {
    Json j = io::profile_to_json(p);
    j["controller"] = io::controller_to_json(p.controller);
    run.emit(dump(j), std::nullopt);
    return 0;
  }
  const std::filesystem::path dir(*run.opts().out);
  run.emit(dump(io::polytope_to_json(p.region)), (dir / "polytope.json").string());
  run.emit(dump(io::controller_to_json(p.controller)), (dir / "controller.json").string());
  run.emit(dump(io::profile_to_json(p)), (dir / "profile.json").string());
  return 0;
}

double number_field(const Json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j.at(key).is_number()) throw Error(ErrorCode::kSchema, where + "." + key + ": expected a number");
  return j.at(key).get<double>();
}

std::vector<AxisProfile> axis_profiles(const Json& s, const std::vector<double>& g) {
  if (!s.contains("axes") || !s["axes"].is_array() || s["axes"].empty() || s["axes"].size() > 2)
    throw Error(ErrorCode::kSchema, "scenario.axes: one or two axis specs required");
  std::vector<AxisProfile> out;
  for (const auto& a : s["axes"]) out.push_back(safe_speed_profile(io::axis_spec_from_json(a), g));
  if (out.size() == 1) out.push_back(out.front());
  return out;
}

void write_trajectory(Run& run, const Trajectory& tr, const Json& summary) {
  std::ostringstream csv;
  io::write_trajectory_csv(csv, tr);
  run.emit(csv.str(), run.opts().out);
  if (run.opts().out) {
    run.emit(dump(summary), *run.opts().out + ".summary.json");
    run.out() << dump(summary);
  }
}

Json trajectory_summary(const Trajectory& tr) {
  std::size_t violations = 0;
  for (const auto& s : tr.samples) violations += s.violation ? 1 : 0;
  return Json{{"policy", tr.policy}, {"scenario", tr.scenario}, {"samples", tr.samples.size()},
              {"violations", violations}, {"final_state", io::to_json(tr.final_state())}};
}

int cmd_simulate(Run& run) {
  const Json s = run.input(run.opts().files.at(0));
  io::check_fields(s, {"policy", "x0", "dt", "T"},
                   {"scenario", "system", "region", "axes", "input_box", "xf", "seed"}, "scenario");
  if (!s["policy"].is_string()) throw Error(ErrorCode::kSchema, "scenario.policy: expected a string");
  const std::string policy = s["policy"].get<std::string>();
  const double dt = run.opts().dt.value_or(number_field(s, "dt", "scenario"));
  const double horizon = run.opts().horizon.value_or(number_field(s, "T", "scenario"));
  const Vec x0 = io::vec_from_json(s["x0"], "scenario.x0");
  auto need = [&](const char* key) -> const Json& {
    if (!s.contains(key)) throw Error(ErrorCode::kSchema, "scenario." + std::string(key) + ": required for policy " + policy);
    return s[key];
  };

  Trajectory tr;
  Json summary;
  if (policy == "pwl" || policy == "safe_steer" || policy == "gramian") {
    const LinearSystem sys = shift_to_linear(io::system_from_json(need("system")));
    const Polytope region = io::polytope_from_json(need("region"));
    const InputSet u = s.contains("input_box") ? io::input_box_from_json(s["input_box"], sys.m()) : InputSet{};
    if (x0.size() != sys.n()) throw Error(ErrorCode::kSchema, "scenario.x0: length must match the system");
    if (policy == "pwl") {
      const PwlController c = build_pwl(sys, region, u);
      IntegrateOptions o;
      o.dt = dt;
      o.horizon = horizon;
      o.monitor = region_monitor(region);
      tr = integrate(linear_field(sys), [&](double, const Vec& x) { return c.eval(x, 1e-7); }, x0, o);
      tr.policy = "pwl";
      summary = trajectory_summary(tr);
    } else {
      const Vec xf = io::vec_from_json(need("xf"), "scenario.xf");
      const SteerResult r = policy == "gramian"
                                ? gramian_run(sys, region, x0, xf, horizon, dt)
                                : safe_steer(sys, region, build_pwl(sys, region, u), x0, xf, horizon,
                                             SteerOptions{dt, kSwitchDistance});
      tr = r.trajectory;
      summary = trajectory_summary(tr);
      summary["endpoint_error"] = r.endpoint_error;
      summary["switch_time"] = r.switch_time;
    }
  } else if (policy == "unicycle_mission" || policy == "pd_baseline") {
    need("axes");
    const std::vector<AxisProfile> axes = axis_profiles(s, grid(run));
    const Vec xf = io::vec_from_json(need("xf"), "scenario.xf");
    const UnicycleParams p;
    if (policy == "unicycle_mission") {
      MissionOptions o;
      o.dt = dt;
      o.horizon = horizon;
      const MissionResult m = unicycle_mission(p, axes[0], axes[1], x0, xf, o);
      tr = m.trajectory;
      summary = trajectory_summary(tr);
      summary["position_error"] = m.position_error;
      summary["final_speed"] = m.final_speed;
      Json phases = Json::array();
      for (const auto& [name, t] : m.phases) phases.push_back({{"phase", name}, {"start", t}});
      summary["phases"] = phases;
    } else {
      tr = unicycle_pd_baseline(p, axes[0], axes[1], x0, xf, horizon, dt);
      summary = trajectory_summary(tr);
    }
  } else {
    throw Error(ErrorCode::kSchema, "scenario.policy: unknown policy '" + policy + "'");
  }
  if (s.contains("scenario")) tr.scenario = s["scenario"].get<std::string>();
  summary["scenario"] = tr.scenario;
  write_trajectory(run, tr, summary);
  return 0;
}

int cmd_avoid(Run& run) {
  const Json s = run.input(run.opts().files.at(0));
  io::check_fields(s, {"reference", "T"},
                   {"scenario", "quadrotor", "safety_radius", "slack", "release_margin", "rate",
                    "prediction", "replanning", "seed"},
                   "scenario");
  const std::string obstacle_path = run.opts().files.at(1);
  run.note_input(obstacle_path);
  std::ifstream in(obstacle_path);
  if (!in) throw Error(ErrorCode::kInvalidArgument, "cannot read " + obstacle_path);
  const ObstacleTrace obstacle = io::read_obstacle_csv(in);

  QuadrotorParams p;
  if (s.contains("quadrotor")) {
    const Json& q = s["quadrotor"];
    io::check_fields(q, {}, {"gravity", "angle_max", "v_max", "pos_max", "vel_max"}, "scenario.quadrotor");
    if (q.contains("gravity")) p.gravity = number_field(q, "gravity", "scenario.quadrotor");
    if (q.contains("angle_max")) p.angle_max = number_field(q, "angle_max", "scenario.quadrotor");
    if (q.contains("v_max")) p.v_max = number_field(q, "v_max", "scenario.quadrotor");
    if (q.contains("pos_max")) p.pos_max = number_field(q, "pos_max", "scenario.quadrotor");
    if (q.contains("vel_max")) p.vel_max = number_field(q, "vel_max", "scenario.quadrotor");
  }
  const Json& r = s["reference"];
  io::check_fields(r, {"axis", "amplitude", "frequency"}, {"delay"}, "scenario.reference");
  if (!r["axis"].is_number_integer() || (r["axis"] != 0 && r["axis"] != 1))
    throw Error(ErrorCode::kSchema, "scenario.reference.axis: 0 or 1 expected");
  const Reference ref =
      sinusoid_reference(r["axis"].get<int>(), number_field(r, "amplitude", "scenario.reference"),
                         number_field(r, "frequency", "scenario.reference"),
                         r.contains("delay") ? number_field(r, "delay", "scenario.reference") : 0.0);

  AvoidanceOptions o;
  o.horizon = run.opts().horizon.value_or(number_field(s, "T", "scenario"));
  if (s.contains("safety_radius")) o.safety_radius = number_field(s, "safety_radius", "scenario");
  if (s.contains("slack")) o.slack = number_field(s, "slack", "scenario");
  if (s.contains("release_margin")) o.release_margin = number_field(s, "release_margin", "scenario");
  if (s.contains("rate")) o.rate = number_field(s, "rate", "scenario");
  if (s.contains("prediction")) o.prediction = number_field(s, "prediction", "scenario");
  if (s.contains("replanning")) {
    if (!s["replanning"].is_boolean()) throw Error(ErrorCode::kSchema, "scenario.replanning: expected a boolean");
    o.replanning = s["replanning"].get<bool>();
  }
  if (run.opts().no_replan) o.replanning = false;

  AvoidanceResult res = obstacle_avoidance_run(p, ref, obstacle, o);
  if (s.contains("scenario")) res.trajectory.scenario = s["scenario"].get<std::string>();
  Json summary = trajectory_summary(res.trajectory);
  summary["min_distance"] = res.min_distance;
  summary["safety_radius"] = o.safety_radius;
  summary["replanning"] = o.replanning;
  summary["triggers"] = res.triggers;
  summary["rebuilds"] = res.rebuild_ms.size();
  // Timing varies between runs; kept out of the files so outputs stay reproducible.
  logger()->info("median profile rebuild {:.3f} ms", res.median_rebuild_ms);
  // Without --out only the summary is printed; the trajectory needs a file.
  if (run.opts().out)
    write_trajectory(run, res.trajectory, summary);
  else
    run.out() << dump(summary);
  return 0;
}

Json versions() {
  return Json{{"ibckit", kVersion},
              {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                            std::to_string(EIGEN_MINOR_VERSION)},
              {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                    std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                    std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
              {"compiler", __VERSION__}};
}

Json hashed(const std::vector<std::string>& paths) {
  Json j = Json::array();
  for (const auto& p : paths) j.push_back({{"path", p}, {"sha256", sha256_file(p)}});
  return j;
}

void write_manifest(const Run& run, const std::vector<std::string>& argv, const std::string& command,
                    int code, double seconds) {
  std::optional<std::string> path = run.opts().manifest;
  if (!path && run.opts().out) path = *run.opts().out + (command == "profile" ? "/manifest.json" : ".manifest.json");
  if (!path) return;
  const Json m{{"command", command}, {"argv", argv}, {"seed", run.opts().seed},
               {"exit_code", code}, {"inputs", hashed(run.inputs())},
               {"outputs", hashed(run.outputs())}, {"versions", versions()},
               {"wall_time_s", seconds}};
  io::write_text_file(*path, dump(m));
}

int cmd_replay(const std::string& manifest_path, std::ostream& out, std::ostream& err) {
  const Json m = io::read_json_file(manifest_path);
  io::check_fields(m, {"command", "argv", "inputs", "outputs"},
                   {"seed", "exit_code", "versions", "wall_time_s"}, "manifest");
  for (const auto& in : m["inputs"]) {
    const std::string path = in["path"].get<std::string>();
    if (sha256_file(path) != in["sha256"].get<std::string>()) {
      err << "input changed since the manifest was written: " << path << "\n";
      return 1;
    }
  }
  const auto args = m["argv"].get<std::vector<std::string>>();
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream sink;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), sink, err);
  if (m.contains("exit_code") && code != m["exit_code"].get<int>()) {
    err << "exit code " << code << " differs from the recorded " << m["exit_code"] << "\n";
    return 1;
  }
  int mismatches = 0;
  for (const auto& o : m["outputs"]) {
    const std::string path = o["path"].get<std::string>();
    const bool same = sha256_file(path) == o["sha256"].get<std::string>();
    out << (same ? "identical " : "DIFFERENT ") << path << "\n";
    mismatches += same ? 0 : 1;
  }
  return mismatches == 0 ? 0 : 1;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Invariance-based controllability toolkit", "ibckit"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  Options o;
  std::string manifest_to_replay;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--out", o.out, "Output file (directory for profile)");
    sub->add_option("--manifest", o.manifest, "Manifest path (default: next to --out)");
    sub->add_option("--seed", o.seed, "Seed recorded for reproducibility")->default_val(0);
  };
  auto* analyze = app.add_subcommand("analyze", "Controllability and decomposition report");
  analyze->add_option("system", o.files, "system.json")->required()->expected(1)->check(CLI::ExistingFile);
  auto* check = app.add_subcommand("check", "Decide whether a polytope is IBC");
  check->add_option("files", o.files, "system.json polytope.json")->required()->expected(2)->check(CLI::ExistingFile);
  check->add_option("--input-box", o.input_box, "L or lo1,hi1,...");
  check->add_flag("--assume-mild", o.assume_mild, "Assert interior equilibrium inputs at equilibrium vertices");
  auto* construct = app.add_subcommand("construct", "Build an IBC polytope from an initial polytope");
  construct->add_option("files", o.files, "system.json pbox.json")->required()->expected(2)->check(CLI::ExistingFile);
  construct->add_option("--alpha", o.alpha, "Scale of the appended equilibrium points (> 1)");
  auto* profile = app.add_subcommand("profile", "Safe speed profile and PWL feedback for one axis");
  profile->add_option("axis", o.files, "axis.json")->required()->expected(1)->check(CLI::ExistingFile);
  profile->add_option("--lambda-grid", o.lambda_grid, "Comma-separated velocity scales");
  auto* simulate = app.add_subcommand("simulate", "Run a closed-loop scenario");
  simulate->add_option("scenario", o.files, "scenario.json")->required()->expected(1)->check(CLI::ExistingFile);
  simulate->add_option("--dt", o.dt, "Step size override");
  simulate->add_option("--horizon", o.horizon, "Horizon override");
  simulate->add_option("--lambda-grid", o.lambda_grid, "Comma-separated velocity scales");
  auto* avoid = app.add_subcommand("avoid", "Quadrotor tracking with obstacle replanning");
  avoid->add_option("files", o.files, "scenario.json obstacle.csv")->required()->expected(2)->check(CLI::ExistingFile);
  avoid->add_option("--horizon", o.horizon, "Horizon override");
  avoid->add_flag("--no-replan", o.no_replan, "Disable the replanner");
  for (auto* sub : {analyze, check, construct, profile, simulate, avoid}) common(sub);
  auto* replay = app.add_subcommand("replay", "Re-run a manifest and compare output hashes");
  replay->add_option("manifest", manifest_to_replay, "manifest.json")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  if (command == "replay") {
    try {
      return cmd_replay(manifest_to_replay, out, err);
    } catch (const Error& e) {
      err << e.what() << "\n";
      return exit_code(e.code());
    }
  }

  const std::vector<std::string> args(argv, argv + argc);
  const auto start = std::chrono::steady_clock::now();
  Run run(o, out);
  int code = 0;
  try {
    if (command == "analyze") code = cmd_analyze(run);
    else if (command == "check") code = cmd_check(run);
    else if (command == "construct") code = cmd_construct(run);
    else if (command == "profile") code = cmd_profile(run);
    else if (command == "simulate") code = cmd_simulate(run);
    else code = cmd_avoid(run);
  } catch (const Error& e) {
    err << e.what() << "\n";
    code = exit_code(e.code());
  } catch (const Json::exception& e) {
    err << "Schema: " << e.what() << "\n";
    code = 2;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    code = 1;
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  logger()->debug("{} finished with exit code {} in {:.3f} s", command, code, seconds);
  try {
    write_manifest(run, args, command, code, seconds);
  } catch (const Error& e) {
    err << e.what() << "\n";
    if (code == 0) code = exit_code(e.code());
  }
  return code;
}

}  // namespace ibckit::cli
