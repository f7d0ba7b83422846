#include "doctest.h"
#include "test_support.hpp"

#include "cli.hpp"
#include "ibckit/io.hpp"

#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <unistd.h>

using namespace ibckit;
using namespace ibckit::test;
using io::Json;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "ibckit");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class Workspace {
 public:
  Workspace() : dir_(fs::temp_directory_path() / ("ibckit_cli_" + std::to_string(::getpid()))) {
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  ~Workspace() { fs::remove_all(dir_); }

  std::string write(const std::string& name, const std::string& text) const {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p.string();
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

 private:
  fs::path dir_;
};

const char* kDi = R"({"A": [[0, 1], [0, 0]], "B": [[0], [1]]})";
const char* kBox = R"({"dim": 2, "vertices": [[0.8, 1], [-0.8, 1], [0.8, -1], [-0.8, -1]]})";

}  // namespace

TEST_CASE("analyze") {
  Workspace w;
  const Result di = run({"analyze", w.write("di.json", kDi)});
  REQUIRE(di.code == 0);
  const Json r = Json::parse(di.out);
  CHECK(r["controllable"] == true);
  CHECK(r["dim_equilibria"] == 1);
  CHECK(r["decomposition"] == "ok");

  const Result four = run({"analyze", w.write("four.json", R"({"A": [[0,0,0,0],[0,0,0,0],[1,0,1,1],[0,1,0,1]],
                                                               "B": [[1,0],[0,1],[0,0],[0,0]]})")});
  REQUIRE(four.code == 0);
  CHECK(Json::parse(four.out)["dim_equilibria"] == 2);
  CHECK(Json::parse(four.out)["spans_state_space"] == true);

  const Result bad = run({"analyze", w.write("bad.json", R"({"A": [[1,0],[0,1]], "B": [[1],[0]]})")});
  CHECK(bad.code == 3);
  CHECK(Json::parse(bad.out)["controllable"] == false);

  CHECK(run({"analyze", w.write("extra.json", R"({"A": [[0]], "B": [[1]], "note": 1})")}).code == 2);
  CHECK(run({"analyze", w.path("missing.json")}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
}

TEST_CASE("construct is deterministic and pipe-fits check") {
  Workspace w;
  const std::string sys = w.write("di.json", kDi);
  const std::string box = w.write("box.json", kBox);
  REQUIRE(run({"construct", sys, box, "--alpha", "1.25", "--out", w.path("x1.json")}).code == 0);
  REQUIRE(run({"construct", sys, box, "--alpha", "1.25", "--out", w.path("x2.json")}).code == 0);
  CHECK(io::read_text_file(w.path("x1.json")) == io::read_text_file(w.path("x2.json")));
  const Polytope x = io::polytope_from_json(io::read_json_file(w.path("x1.json")));
  for (const Vec& v : hexagon_points()) CHECK(has_point(x.vertices(), v));

  const Result ok = run({"check", sys, w.path("x1.json")});
  REQUIRE(ok.code == 0);
  CHECK(Json::parse(ok.out)["verdict"] == "IBC");

  const Result fail = run({"check", sys, box});
  REQUIRE(fail.code == 0);
  const Json cert = Json::parse(fail.out);
  CHECK(cert["verdict"] == "NOT_IBC");
  CHECK(cert["reason"].get<std::string>().find("(0.8, 1)") != std::string::npos);

  CHECK(run({"construct", sys, box}).code == 2);
  CHECK(run({"construct", sys, box, "--alpha", "0.9"}).code == cli::exit_code(ErrorCode::kAlphaTooSmall));
}

TEST_CASE("profile writes a checkable region") {
  Workspace w;
  const std::string axis = w.write("axis.json", R"({"pos": [-1.5707963267948966, 1.5707963267948966],
      "vel": [-1, 1], "input": [-3, 3], "alpha": 1.2})");
  REQUIRE(run({"profile", axis, "--out", w.path("arm")}).code == 0);
  const Json prof = io::read_json_file(w.path("arm/profile.json"));
  CHECK(prof["lambda"].get<double>() == doctest::Approx(0.85));
  CHECK(fs::exists(w.path("arm/controller.json")));
  CHECK(fs::exists(w.path("arm/manifest.json")));

  REQUIRE(run({"profile", axis, "--lambda-grid", "1,0.75,0.5", "--out", w.path("arm2")}).code == 0);
  CHECK(io::read_json_file(w.path("arm2/profile.json"))["lambda"] == 0.75);

  const Result cert = run({"check", w.write("di.json", kDi), w.path("arm/polytope.json"), "--input-box", "3"});
  REQUIRE(cert.code == 0);
  CHECK(Json::parse(cert.out)["verdict"] == "IBC");
}

TEST_CASE("simulate and replay from manifest") {
  Workspace w;
  const double q = 5 * std::numbers::pi / 12;
  Json scenario{{"scenario", "arm"},
                {"policy", "safe_steer"},
                {"system", Json::parse(kDi)},
                {"region", {{"dim", 2},
                            {"vertices", {{q, 1}, {-q, 1}, {q, -1}, {-q, -1}, {std::numbers::pi / 2, 0},
                                          {-std::numbers::pi / 2, 0}}}}},
                {"input_box", {5}},
                {"x0", {q, 0.95}},
                {"xf", {0, 0}},
                {"dt", 1e-3},
                {"T", 10}};
  const std::string path = w.write("scenario.json", scenario.dump());
  const Result r = run({"simulate", path, "--out", w.path("traj.csv")});
  REQUIRE(r.code == 0);
  const Json summary = Json::parse(r.out);
  CHECK(summary["violations"] == 0);
  CHECK(summary["endpoint_error"].get<double>() <= 1e-3);

  std::ifstream in(w.path("traj.csv"));
  const Trajectory tr = io::read_trajectory_csv(in);
  CHECK(tr.samples.size() == 10001);

  const Json manifest = io::read_json_file(w.path("traj.csv.manifest.json"));
  CHECK(manifest["inputs"][0]["sha256"] == cli::sha256_file(path));
  CHECK(manifest["outputs"].size() == 2);
  const std::string before = io::read_text_file(w.path("traj.csv"));
  const Result replay = run({"replay", w.path("traj.csv.manifest.json")});
  CHECK(replay.code == 0);
  CHECK(replay.out.find("DIFFERENT") == std::string::npos);
  CHECK(io::read_text_file(w.path("traj.csv")) == before);

  scenario["gain"] = 3;
  CHECK(run({"simulate", w.write("bad.json", scenario.dump())}).code == 2);
}

TEST_CASE("avoid") {
  Workspace w;
  const ObstacleTrace obs = ObstacleTrace::sample(
      [](double t) { return vec({1.5 * std::sin(2 * std::numbers::pi * 0.1 * (t - 2.5)), 0}); }, 70, 21);
  std::ostringstream csv;
  io::write_obstacle_csv(csv, obs);
  const std::string trace = w.write("obstacle.csv", csv.str());
  const std::string scenario = w.write(
      "avoid.json", R"({"reference": {"axis": 1, "amplitude": 1.5, "frequency": 0.1, "delay": 2.5}, "T": 20})");
  const Result on = run({"avoid", scenario, trace});
  REQUIRE(on.code == 0);
  CHECK(Json::parse(on.out)["min_distance"].get<double>() > 0.64);
  const Result off = run({"avoid", scenario, trace, "--no-replan"});
  REQUIRE(off.code == 0);
  CHECK(Json::parse(off.out)["min_distance"].get<double>() < 0.5);
}
