#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "pmc/runner.hpp"
#include "pmc/scenario.hpp"

using namespace pmc;
namespace fs = std::filesystem;

namespace {

const char* kHyperbolic = R"(
name: hyp
experiment: analyze
model: {curvature: -1, chart: poincare-disk}
domain: {primitive: geodesic-disc, intrinsic_radius: 1.0}
H: {kind: constant, value: 0.0}
solver: {h: 0.1}
)";

const char* kAnnulus = R"(
name: annulus
experiment: verify-barriers
model: {curvature: 0}
domain: {primitive: annulus, inner_radius: 0.4, outer_radius: 1.0}
H: {kind: constant, value: 0.0}
solver: {h: 0.1}
)";

fs::path fresh_dir(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() / ("pmc_test_" + tag);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

}  // namespace

TEST_CASE("sha256 of known strings") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("reals are written with 17 significant digits and round-trip") {
  CHECK(format_real(0.1) == "0.10000000000000001");
  CHECK(format_real(1.0) == "1");
  CHECK(format_real(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(format_real(-std::numeric_limits<double>::infinity()) == "-inf");
  for (double x : {M_PI, 1e-300, -2.5e17, 1.0 / 3.0}) CHECK(std::stod(format_real(x)) == x);

  nlohmann::ordered_json j = {{"x", 0.1}, {"n", 3}, {"bad", std::nan("")}, {"list", {1.5, true}}, {"empty", {}}};
  const std::string text = dump_json(j);
  CHECK(text.find("0.10000000000000001") != std::string::npos);
  const auto back = nlohmann::json::parse(text);
  CHECK(back["x"].get<double>() == 0.1);
  CHECK(back["n"].get<int>() == 3);
  CHECK(back["bad"].is_null());
  CHECK(back["list"][1].get<bool>());
}

TEST_CASE("scenario parsing") {
  const Scenario s = parse_scenario(kHyperbolic);
  CHECK(s.name == "hyp");
  CHECK(s.experiment == Experiment::Analyze);
  CHECK(s.model.chart == Chart::PoincareDisk);
  CHECK(s.mesh_h == 0.1);
  CHECK(s.demo.mesh_h == 0.1);
  CHECK(s.sha256 == sha256_hex(kHyperbolic));

  ScenarioOverrides o;
  o.mesh_h = 0.05;
  o.tol = 1e-7;
  o.seed = 9;
  const Scenario t = parse_scenario(kHyperbolic, "x", o);
  CHECK(t.mesh_h == 0.05);
  CHECK(t.demo.mesh_h == 0.05);
  CHECK(t.solver.tol == 1e-7);
  CHECK(t.demo.solver.tol == 1e-7);
  CHECK(t.seed == 9);

  const Scenario e = parse_scenario(R"yaml(
name: e
experiment: solve
model: {curvature: 1}
domain: {primitive: geodesic-disc, intrinsic_radius: 0.5}
H: {kind: expression, source: "0.2 + 0.1 * tanh(z)", z_range: [-4, 4], sign: nonnegative, z_nondecreasing: true}
boundary_data: {generator: expression, source: "x1^2"}
solver: {schedule: [0.5, 1.0], continuation: h-amplitude}
)yaml");
  CHECK(e.model.chart == Chart::SpherePolar);
  CHECK(!e.H.is_constant());
  CHECK(e.data.kind == DataKind::Expression);
  CHECK(e.solver.schedule.size() == 2);
  CHECK(e.solver.continuation == ContinuationMode::HAmplitude);
  CHECK(e.demo.solver.schedule.size() == 2);
}

TEST_CASE("invalid scenarios are rejected with a diagnostic") {
  const std::string base = "name: b\nexperiment: analyze\nmodel: {curvature: 0}\ndomain: {primitive: disc, radius: 1}\n";
  auto rejects = [](const std::string& text, const std::string& needle) {
    try {
      parse_scenario(text);
    } catch (const ScenarioError& e) {
      return std::string(e.what()).find(needle) != std::string::npos;
    }
    return false;
  };
  CHECK(rejects(base + "H: {kind: constant, value: 0.1}\nsolver: {hh: 1}\n", "unknown key 'solver.hh'"));
  CHECK(rejects(base + "H: {kind: constant, value: -0.1, sign: nonnegative}\n", "contradicts"));
  CHECK(rejects(base + "H: {kind: expression, source: \"0.1 - 0.05*tanh(z)\", z_range: [-2, 2], sign: nonnegative, "
                       "z_nondecreasing: true}\n",
                "nondecreasing"));
  CHECK(rejects(base + "H: {kind: expression, source: \"x1 + 0.05*z\", z_range: [-2, 2], sign: nonnegative, "
                       "z_nondecreasing: true}\n",
                "rejected"));
  CHECK(rejects(base + "H: {kind: expression, source: \"0.1 +\", z_range: [-2, 2], sign: mixed, z_nondecreasing: "
                       "true}\n",
                "H:"));
  CHECK(rejects(base + "H: {kind: constant, value: 0.1}\nsolver: {schedule: [0.5, 0.9]}\n", "end at 1"));
  CHECK(rejects(base + "H: {kind: constant, value: 0.1}\nboundary_data: {generator: expression, source: \"z\"}\n",
                "may not use z"));
  CHECK(rejects("name: b\nexperiment: plot\nmodel: {curvature: 0}\ndomain: {primitive: disc, radius: 1}\nH: {value: "
                "0}\n",
                "unknown experiment"));
  CHECK(rejects("name: b\nexperiment: analyze\nmodel: {curvature: 0}\ndomain: {primitive: disc, radius: 1.5, center: "
                "[0, 0]}\nH: {value: 0}\n"
                "solver: {h: -1}\n",
                "positive"));
  CHECK(rejects(": : :", "<string>"));
  CHECK_THROWS_AS(load_scenario("/nonexistent/scenario.yaml"), ScenarioError);
}

TEST_CASE("analyze writes a report that references the scenario hash, and repeats byte for byte") {
  const Scenario s = parse_scenario(kHyperbolic);
  const fs::path a = fresh_dir("analyze_a"), b = fresh_dir("analyze_b");
  CHECK(run_experiment(s, Experiment::Analyze, a) == kExitOk);
  CHECK(run_experiment(s, Experiment::Analyze, b) == kExitOk);
  const auto report = read_json(a / "report.json");
  CHECK(report["verdict"] == "StrongSerrinHolds");
  CHECK(report["scenario"]["sha256"] == s.sha256);
  CHECK(report["serrin"]["min_margin"].get<double>() == doctest::Approx(1.0 / std::tanh(1.0)).epsilon(1e-5));

  const auto manifest = read_json(a / "manifest.json");
  CHECK(manifest["scenario_sha256"] == s.sha256);
  std::set<std::string> listed;
  for (const auto& e : manifest["artifacts"]) {
    listed.insert(e["path"].get<std::string>());
    CHECK(e["sha256"] == sha256_hex(slurp(a / e["path"].get<std::string>())));
  }
  for (const auto& f : fs::directory_iterator(a)) {
    const std::string name = f.path().filename().string();
    if (name != "manifest.json") CHECK(listed.count(name) == 1);
    CHECK(slurp(f.path()) == slurp(b / name));
  }
  CHECK(listed.count("margins.csv") == 1);
}

TEST_CASE("solve exit codes and artifacts") {
  Scenario s = parse_scenario(R"(
name: cap
experiment: solve
model: {curvature: 0}
domain: {primitive: disc, radius: 1.0}
H: {kind: constant, value: 0.4}
solver: {h: 0.1, continuation: h-amplitude}
)");
  const fs::path ok = fresh_dir("solve_ok");
  CHECK(run_experiment(s, Experiment::Solve, ok) == kExitOk);
  const auto report = read_json(ok / "report.json");
  CHECK(report["converged"].get<bool>());
  CHECK(fs::exists(ok / "solution.csv"));
  CHECK(fs::exists(ok / "residual.csv"));
  std::istringstream sol(slurp(ok / "solution.csv"));
  std::string line;
  std::getline(sol, line);
  CHECK(line == "vertex,x,y,value");

  // No graph of constant mean curvature 1.2 spans the unit circle.
  s.H = PrescribedH::constant(1.2);
  CHECK(run_experiment(s, Experiment::Solve, fresh_dir("solve_fail")) == kExitSolveFailed);

  s.H = PrescribedH::constant(0.4);
  s.data.kind = DataKind::Table;
  s.data.table = {{100000, 1.0}};
  CHECK(run_experiment(s, Experiment::Solve, fresh_dir("solve_table")) == kExitInvalidScenario);
}

TEST_CASE("verify-barriers on the minimal annulus") {
  Scenario s = parse_scenario(kAnnulus);
  const fs::path out = fresh_dir("barriers");
  CHECK(run_experiment(s, Experiment::VerifyBarriers, out) == kExitOk);
  const auto report = read_json(out / "report.json");
  CHECK(report["max_Q_w"].get<double>() < 0.0);
  CHECK(report["max_Q_v"].get<double>() < 0.0);
  CHECK(report["constants"]["y0"]["component"] == 1);

  // A negative H is outside the supersolution hypotheses.
  s.H = PrescribedH::constant(-0.3);
  CHECK(run_experiment(s, Experiment::VerifyBarriers, fresh_dir("barriers_fail")) == kExitBarrierFailed);

  // Nowhere to put a barrier when the margin is positive.
  const Scenario h = parse_scenario(kHyperbolic);
  CHECK(run_experiment(h, Experiment::VerifyBarriers, fresh_dir("barriers_none")) == kExitInvalidScenario);
}

TEST_CASE("demo refuses a solvable scenario") {
  const Scenario s = parse_scenario(kHyperbolic);
  const fs::path out = fresh_dir("refused");
  CHECK(run_experiment(s, Experiment::DemoNonexistence, out) == kExitInvalidScenario);
  CHECK(read_json(out / "report.json").contains("refused"));
  CHECK(fs::exists(out / "manifest.json"));
}

TEST_CASE("batch runs each scenario's own experiment") {
  const fs::path dir = fresh_dir("batch_in");
  fs::create_directories(dir);
  std::ofstream(dir / "a.yaml") << kHyperbolic;
  std::ofstream(dir / "b.yaml") << "name: broken\n";
  std::vector<BatchItem> items;
  const fs::path out = fresh_dir("batch_out");
  CHECK(run_batch({dir / "a.yaml", dir / "b.yaml"}, out, {}, 2, &items) == kExitInvalidScenario);
  REQUIRE(items.size() == 2);
  CHECK(items[0].status == kExitOk);
  CHECK(items[1].status == kExitInvalidScenario);
  CHECK(fs::exists(out / "a" / "report.json"));
  CHECK(fs::exists(out / "batch.json"));
  CHECK(fs::exists(out / "manifest.json"));
}
