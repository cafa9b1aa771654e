// Command-line front end: pmc <subcommand> --scenario FILE --out DIR.
//
// Log verbosity comes from PMC_LOG (trace, debug, info, warn, error, off);
// the default is info.

#include <cstdlib>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>
#include <spdlog/cfg/env.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "pmc/runner.hpp"
#include "pmc/scenario.hpp"

namespace fs = std::filesystem;

namespace {

void setup_logging() {
  spdlog::set_default_logger(spdlog::stderr_color_mt("pmc"));
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::info);
  if (const char* level = std::getenv("PMC_LOG")) {
    const auto parsed = spdlog::level::from_str(level);
    if (parsed == spdlog::level::off && std::string(level) != "off") {
      spdlog::warn("ignoring unknown PMC_LOG level '{}'", level);
    } else {
      spdlog::set_level(parsed);
    }
  }
}

std::vector<fs::path> expand(const std::vector<std::string>& inputs) {
  std::vector<fs::path> files;
  for (const std::string& in : inputs) {
    if (fs::is_directory(in)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::directory_iterator(in)) {
        const auto ext = e.path().extension();
        if (e.is_regular_file() && (ext == ".yaml" || ext == ".yml")) found.push_back(e.path());
      }
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else {
      files.emplace_back(in);
    }
  }
  return files;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Prescribed mean curvature graphs over space-form domains"};
  app.require_subcommand(1);

  std::vector<std::string> scenario_inputs;
  std::string out_dir;
  pmc::ScenarioOverrides overrides;
  int jobs = 1;

  auto add_common = [&](CLI::App* sub, bool many) {
    if (many) {
      sub->add_option("--scenario", scenario_inputs, "Scenario files or directories of *.yaml")->required();
    } else {
      sub->add_option("--scenario", scenario_inputs, "Scenario file")->required()->expected(1);
    }
    sub->add_option("--out", out_dir, "Output directory")->required();
    sub->add_option("--mesh-h", overrides.mesh_h, "Override solver.h");
    sub->add_option("--tol", overrides.tol, "Override the Newton tolerance");
    sub->add_option("--seed", overrides.seed, "Override the scenario seed");
  };

  const std::vector<std::pair<std::string, pmc::Experiment>> experiments = {
      {"analyze", pmc::Experiment::Analyze},
      {"solve", pmc::Experiment::Solve},
      {"verify-barriers", pmc::Experiment::VerifyBarriers},
      {"demo-nonexistence", pmc::Experiment::DemoNonexistence},
  };
  std::vector<CLI::App*> subs;
  for (const auto& [name, e] : experiments) {
    CLI::App* sub = app.add_subcommand(name, fmt::format("Run the {} pipeline on one scenario", name));
    add_common(sub, false);
    subs.push_back(sub);
  }
  CLI::App* batch = app.add_subcommand("batch", "Run each scenario's own experiment, one output directory each");
  add_common(batch, true);
  batch->add_option("--jobs", jobs, "Scenarios run concurrently")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : pmc::kExitInvalidScenario;
  }

  try {
    if (batch->parsed()) {
      return pmc::run_batch(expand(scenario_inputs), out_dir, overrides, jobs);
    }
    for (std::size_t i = 0; i < subs.size(); ++i) {
      if (!subs[i]->parsed()) continue;
      const pmc::Scenario s = pmc::load_scenario(scenario_inputs.front(), overrides);
      return pmc::run_experiment(s, experiments[i].second, out_dir);
    }
  } catch (const pmc::ScenarioError& e) {
    spdlog::error("{}", e.what());
    return pmc::kExitInvalidScenario;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return pmc::kExitError;
  }
  return pmc::kExitError;
}
