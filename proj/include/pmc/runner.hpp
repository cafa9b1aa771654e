#pragma once

// Pipelines behind the command-line subcommands and the artifact set each
// one writes. Output formats are documented in docs/artifacts.md.

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pmc/fields.hpp"
#include "pmc/scenario.hpp"

namespace pmc {

enum ExitCode : int {
  kExitOk = 0,
  kExitError = 1,
  kExitInvalidScenario = 2,
  kExitSolveFailed = 3,
  kExitBarrierFailed = 4,
};

/// %.17g, with "nan", "inf" and "-inf" for non-finite values.
std::string format_real(double x);

/// JSON text with every floating-point number written by format_real and
/// non-finite numbers as null. Two-space indentation.
std::string dump_json(const nlohmann::ordered_json& j);

/// Writes files into one output directory and records their hashes.
class ArtifactWriter {
 public:
  explicit ArtifactWriter(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }
  void write(const std::string& name, const std::string& contents);
  /// vertex,x,y,value per vertex.
  void write_field(const std::string& name, const ScalarField& f);
  /// manifest.json listing every file written so far, sorted by name.
  void write_manifest(const std::string& scenario_sha256);

 private:
  struct Entry {
    std::string name;
    std::string sha256;
    std::size_t bytes = 0;
  };
  std::filesystem::path dir_;
  std::vector<Entry> entries_;
};

/// Runs one experiment on a loaded scenario, writing report.json, CSV
/// artifacts and manifest.json into `out`. Returns the exit status.
int run_experiment(const Scenario& scenario, Experiment experiment, const std::filesystem::path& out);

struct BatchItem {
  std::filesystem::path scenario;
  std::filesystem::path out;
  int status = 0;
  std::string error;
};

/// Runs every scenario with its own experiment into out/<stem>/, `jobs` at a
/// time. Writes batch.json and a manifest into `out`. Returns the largest
/// status among the items.
int run_batch(const std::vector<std::filesystem::path>& scenarios, const std::filesystem::path& out,
              const ScenarioOverrides& overrides, int jobs, std::vector<BatchItem>* items = nullptr);

}  // namespace pmc
