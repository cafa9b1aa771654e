#pragma once

// Scenario files: one YAML document per experiment. The schema is documented
// in docs/scenario.md.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pmc/demo.hpp"
#include "pmc/domain.hpp"
#include "pmc/prescribed_h.hpp"
#include "pmc/solver.hpp"

namespace pmc {

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Experiment { Analyze, Solve, VerifyBarriers, DemoNonexistence };
std::string_view to_string(Experiment e);
Experiment experiment_from_string(std::string_view name);

enum class DataKind { Zero, Constant, Expression, Table };

struct BoundaryDataSpec {
  DataKind kind = DataKind::Zero;
  double value = 0.0;
  std::string source;  ///< expression in x1, x2
  std::vector<std::pair<int, double>> table;  ///< (vertex id, value); unlisted vertices get `value`
};

struct BarrierSettings {
  std::optional<BoundaryPoint> y0;  ///< argmin of the margin when empty
  double k = 0.0;
  double eps_factor = 0.1;      ///< eps = eps_factor * a for v
  double refine_divisor = 20.0;  ///< h_min = a / refine_divisor near y0
};

/// Command-line overrides, applied before validation.
struct ScenarioOverrides {
  std::optional<double> mesh_h;
  std::optional<double> tol;  ///< Newton tolerance of every solve
  std::optional<std::uint64_t> seed;
};

struct Scenario {
  std::string name;
  Experiment experiment = Experiment::Analyze;
  ManifoldModel model;
  DomainSpec domain;
  PrescribedH H = PrescribedH::constant(0.0);
  BoundaryDataSpec data;
  double mesh_h = 0.1;
  double classify_tol = 1e-9;
  SolveOptions solver;
  DemoOptions demo;
  BarrierSettings barriers;
  std::uint64_t seed = 1;
  std::string source_text;  ///< file contents, for hashing
  std::string sha256;
  ScenarioOverrides overrides;
};

/// Parses and validates a scenario. Declared H sign and monotonicity are
/// spot-checked at 1000 probes over the domain's bounding box and declared
/// z-range. Throws ScenarioError with a diagnostic on any problem.
Scenario load_scenario(const std::filesystem::path& path, const ScenarioOverrides& overrides = {});
Scenario parse_scenario(const std::string& text, const std::string& origin = "<string>",
                        const ScenarioOverrides& overrides = {});

/// Hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);

}  // namespace pmc
