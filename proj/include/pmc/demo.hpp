#pragma once

// Paired non-existence experiment: boundary data built to defeat any solution
// at a point where the Serrin margin is negative, solved next to a control
// that differs only in the violated quantity.

#include <memory>
#include <optional>
#include <stdexcept>

#include "pmc/barriers.hpp"
#include "pmc/serrin.hpp"
#include "pmc/solver.hpp"

namespace pmc {

class DemoRefused : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ControlKind {
  ScaledH,        ///< same data, H scaled until the margin turns positive
  OtherBoundary,  ///< same H, spike moved to the point of largest margin
};
std::string_view to_string(ControlKind k);

struct DemoOptions {
  double mesh_h = 0.1;
  /// h_min = a / refine_divisor within refine_radius_factor * a of the spike.
  double refine_divisor = 20.0;
  double refine_radius_factor = 1.5;
  double safety_factor = 2.0;
  double k = 0.0;
  double growth_threshold = 1e3;
  std::optional<ControlKind> control;  ///< chosen automatically when empty
  std::optional<double> control_scale;  ///< ScaledH only; mirrored margin when empty
  SolveOptions solver = default_solver();

  /// Continuation that opens geometrically: the first increments carry the
  /// data from flat to steep and need the smallest steps.
  static SolveOptions default_solver();
};

struct DemoRun {
  std::string label;
  PrescribedH H;
  Vec2 spike = Vec2::Zero();
  double margin = 0.0;  ///< min Serrin margin of this run's H
  SolveReport report;
  double initial_gradient = 0.0;
  double final_gradient = 0.0;  ///< at the last converged continuation parameter
  double gradient_distance = 0.0;  ///< distance of the max-gradient vertex from the spike
  bool localized = false;
  std::optional<ScalarField> data;
};

struct DemoReport {
  SerrinReport serrin;
  LemmaConstants constants;
  HeightBound bound;
  double eps = 0.0;
  ControlKind control_kind = ControlKind::ScaledH;
  double control_scale = 1.0;
  std::shared_ptr<const Mesh> mesh;
  double h_min = 0.0;
  DemoRun violating;
  DemoRun control;
  bool nonexistence_detected = false;
  bool control_converged = false;
};

/// Throws DemoRefused unless classify reports ViolatedAt, and BarrierError or
/// FailingDataError when the constants or the data cannot be built.
DemoReport demo_nonexistence(const DomainSpec& spec, const PrescribedH& H, const DemoOptions& options = {});

}  // namespace pmc
