#pragma once

#include <string>
#include <vector>

#include "pmc/fields.hpp"
#include "pmc/prescribed_h.hpp"

namespace pmc {

/// (n-1) H_boundary(y) - n sup_z |H(y, z)| at the boundary point.
double serrin_margin(const DomainSpec& spec, const PrescribedH& H, BoundaryPoint at);

enum class Verdict { StrongSerrinHolds, ViolatedAt, Indeterminate };
std::string_view to_string(Verdict v);

enum class Direction { Existence, NonExistence, Equivalence };
std::string_view to_string(Direction d);

struct Hypothesis {
  std::string name;
  bool holds = false;
};

struct TheoremCheck {
  std::string id;     ///< short identifier, e.g. "hadamard-minimal"
  std::string title;  ///< one-line statement of the criterion
  Direction direction = Direction::Equivalence;
  std::vector<Hypothesis> hypotheses;
  bool applies() const;
};

struct MarginSample {
  BoundaryPoint at;
  Vec2 point = Vec2::Zero();
  double curvature = 0.0;
  double sup_abs_h = 0.0;
  double margin = 0.0;
};

struct RicciCheck {
  bool holds = false;
  int worst_vertex = -1;
  double slack = 0.0;  ///< min over vertices of Ric - (n sup|grad H| - n^2/(n-1) inf H^2)
};

struct SerrinReport {
  std::vector<MarginSample> samples;
  double min_margin = 0.0;
  MarginSample argmin;
  Verdict verdict = Verdict::Indeterminate;
  std::vector<TheoremCheck> theorems;
  RicciCheck ricci;
  std::vector<int> samples_per_component;  ///< margin sampling resolution
  double tolerance = 1e-9;
  bool z_extrema_exact = true;
};

/// Ric >= n sup_z |grad_x H| - n^2/(n-1) inf_z H^2 at every mesh vertex, with
/// Ric = (n-1) K on a space form.
RicciCheck ricci_condition_check(const ManifoldModel& model, const PrescribedH& H, const Mesh& mesh);

/// Samples the margin at 4x the mesh boundary resolution, evaluates the
/// hypotheses of every applicable criterion and combines them with the margin
/// sign. Never guesses: with no applicable criterion the verdict is
/// Indeterminate.
SerrinReport classify(const DomainSpec& spec, const PrescribedH& H, const Mesh& mesh, double tolerance = 1e-9);

class FailingDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// k + eps chi(dist(x, y0) / a) with chi(s) = exp(1 - 1/(1 - s^2)) for s < 1
/// and 0 otherwise, at every vertex. Throws if no boundary vertex other than
/// y0 lies inside B_a(y0).
ScalarField generate_failing_data(const Mesh& mesh, const Vec2& y0, double a, double k, double eps);

/// The cutoff chi(s).
double bump(double s);

}  // namespace pmc
