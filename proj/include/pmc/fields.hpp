#pragma once

#include <span>
#include <vector>

#include "pmc/mesh.hpp"

namespace pmc {

/// One real value per mesh vertex.
class ScalarField {
 public:
  explicit ScalarField(const Mesh& mesh, double fill = 0.0)
      : mesh_(&mesh), values_(static_cast<std::size_t>(mesh.num_vertices()), fill) {}
  ScalarField(const Mesh& mesh, std::vector<double> values);

  const Mesh& mesh() const { return *mesh_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  bool all_finite() const;

 private:
  const Mesh* mesh_;
  std::vector<double> values_;
};

/// Geodesic curvature of the boundary curve in the model metric, signed with
/// respect to the inner normal (a circle bounding a disc has positive
/// curvature, the hole of an annulus negative).
double boundary_mean_curvature(const DomainSpec& spec, BoundaryPoint at);

/// Unit inner normal of the boundary in the model metric, in chart components.
Vec2 boundary_inner_normal(const DomainSpec& spec, BoundaryPoint at);

/// rho(x) = dist(x, y0) at every vertex.
ScalarField distance_to_point_field(const Mesh& mesh, const Vec2& y0);

/// A boundary arc t in [t_begin, t_end] of one component (unwrapped
/// parameters). A full component is [t0, t0 + 2 pi].
struct BoundaryWindow {
  int component = 0;
  double t_begin = 0.0;
  double t_end = 0.0;
  bool full() const;
};

struct BoundaryDistanceField {
  ScalarField d;
  std::vector<double> foot;    ///< foot-point parameter on S
  std::vector<char> valid;     ///< inside the focal region of S
};

/// d(x) = dist(x, S) for the boundary arc S. A vertex is valid when its foot
/// point is interior to the window and d is below the focal distance at the
/// foot point.
BoundaryDistanceField distance_to_boundary_field(const Mesh& mesh, const DomainSpec& spec,
                                                 const BoundaryWindow& window);

}  // namespace pmc
