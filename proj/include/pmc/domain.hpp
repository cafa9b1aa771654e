#pragma once

// Bounded chart domains described by closed parametric boundary curves.
//
// Every curve is 2*pi periodic in its parameter t. A component is oriented so
// that the leftward normal of d/dt gamma points into the domain; hole
// boundaries are therefore traversed clockwise.

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pmc/spaceform.hpp"

namespace pmc {

using Vec2 = Eigen::Vector2d;

struct CurvePoint {
  Vec2 p;   ///< gamma(t)
  Vec2 d1;  ///< gamma'(t)
  Vec2 d2;  ///< gamma''(t)
};

class Curve {
 public:
  virtual ~Curve() = default;
  virtual CurvePoint eval(double t) const = 0;
  virtual std::string describe() const = 0;
};

std::shared_ptr<const Curve> make_ellipse_curve(Vec2 center, double a, double b, double angle = 0.0);
std::shared_ptr<const Curve> make_circle_curve(Vec2 center, double radius);

/// r(theta) = a0 + sum_k (cos_k[k-1] cos(k theta) + sin_k[k-1] sin(k theta)).
std::shared_ptr<const Curve> make_fourier_curve(Vec2 center, double a0, std::vector<double> cos_k,
                                                std::vector<double> sin_k);

/// Superellipse (cos^p/a^p + sin^p/b^p)^(-1/p) with even p: a C-infinity
/// rounded rectangle.
std::shared_ptr<const Curve> make_superellipse_curve(Vec2 center, double a, double b, int p = 4);

class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Rigid motion applied to every boundary curve (rotation about the chart
/// origin, then translation).
struct Placement {
  double angle = 0.0;
  Vec2 shift = Vec2::Zero();

  Vec2 apply(const Vec2& p) const { return rotation() * p + shift; }
  Vec2 apply_vector(const Vec2& v) const { return rotation() * v; }
  Eigen::Matrix2d rotation() const {
    Eigen::Matrix2d R;
    R << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
    return R;
  }
};

struct BoundaryComponent {
  std::shared_ptr<const Curve> curve;
  bool reversed = false;
};

struct BoundaryPoint {
  int component = 0;
  double t = 0.0;
};

class DomainSpec {
 public:
  DomainSpec() = default;
  DomainSpec(ManifoldModel model, std::vector<BoundaryComponent> components, std::string label,
             Placement placement = {});

  const ManifoldModel& model() const { return model_; }
  const std::string& label() const { return label_; }
  const Placement& placement() const { return placement_; }
  int num_components() const { return static_cast<int>(components_.size()); }

  /// gamma(t) with orientation and placement applied.
  CurvePoint eval(int component, double t) const;
  /// Same curve without the placement, in the local frame used for meshing.
  CurvePoint eval_local(int component, double t) const;

  /// Euclidean chart length of a component.
  double chart_length(int component) const;

  /// Closed polyline through `samples` equally spaced parameter values.
  std::vector<Vec2> polyline(int component, int samples) const;

  /// Even-odd point-in-domain test against fine boundary polylines.
  bool contains(const Vec2& p) const;

  /// Intrinsic diameter estimated from pairwise distances of boundary samples.
  double diameter(int samples_per_component = 256) const;

  /// Max intrinsic distance from `y` to the boundary samples.
  double max_distance_from(const Vec2& y, int samples_per_component = 256) const;

  /// Throws DomainError on self-intersecting or overlapping curves, wrong
  /// orientation, points outside the chart, or a spherical domain whose
  /// diameter is not below pi / (2 sqrt K).
  void validate() const;

  DomainSpec with_placement(Placement placement) const;

 private:
  ManifoldModel model_;
  std::vector<BoundaryComponent> components_;
  std::string label_;
  Placement placement_;
  std::vector<std::vector<Vec2>> fine_polylines_;
};

// Named primitives. Radii are chart radii unless stated otherwise.
DomainSpec make_disc(const ManifoldModel& model, Vec2 center, double radius);
/// Disc of intrinsic radius r centred at the chart origin.
DomainSpec make_geodesic_disc(const ManifoldModel& model, double intrinsic_radius);
DomainSpec make_annulus(const ManifoldModel& model, Vec2 center, double inner_radius, double outer_radius);
DomainSpec make_ellipse(const ManifoldModel& model, Vec2 center, double a, double b, double angle = 0.0);
DomainSpec make_rounded_rectangle(const ManifoldModel& model, Vec2 center, double half_width,
                                  double half_height, int power = 4);
/// Peanut shape r(theta) = radius (1 + waist cos 2 theta); non-convex for waist > 0.2.
DomainSpec make_dumbbell(const ManifoldModel& model, Vec2 center, double radius, double waist);
DomainSpec make_fourier_domain(const ManifoldModel& model, Vec2 center, double a0, std::vector<double> cos_k,
                               std::vector<double> sin_k);

/// Chart radius of the geodesic circle of intrinsic radius r about the origin.
double chart_radius_of_geodesic_circle(const ManifoldModel& model, double intrinsic_radius);

}  // namespace pmc
