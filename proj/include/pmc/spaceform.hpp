#pragma once

// Differential geometry of the constant-curvature model spaces in the charts
// used throughout the library:
//
//   euclidean-cartesian   K = 0, sigma = identity
//   poincare-disk         K < 0, sigma = 4 / (|K| (1 - |x|^2)^2) * identity
//   sphere-polar          K > 0, geodesic normal coordinates about a pole,
//                         sigma = dr^2 + (sin(sqrt(K) r) / sqrt(K))^2 dtheta^2
//
// All functions are pure and accept chart points of any dimension n >= 2.

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace pmc {

enum class Chart { EuclideanCartesian, PoincareDisk, SpherePolar };

std::string_view to_string(Chart chart);
Chart chart_from_string(std::string_view name);

class ChartError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Thrown when a parallel-surface Riccati solution blows up before the
/// requested depth. `focal_distance` is the depth at which |lambda| > 1e6.
class FocalDistanceError : public std::domain_error {
 public:
  FocalDistanceError(double focal_distance, const std::string& what)
      : std::domain_error(what), focal_distance_(focal_distance) {}
  double focal_distance() const noexcept { return focal_distance_; }

 private:
  double focal_distance_;
};

struct ManifoldModel {
  double curvature = 0.0;
  int dim = 2;
  Chart chart = Chart::EuclideanCartesian;

  static ManifoldModel euclidean(int n = 2) { return {0.0, n, Chart::EuclideanCartesian}; }
  static ManifoldModel hyperbolic(double K = -1.0, int n = 2) { return {K, n, Chart::PoincareDisk}; }
  static ManifoldModel sphere(double K = 1.0, int n = 2) { return {K, n, Chart::SpherePolar}; }

  /// Throws ChartError if the chart and curvature sign disagree or dim < 2.
  void validate() const;

  /// Ricci curvature of the space form in every unit direction, (n-1) K.
  double ricci() const { return (dim - 1) * curvature; }

  /// True if x lies strictly inside the chart's coordinate domain.
  bool in_chart(const Eigen::Ref<const Eigen::VectorXd>& x) const;
};

struct MetricData {
  Eigen::MatrixXd sigma;
  Eigen::MatrixXd sigma_inv;
  double sqrt_det = 1.0;
};

/// Christoffel symbols of the second kind, stored densely as Gamma^k_{ij}.
class Christoffels {
 public:
  explicit Christoffels(int n) : n_(n), data_(static_cast<std::size_t>(n * n * n), 0.0) {}
  int dim() const { return n_; }
  double operator()(int k, int i, int j) const { return data_[index(k, i, j)]; }
  double& operator()(int k, int i, int j) { return data_[index(k, i, j)]; }

 private:
  std::size_t index(int k, int i, int j) const {
    return static_cast<std::size_t>((k * n_ + i) * n_ + j);
  }
  int n_;
  std::vector<double> data_;
};

MetricData metric_at(const ManifoldModel& model, const Eigen::Ref<const Eigen::VectorXd>& x);

Christoffels christoffels_at(const ManifoldModel& model, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Geodesic distance in the model metric.
double distance(const ManifoldModel& model, const Eigen::Ref<const Eigen::VectorXd>& x,
                const Eigen::Ref<const Eigen::VectorXd>& y);

/// ct_K(rho): sqrt(K) cot(sqrt(K) rho), 1/rho or sqrt(-K) coth(sqrt(-K) rho).
double cot_k(double K, double rho);

/// Laplacian of the distance from a point, (n-1) ct_K(rho). Equality case of
/// the Laplacian comparison theorem on a space form.
double laplacian_rho(const ManifoldModel& model, double rho);

/// Laplacian of d = dist(., S) at depth t along the inner normal of a curve S
/// with geodesic curvature kappa0 (inner normal convention) in a surface of
/// curvature K. Solves lambda' = -lambda^2 - K, lambda(0) = -kappa0 with an
/// adaptive Dormand-Prince integrator. n must be 2.
///
/// Throws FocalDistanceError when the solution blows up at or before t.
double riccati_laplacian_d(const ManifoldModel& model, double kappa0, double t);

/// Depth at which the Riccati solution above blows up, or +infinity if it
/// stays bounded up to `horizon`.
double focal_distance(const ManifoldModel& model, double kappa0, double horizon);

}  // namespace pmc
