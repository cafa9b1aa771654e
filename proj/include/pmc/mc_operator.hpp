#pragma once

// Discrete mean curvature operator
//
//   M u = (1/W) (sigma^ij - u^i u^j / W^2) (d_ij u - Gamma^k_ij d_k u),
//   Q u = M u - n H(x, u),
//
// with chart derivatives of u from a vertex-centred weighted least-squares
// quadratic fit over the 2-ring of each vertex.

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "pmc/fields.hpp"
#include "pmc/prescribed_h.hpp"

namespace pmc {

class StencilError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// First and second chart derivatives at a vertex.
struct Jet {
  Eigen::Vector2d grad = Eigen::Vector2d::Zero();
  Eigen::Matrix2d hess = Eigen::Matrix2d::Zero();
};

/// Least-squares stencil: rows of `coeff` map (u_j - u_v) over `nbrs` to
/// (d1, d2, d11, d12, d22).
struct Stencil {
  std::vector<int> nbrs;
  Eigen::Matrix<double, 5, Eigen::Dynamic> coeff;
};

/// M at one point and its partial derivatives with respect to the chart
/// gradient and Hessian of u.
struct PointOperator {
  double value = 0.0;
  Eigen::Vector2d d_grad = Eigen::Vector2d::Zero();
  Eigen::Matrix2d d_hess = Eigen::Matrix2d::Zero();
};

PointOperator mean_curvature_point(const MetricData& metric, const Christoffels& gamma, const Jet& jet);

class Discretization {
 public:
  explicit Discretization(const Mesh& mesh);

  const Mesh& mesh() const { return *mesh_; }
  const Stencil& stencil(int v) const { return stencils_[static_cast<std::size_t>(v)]; }
  const MetricData& metric(int v) const { return metrics_[static_cast<std::size_t>(v)]; }
  const Christoffels& christoffels(int v) const { return gammas_[static_cast<std::size_t>(v)]; }

  Jet jet(int v, std::span<const double> u) const;
  /// Model norm of the gradient, sqrt(sigma^ij d_i u d_j u).
  double gradient_norm(int v, std::span<const double> u) const;
  /// Laplace-Beltrami sigma^ij (d_ij u - Gamma^k_ij d_k u).
  double laplace_beltrami(int v, std::span<const double> u) const;
  /// True if u is finite at v and at all its stencil vertices.
  bool stencil_defined(int v, std::span<const double> u) const;

 private:
  const Mesh* mesh_;
  std::vector<Stencil> stencils_;
  std::vector<MetricData> metrics_;
  std::vector<Christoffels> gammas_;
};

/// M u at interior vertices; boundary entries are 0.
ScalarField mc_operator(const Discretization& disc, const ScalarField& u);
/// Q u = M u - n H(x, u) at interior vertices; boundary entries are 0.
ScalarField q_operator(const Discretization& disc, const PrescribedH& H, const ScalarField& u);
/// Q at a single vertex.
double q_at(const Discretization& disc, const PrescribedH& H, int v, std::span<const double> u);

}  // namespace pmc
