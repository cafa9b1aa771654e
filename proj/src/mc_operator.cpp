#include "pmc/mc_operator.hpp"

#include <cmath>

#include <fmt/format.h>

namespace pmc {

namespace {
constexpr int kMinNeighbors = 6;
}

PointOperator mean_curvature_point(const MetricData& metric, const Christoffels& gamma, const Jet& jet) {
  const Eigen::Matrix2d sinv = metric.sigma_inv;
  const Eigen::Vector2d& p = jet.grad;
  Eigen::Matrix2d cov = jet.hess;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) cov(i, j) -= gamma(0, i, j) * p(0) + gamma(1, i, j) * p(1);
  const Eigen::Vector2d up = sinv * p;
  const double W2 = 1.0 + p.dot(up);
  const double W = std::sqrt(W2);
  const Eigen::Matrix2d A = sinv - up * up.transpose() / W2;
  const double S = (A.array() * cov.array()).sum();

  PointOperator out;
  out.value = S / W;
  out.d_hess = A / W;
  for (int m = 0; m < 2; ++m) {
    double dS = 0.0;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        const double dq = (sinv(i, m) * up(j) + up(i) * sinv(j, m)) / W2 - 2.0 * up(i) * up(j) * up(m) / (W2 * W2);
        dS -= dq * cov(i, j) + A(i, j) * gamma(m, i, j);
      }
    out.d_grad(m) = dS / W - S * up(m) / (W2 * W);
  }
  return out;
}

Discretization::Discretization(const Mesh& mesh) : mesh_(&mesh) {
  const int nv = mesh.num_vertices();
  stencils_.resize(static_cast<std::size_t>(nv));
  metrics_.reserve(static_cast<std::size_t>(nv));
  gammas_.reserve(static_cast<std::size_t>(nv));
  for (int v = 0; v < nv; ++v) {
    const Vec2& x = mesh.vertices[static_cast<std::size_t>(v)];
    metrics_.push_back(metric_at(mesh.model, x));
    gammas_.push_back(christoffels_at(mesh.model, x));

    Stencil& st = stencils_[static_cast<std::size_t>(v)];
    st.nbrs = mesh.ring(v, 2);
    const auto m = static_cast<Eigen::Index>(st.nbrs.size());
    if (m < kMinNeighbors)
      throw StencilError(fmt::format("vertex {} has a degenerate stencil ({} neighbours)", v, m));
    double scale = 0.0;
    for (int j : st.nbrs) scale = std::max(scale, (mesh.vertices[static_cast<std::size_t>(j)] - x).norm());
    // Columns are scaled by powers of the stencil radius for conditioning;
    // weights depend on distance only, so symmetric stencils stay symmetric.
    Eigen::MatrixXd A(m, 5);
    Eigen::VectorXd w(m);
    for (Eigen::Index r = 0; r < m; ++r) {
      const Vec2 d = (mesh.vertices[static_cast<std::size_t>(st.nbrs[static_cast<std::size_t>(r)])] - x) / scale;
      A.row(r) << d.x(), d.y(), 0.5 * d.x() * d.x(), d.x() * d.y(), 0.5 * d.y() * d.y();
      w(r) = 1.0 / d.squaredNorm();
    }
    const Eigen::MatrixXd Aw = w.cwiseSqrt().asDiagonal() * A;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Aw);
    if (qr.rank() < 5) throw StencilError(fmt::format("vertex {} has a rank-deficient stencil", v));
    const Eigen::MatrixXd Wsqrt = w.cwiseSqrt().asDiagonal();
    st.coeff = qr.solve(Wsqrt);
    st.coeff.row(0) /= scale;
    st.coeff.row(1) /= scale;
    st.coeff.bottomRows(3) /= scale * scale;
  }
}

Jet Discretization::jet(int v, std::span<const double> u) const {
  const Stencil& st = stencil(v);
  Eigen::Matrix<double, 5, 1> c = Eigen::Matrix<double, 5, 1>::Zero();
  const double uv = u[static_cast<std::size_t>(v)];
  for (std::size_t j = 0; j < st.nbrs.size(); ++j)
    c += st.coeff.col(static_cast<Eigen::Index>(j)) * (u[static_cast<std::size_t>(st.nbrs[j])] - uv);
  Jet out;
  out.grad << c(0), c(1);
  out.hess << c(2), c(3), c(3), c(4);
  return out;
}

double Discretization::gradient_norm(int v, std::span<const double> u) const {
  const Eigen::Vector2d g = jet(v, u).grad;
  return std::sqrt(g.dot(metric(v).sigma_inv * g));
}

double Discretization::laplace_beltrami(int v, std::span<const double> u) const {
  const Jet j = jet(v, u);
  const Christoffels& G = christoffels(v);
  const Eigen::MatrixXd& sinv = metric(v).sigma_inv;
  double acc = 0.0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      acc += sinv(a, b) * (j.hess(a, b) - G(0, a, b) * j.grad(0) - G(1, a, b) * j.grad(1));
  return acc;
}

bool Discretization::stencil_defined(int v, std::span<const double> u) const {
  if (!std::isfinite(u[static_cast<std::size_t>(v)])) return false;
  for (int j : stencil(v).nbrs)
    if (!std::isfinite(u[static_cast<std::size_t>(j)])) return false;
  return true;
}

ScalarField mc_operator(const Discretization& disc, const ScalarField& u) {
  const Mesh& mesh = disc.mesh();
  ScalarField out(mesh);
  for (int v : mesh.interior)
    out[static_cast<std::size_t>(v)] =
        mean_curvature_point(disc.metric(v), disc.christoffels(v), disc.jet(v, u.values())).value;
  return out;
}

double q_at(const Discretization& disc, const PrescribedH& H, int v, std::span<const double> u) {
  const auto i = static_cast<std::size_t>(v);
  const double m = mean_curvature_point(disc.metric(v), disc.christoffels(v), disc.jet(v, u)).value;
  return m - disc.mesh().model.dim * H(disc.mesh().vertices[i], u[i]);
}

ScalarField q_operator(const Discretization& disc, const PrescribedH& H, const ScalarField& u) {
  const Mesh& mesh = disc.mesh();
  ScalarField out(mesh);
  for (int v : mesh.interior) out[static_cast<std::size_t>(v)] = q_at(disc, H, v, u.values());
  return out;
}

}  // namespace pmc
