#include "pmc/fields.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

namespace pmc {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

ScalarField::ScalarField(const Mesh& mesh, std::vector<double> values) : mesh_(&mesh), values_(std::move(values)) {
  if (values_.size() != static_cast<std::size_t>(mesh.num_vertices())) {
    throw std::invalid_argument(
        fmt::format("field has {} values for a mesh with {} vertices", values_.size(), mesh.num_vertices()));
  }
}

bool ScalarField::all_finite() const {
  for (double v : values_)
    if (!std::isfinite(v)) return false;
  return true;
}

namespace {

// Left normal of the tangent, made sigma-orthogonal to it and sigma-unit.
Vec2 metric_left_normal(const MetricData& m, const Vec2& tangent) {
  const Eigen::Matrix2d sigma = m.sigma;
  Vec2 n(-tangent.y(), tangent.x());
  n -= (n.dot(sigma * tangent) / tangent.dot(sigma * tangent)) * tangent;
  return n / std::sqrt(n.dot(sigma * n));
}

}  // namespace

Vec2 boundary_inner_normal(const DomainSpec& spec, BoundaryPoint at) {
  const CurvePoint cp = spec.eval(at.component, at.t);
  return metric_left_normal(metric_at(spec.model(), cp.p), cp.d1);
}

double boundary_mean_curvature(const DomainSpec& spec, BoundaryPoint at) {
  const CurvePoint cp = spec.eval(at.component, at.t);
  const MetricData m = metric_at(spec.model(), cp.p);
  const Christoffels gamma = christoffels_at(spec.model(), cp.p);
  // Covariant acceleration D_t gamma' = gamma'' + Gamma(gamma', gamma').
  Vec2 accel = cp.d2;
  for (int k = 0; k < 2; ++k)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) accel(k) += gamma(k, i, j) * cp.d1(i) * cp.d1(j);
  const Eigen::Matrix2d sigma = m.sigma;
  const Vec2 normal = metric_left_normal(m, cp.d1);
  const double speed2 = cp.d1.dot(sigma * cp.d1);
  return accel.dot(sigma * normal) / speed2;
}

ScalarField distance_to_point_field(const Mesh& mesh, const Vec2& y0) {
  ScalarField rho(mesh);
  for (int v = 0; v < mesh.num_vertices(); ++v)
    rho[static_cast<std::size_t>(v)] = distance(mesh.model, mesh.vertices[static_cast<std::size_t>(v)], y0);
  return rho;
}

bool BoundaryWindow::full() const { return t_end - t_begin >= kTwoPi * (1.0 - 1e-12); }

BoundaryDistanceField distance_to_boundary_field(const Mesh& mesh, const DomainSpec& spec,
                                                 const BoundaryWindow& window) {
  constexpr int kCoarse = 64;
  constexpr int kPolish = 3;
  if (!(window.t_end > window.t_begin)) throw std::invalid_argument("empty boundary window");
  const double span = window.t_end - window.t_begin;
  const bool full = window.full();
  const auto& model = mesh.model;

  BoundaryDistanceField out{ScalarField(mesh), std::vector<double>(static_cast<std::size_t>(mesh.num_vertices())),
                            std::vector<char>(static_cast<std::size_t>(mesh.num_vertices()), 0)};

  std::vector<double> coarse_t(kCoarse + 1);
  std::vector<Vec2> coarse_p(kCoarse + 1);
  for (int i = 0; i <= kCoarse; ++i) {
    coarse_t[static_cast<std::size_t>(i)] = window.t_begin + span * i / kCoarse;
    coarse_p[static_cast<std::size_t>(i)] = spec.eval(window.component, coarse_t[static_cast<std::size_t>(i)]).p;
  }
  const double fd = 1e-5 * span;

  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const Vec2& x = mesh.vertices[static_cast<std::size_t>(v)];
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= kCoarse; ++i) {
      const double d = distance(model, x, coarse_p[static_cast<std::size_t>(i)]);
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    double t = coarse_t[static_cast<std::size_t>(best)];
    auto g = [&](double s) {
      const double d = distance(model, x, spec.eval(window.component, s).p);
      return d * d;
    };
    for (int it = 0; it < kPolish; ++it) {
      const double gm = g(t - fd), g0 = g(t), gp = g(t + fd);
      const double d1 = (gp - gm) / (2.0 * fd);
      const double d2 = (gp - 2.0 * g0 + gm) / (fd * fd);
      if (!(d2 > 0.0)) break;
      double next = t - d1 / d2;
      if (!full) next = std::clamp(next, window.t_begin, window.t_end);
      if (std::abs(next - t) > span / kCoarse) next = t + std::copysign(span / kCoarse, next - t);
      t = next;
    }
    const double d = std::sqrt(std::max(0.0, g(t)));
    out.d[static_cast<std::size_t>(v)] = d;
    out.foot[static_cast<std::size_t>(v)] = t;

    bool ok = true;
    if (!full) {
      const double margin = 0.5 * span / kCoarse;
      ok = (t - window.t_begin > margin) && (window.t_end - t > margin);
    }
    if (ok && d > 0.0) {
      const double kappa = boundary_mean_curvature(spec, {window.component, t});
      ok = std::isinf(focal_distance(model, kappa, d));
    }
    out.valid[static_cast<std::size_t>(v)] = ok ? 1 : 0;
  }
  return out;
}

}  // namespace pmc
