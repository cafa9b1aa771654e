#include "pmc/serrin.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

namespace pmc {

namespace {
constexpr double kPi = std::numbers::pi;
}

double serrin_margin(const DomainSpec& spec, const PrescribedH& H, BoundaryPoint at) {
  const int n = spec.model().dim;
  const Vec2 p = spec.eval(at.component, at.t).p;
  return (n - 1) * boundary_mean_curvature(spec, at) - n * H.sup_abs_over_z(p);
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::StrongSerrinHolds:
      return "StrongSerrinHolds";
    case Verdict::ViolatedAt:
      return "ViolatedAt";
    case Verdict::Indeterminate:
      return "Indeterminate";
  }
  return "Indeterminate";
}

std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::Existence:
      return "existence";
    case Direction::NonExistence:
      return "non-existence";
    case Direction::Equivalence:
      return "if-and-only-if";
  }
  return "if-and-only-if";
}

bool TheoremCheck::applies() const {
  for (const auto& h : hypotheses)
    if (!h.holds) return false;
  return true;
}

RicciCheck ricci_condition_check(const ManifoldModel& model, const PrescribedH& H, const Mesh& mesh) {
  const int n = model.dim;
  RicciCheck out;
  out.slack = std::numeric_limits<double>::infinity();
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const Vec2& x = mesh.vertices[static_cast<std::size_t>(v)];
    const Eigen::Matrix2d sinv = metric_at(model, x).sigma_inv;
    const double rhs = n * H.grad_x_sup_norm(x, sinv) - double(n * n) / (n - 1) * H.inf_sq_over_z(x);
    const double slack = model.ricci() - rhs;
    if (slack < out.slack) {
      out.slack = slack;
      out.worst_vertex = v;
    }
  }
  out.holds = out.slack >= 0.0;
  return out;
}

SerrinReport classify(const DomainSpec& spec, const PrescribedH& H, const Mesh& mesh, double tolerance) {
  const auto& model = spec.model();
  const int n = model.dim;
  const double K = model.curvature;
  SerrinReport rep;
  rep.tolerance = tolerance;
  rep.z_extrema_exact = H.z_extrema_exact();

  std::vector<int> per(static_cast<std::size_t>(spec.num_components()), 0);
  for (const auto& b : mesh.boundary) ++per[static_cast<std::size_t>(b.component)];
  rep.min_margin = std::numeric_limits<double>::infinity();
  for (int c = 0; c < spec.num_components(); ++c) {
    const int count = 4 * per[static_cast<std::size_t>(c)];
    rep.samples_per_component.push_back(count);
    for (int i = 0; i < count; ++i) {
      MarginSample s;
      s.at = {c, 2.0 * kPi * i / count};
      s.point = spec.eval(c, s.at.t).p;
      s.curvature = boundary_mean_curvature(spec, s.at);
      s.sup_abs_h = H.sup_abs_over_z(s.point);
      s.margin = (n - 1) * s.curvature - n * s.sup_abs_h;
      rep.min_margin = std::min(rep.min_margin, s.margin);
      rep.samples.push_back(s);
    }
  }
  // Ties within round-off go to the first sample, so the argmin on a circle
  // does not wander with floating-point noise.
  const double tie = 1e-12 * std::max(1.0, std::abs(rep.min_margin));
  for (const auto& s : rep.samples) {
    if (s.margin <= rep.min_margin + tie) {
      rep.argmin = s;
      break;
    }
  }

  rep.ricci = ricci_condition_check(model, H, mesh);

  // Hypotheses shared by several criteria.
  const bool sign_definite = H.sign() != HSign::Mixed;
  const bool nondecreasing = H.z_nondecreasing();
  const bool constant = H.is_constant();
  const bool minimal = constant && H.constant_value() == 0.0;
  const bool hadamard = K <= 0.0;
  const bool hyperbolic = K < 0.0;
  const bool positive = K > 0.0;
  const double quarter_pi = positive ? kPi / (2.0 * std::sqrt(K)) : std::numeric_limits<double>::infinity();
  const double diameter = spec.diameter(512);
  const bool small_diameter = positive && diameter < quarter_pi;
  const Vec2 y0 = rep.argmin.point;
  const bool reach_ok = !positive || spec.max_distance_from(y0, 1024) < quarter_pi;
  // H range 0 <= H <= (n-1)/n, rescaled to curvature K = -s^2 by s.
  bool h_range = false;
  if (hyperbolic && H.sign() == HSign::Nonnegative && nondecreasing) {
    const double cap = (n - 1) * std::sqrt(-K) / n;
    h_range = true;
    for (int v = 0; v < mesh.num_vertices() && h_range; ++v)
      h_range = H.sup_abs_over_z(mesh.vertices[static_cast<std::size_t>(v)]) <= cap + 1e-15;
  }

  rep.theorems = {
      {"main",
       "non-existence at y0 when the radial curvature from y0 is at most K0 (K0 <= 0, or K0 > 0 with "
       "dist(y0, x) < pi/(2 sqrt K0))",
       Direction::NonExistence,
       {{"H sign-definite", sign_definite},
        {"H nondecreasing in z", nondecreasing},
        {"cut locus of y0 misses the domain", !positive || reach_ok},
        {"K0 <= 0, or K0 > 0 and dist(y0, x) < pi/(2 sqrt K0)", hadamard || reach_ok}}},
      {"hadamard-nonexistence",
       "Cartan-Hadamard ambient: the strong Serrin condition is necessary",
       Direction::NonExistence,
       {{"Cartan-Hadamard ambient", hadamard},
        {"H sign-definite", sign_definite},
        {"H nondecreasing in z", nondecreasing}}},
      {"sphere-nonexistence",
       "1/4 K0 < K <= K0, diam < pi/(2 sqrt K0): the strong Serrin condition is necessary",
       Direction::NonExistence,
       {{"K > 0 (pinching holds with K = K0)", positive},
        {"diam < pi/(2 sqrt K0)", small_diameter},
        {"H sign-definite", sign_definite},
        {"H nondecreasing in z", nondecreasing}}},
      {"hadamard-minimal",
       "Cartan-Hadamard ambient, H = 0: solvable for all data iff the domain is mean convex",
       Direction::Equivalence,
       {{"Cartan-Hadamard ambient", hadamard}, {"H identically 0", minimal}}},
      {"sphere-constant",
       "1/4 K0 < K <= K0, diam < pi/(2 sqrt K0), constant H: solvable iff (n-1) H_boundary >= n |H|",
       Direction::Equivalence,
       {{"K > 0 (pinching holds with K = K0)", positive},
        {"diam < pi/(2 sqrt K0)", small_diameter},
        {"H constant", constant}}},
      {"hyperbolic-range",
       "hyperbolic ambient, dH/dz >= 0, 0 <= H <= (n-1)/n (scaled by sqrt|K|): solvable iff strong Serrin",
       Direction::Equivalence,
       {{"hyperbolic ambient", hyperbolic},
        {"H nondecreasing in z", nondecreasing},
        {"0 <= H <= (n-1) sqrt|K| / n", h_range}}},
      {"hyperbolic-constant",
       "hyperbolic ambient, constant H: solvable iff (n-1) H_boundary >= n |H|",
       Direction::Equivalence,
       {{"hyperbolic ambient", hyperbolic}, {"H constant", constant}}},
      {"ricci-existence",
       "dH/dz >= 0 and the Ricci condition: the strong Serrin condition suffices",
       Direction::Existence,
       {{"H nondecreasing in z", nondecreasing}, {"Ricci condition", rep.ricci.holds}}},
      {"ricci-equivalence",
       "H sign-definite, dH/dz >= 0, Ricci condition, Cartan-Hadamard or small spherical domain: solvable iff "
       "strong Serrin",
       Direction::Equivalence,
       {{"H sign-definite", sign_definite},
        {"H nondecreasing in z", nondecreasing},
        {"Ricci condition", rep.ricci.holds},
        {"Cartan-Hadamard, or K > 0 with diam < pi/(2 sqrt K0)", hadamard || small_diameter}}},
  };

  bool can_exist = false, can_fail = false;
  for (const auto& t : rep.theorems) {
    if (!t.applies()) continue;
    if (t.direction != Direction::NonExistence) can_exist = true;
    if (t.direction != Direction::Existence) can_fail = true;
  }
  if (rep.min_margin < -tolerance)
    rep.verdict = can_fail ? Verdict::ViolatedAt : Verdict::Indeterminate;
  else
    rep.verdict = can_exist ? Verdict::StrongSerrinHolds : Verdict::Indeterminate;
  return rep;
}

double bump(double s) {
  if (std::abs(s) >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - s * s));
}

ScalarField generate_failing_data(const Mesh& mesh, const Vec2& y0, double a, double k, double eps) {
  if (!(a > 0.0) || !(eps > 0.0)) throw std::invalid_argument("failing data needs a > 0 and eps > 0");
  ScalarField out(mesh);
  int inside = 0;
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const double r = distance(mesh.model, mesh.vertices[static_cast<std::size_t>(v)], y0);
    out[static_cast<std::size_t>(v)] = k + eps * bump(r / a);
    if (mesh.is_boundary(v) && r > 0.0 && r < a) ++inside;
  }
  if (inside == 0) throw FailingDataError(fmt::format("no boundary vertex inside B_a(y0) with a = {}", a));
  return out;
}

}  // namespace pmc
