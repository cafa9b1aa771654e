#include "pmc/barriers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace pmc {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

ProfileValue phi_eval(const PhiProfile& p, double t) {
  if (!(t > p.eps) || t > p.a)
    throw BarrierError(fmt::format("phi: t = {} outside ({}, {}]", t, p.eps, p.a));
  const double s = std::sqrt(2.0 / p.nu);
  const double r = std::sqrt(t - p.eps);
  return {s * (std::sqrt(p.a - p.eps) - r), -0.5 * s / r, 0.25 * s / (r * r * r)};
}

ProfileValue psi_eval(const PsiProfile& p, double t) {
  if (!(t > p.a) || t > p.delta)
    throw BarrierError(fmt::format("psi: t = {} outside ({}, {}]", t, p.a, p.delta));
  const double s = std::sqrt(2.0 / p.c);
  const double L = std::log(t / p.a);
  ProfileValue out;
  out.d1 = -s / std::sqrt(L);
  out.d2 = 0.5 * s / (L * std::sqrt(L) * t);
  if (t < p.delta) {
    // r = a exp(w^2) turns the integrand into 2 a exp(w^2). A tolerance near
    // round-off makes the adaptive split recurse to full depth.
    const double lo = std::sqrt(L), hi = std::sqrt(std::log(p.delta / p.a));
    auto f = [&](double w) { return 2.0 * p.a * std::exp(w * w); };
    out.value = s * boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, lo, hi, 10, 1e-12);
  }
  return out;
}

double psi_at_a(const PsiProfile& p) { return psi_eval(p, p.a + 1e-12).value; }

bool ball_trace_connected(const DomainSpec& spec, const Vec2& y0, double a, int samples) {
  int crossings = 0;
  const auto& model = spec.model();
  for (int c = 0; c < spec.num_components(); ++c) {
    double prev = distance(model, spec.eval(c, 0.0).p, y0) - a;
    for (int i = 1; i <= samples; ++i) {
      const double cur = distance(model, spec.eval(c, 2.0 * kPi * i / samples).p, y0) - a;
      if ((prev < 0.0) != (cur < 0.0)) ++crossings;
      prev = cur;
    }
  }
  return crossings == 2;
}

namespace {

// Largest radius R such that |H(x, k) - H(y0, k)| < nu / n at every sample
// of the domain with dist(x, y0) < R.
double select_r1(const DomainSpec& spec, const PrescribedH& H, const Vec2& y0, double k, double nu, double delta) {
  if (H.is_constant()) return delta;
  const auto& model = spec.model();
  const int n = model.dim;
  const double h0 = H(y0, k);
  Vec2 lo = Vec2::Constant(std::numeric_limits<double>::infinity()), hi = -lo;
  double r1 = delta;
  auto probe = [&](const Vec2& x) {
    if (std::abs(H(x, k) - h0) >= nu / n) r1 = std::min(r1, distance(model, x, y0));
  };
  for (int c = 0; c < spec.num_components(); ++c)
    for (const Vec2& p : spec.polyline(c, 1024)) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
      probe(p);
    }
  constexpr int grid = 160;
  for (int i = 0; i <= grid; ++i)
    for (int j = 0; j <= grid; ++j) {
      const Vec2 x(lo.x() + (hi.x() - lo.x()) * i / grid, lo.y() + (hi.y() - lo.y()) * j / grid);
      if (spec.contains(x)) probe(x);
    }
  return r1;
}

// Largest radius R <= r_max such that |lambda(kappa(t), s) + kappa0| < nu for
// every boundary parameter t of the y0 component with dist(gamma(t), y0) <= 2R
// and every depth s <= R. lambda is monotone in s, so the first violating
// depth along each normal is found by bisection.
double select_r2(const DomainSpec& spec, const LemmaConstants& lc, double r_max) {
  const auto& model = spec.model();
  constexpr int samples = 512;
  const double lambda0 = -lc.boundary_curvature;
  double r2 = r_max;
  for (int i = 0; i < samples; ++i) {
    const double t = lc.y0.t + 2.0 * kPi * i / samples;
    const double reach = 0.5 * distance(model, spec.eval(lc.y0.component, t).p, lc.y0_point);
    if (reach >= r2) continue;
    const double kappa = boundary_mean_curvature(spec, {lc.y0.component, t});
    auto bad = [&](double s) {
      try {
        return std::abs(riccati_laplacian_d(model, kappa, s) - lambda0) >= lc.nu;
      } catch (const FocalDistanceError&) {
        return true;
      }
    };
    double first;
    if (bad(0.0)) {
      first = 0.0;
    } else if (!bad(r2)) {
      continue;
    } else {
      double good = 0.0, fail = r2;
      for (int it = 0; it < 48; ++it) {
        const double mid = 0.5 * (good + fail);
        (bad(mid) ? fail : good) = mid;
      }
      first = fail;
    }
    r2 = std::min(r2, std::max(reach, first));
  }
  return r2;
}

BoundaryWindow window_around(const DomainSpec& spec, BoundaryPoint y0, const Vec2& p, double radius) {
  constexpr int steps = 2048;
  const double dt = kPi / steps;
  int fwd = 0, back = 0;
  while (fwd < steps && distance(spec.model(), spec.eval(y0.component, y0.t + (fwd + 1) * dt).p, p) < radius) ++fwd;
  while (back < steps && distance(spec.model(), spec.eval(y0.component, y0.t - (back + 1) * dt).p, p) < radius)
    ++back;
  if (fwd == steps && back == steps) return {y0.component, y0.t - kPi, y0.t + kPi};
  return {y0.component, y0.t - (back + 1) * dt, y0.t + (fwd + 1) * dt};
}

}  // namespace

LemmaConstants compute_constants(const DomainSpec& spec, const PrescribedH& H, BoundaryPoint y0, double k) {
  const auto& model = spec.model();
  const int n = model.dim;
  LemmaConstants lc;
  lc.y0 = y0;
  lc.k = k;
  lc.y0_point = spec.eval(y0.component, y0.t).p;
  lc.boundary_curvature = boundary_mean_curvature(spec, y0);
  lc.h_at_y0 = H(lc.y0_point, k);
  const double margin = n * lc.h_at_y0 - (n - 1) * lc.boundary_curvature;
  if (!(margin > 0.0))
    throw BarrierError(fmt::format("lemma inapplicable: (n-1) H_boundary = {} >= n H(y0, k) = {}",
                                   (n - 1) * lc.boundary_curvature, n * lc.h_at_y0));
  lc.nu = margin / 8.0;
  lc.delta = spec.diameter(512);
  lc.tau = focal_distance(model, lc.boundary_curvature, lc.delta);

  if (model.curvature > 0.0) {
    const double sk = std::sqrt(model.curvature);
    const double reach = spec.max_distance_from(lc.y0_point, 1024);
    lc.kappa_margin = kPi / (2.0 * sk) - reach;
    if (!(lc.kappa_margin > 0.0)) throw BarrierError("domain leaves the hemisphere about y0");
    const double arg = sk * (kPi / (2.0 * sk) - lc.kappa_margin);
    lc.c = (n - 1) * arg / std::tan(arg);
  } else {
    lc.kappa_margin = kNaN;
    lc.c = n - 1;
  }

  lc.R1 = select_r1(spec, H, lc.y0_point, k, lc.nu, lc.delta);
  lc.R2 = select_r2(spec, lc, std::min(lc.R1, lc.tau));
  lc.a = 0.5 * lc.R2;
  while (!ball_trace_connected(spec, lc.y0_point, lc.a)) {
    lc.a *= 0.8;
    if (++lc.connectivity_shrinks > 200) throw BarrierError("could not find a with a connected ball trace");
  }
  lc.window = window_around(spec, y0, lc.y0_point, 3.0 * lc.a);
  spdlog::debug("lemma constants: nu {:.6g} R1 {:.6g} R2 {:.6g} a {:.6g} c {:.6g} delta {:.6g}", lc.nu, lc.R1, lc.R2,
                lc.a, lc.c, lc.delta);
  return lc;
}

int BarrierField::count() const { return static_cast<int>(std::count(defined.begin(), defined.end(), 1)); }

BarrierField assemble_v(const Mesh& mesh, double k, double sup_ring, const PhiProfile& profile,
                        const BoundaryDistanceField& d, const ScalarField& rho) {
  const double base = std::max(k, sup_ring);
  BarrierField out{ScalarField(mesh, kNaN), std::vector<char>(static_cast<std::size_t>(mesh.num_vertices()), 0)};
  for (std::size_t i = 0; i < out.defined.size(); ++i) {
    const double t = d.d[i];
    if (!d.valid[i] || !(t > profile.eps) || !(rho[i] < profile.a) || t > profile.a) continue;
    out.field[i] = base + phi_eval(profile, t).value;
    out.defined[i] = 1;
  }
  if (out.count() == 0) throw BarrierError("assemble_v: empty region");
  return out;
}

BarrierField assemble_w(const Mesh& mesh, double sup_outer, const PsiProfile& profile, const ScalarField& rho) {
  BarrierField out{ScalarField(mesh, kNaN), std::vector<char>(static_cast<std::size_t>(mesh.num_vertices()), 0)};
  for (std::size_t i = 0; i < out.defined.size(); ++i) {
    if (!(rho[i] > profile.a) || rho[i] > profile.delta) continue;
    out.field[i] = sup_outer + psi_eval(profile, rho[i]).value;
    out.defined[i] = 1;
  }
  if (out.count() == 0) throw BarrierError("assemble_w: empty region");
  return out;
}

SupersolutionCheck verify_supersolution(const Discretization& disc, const PrescribedH& H, const BarrierField& f) {
  if (H.sign() != HSign::Nonnegative || !H.z_nondecreasing())
    throw BarrierError("supersolution check needs H nonnegative and nondecreasing in z");
  SupersolutionCheck out;
  out.max_q = -std::numeric_limits<double>::infinity();
  for (int v : disc.mesh().interior) {
    if (!disc.stencil_defined(v, f.field.values())) continue;
    const double q = q_at(disc, H, v, f.field.values());
    ++out.checked;
    if (q > out.max_q) {
      out.max_q = q;
      out.argmax = v;
    }
  }
  if (out.checked == 0) throw BarrierError("supersolution check: no vertex with a complete stencil in the region");
  return out;
}

HeightBound height_bound(const LemmaConstants& constants, const PsiProfile& psi, double k, double sup_outer) {
  HeightBound out;
  out.psi_a = psi_at_a(psi);
  out.phi_term = std::sqrt(2.0 * constants.a / constants.nu);
  out.eps_a = out.psi_a + out.phi_term;
  out.bound = std::max(k, sup_outer) + out.eps_a;
  return out;
}

std::vector<double> eps_of_a(double nu, double c, double delta, const std::vector<double>& a_values) {
  std::vector<double> out;
  out.reserve(a_values.size());
  for (double a : a_values) out.push_back(psi_at_a({c, a, delta}) + std::sqrt(2.0 * a / nu));
  return out;
}

}  // namespace pmc
