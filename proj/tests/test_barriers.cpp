#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "pmc/barriers.hpp"

using namespace pmc;

TEST_CASE("phi closed form and ODE identity") {
  const PhiProfile p{1.0, 0.1, 0.0};
  CHECK(phi_eval(p, 0.1).value == 0.0);
  CHECK(phi_eval(p, 1e-14).value == doctest::Approx(std::sqrt(0.2)).epsilon(1e-6));
  CHECK_THROWS_AS(phi_eval(p, 0.0), BarrierError);
  CHECK_THROWS_AS(phi_eval(p, 0.11), BarrierError);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const PhiProfile q{0.01 + 2.0 * U(rng), 0.01 + 0.5 * U(rng), 0.0};
    const PhiProfile r{q.nu, q.a, 0.5 * q.a * U(rng)};
    const double t = r.eps + (r.a - r.eps) * (0.01 + 0.99 * U(rng));
    const ProfileValue v = phi_eval(r, t);
    const double scale = std::abs(v.d2) + r.nu * std::abs(v.d1 * v.d1 * v.d1);
    CHECK(std::abs(r.nu * v.d1 * v.d1 * v.d1 + v.d2) <= 1e-12 * std::max(1.0, scale));
    CHECK(v.d1 < 0.0);
  }
}

TEST_CASE("psi against an independent quadrature") {
  // After r = e^{w^2}: psi(t) = sqrt(2) * 2 int_{sqrt(log t)}^{1} e^{w^2} dw for c = a = 1, delta = e.
  const PsiProfile p{1.0, 1.0, std::exp(1.0)};
  const double t = 1.0001;
  const double ref =
      std::sqrt(2.0) * 2.0 * oracle::integrate([](double w) { return std::exp(w * w); }, std::sqrt(std::log(t)), 1.0);
  CHECK(psi_eval(p, t).value == doctest::Approx(ref).epsilon(1e-8));
  // And without the substitution, starting away from the singular end.
  const double t2 = 1.3;
  const double ref2 = std::sqrt(2.0) * oracle::integrate([](double r) { return 1.0 / std::sqrt(std::log(r)); }, t2,
                                                         std::exp(1.0), 1e-13);
  CHECK(psi_eval(p, t2).value == doctest::Approx(ref2).epsilon(1e-8));
  CHECK(psi_eval(p, std::exp(1.0)).value == doctest::Approx(0.0));
  CHECK_THROWS_AS(psi_eval(p, 1.0), BarrierError);
  CHECK(psi_at_a(p) == doctest::Approx(std::sqrt(2.0) * 2.0 *
                                       oracle::integrate([](double w) { return std::exp(w * w); }, 0.0, 1.0))
                           .epsilon(1e-5));
}

TEST_CASE("psi derivative closed forms and supersolution sign") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const PsiProfile p{0.2 + 3.0 * U(rng), 0.01 + 0.2 * U(rng), 0.0};
    const PsiProfile q{p.c, p.a, p.a * (1.5 + 20.0 * U(rng))};
    const double t = q.a + (q.delta - q.a) * (1e-4 + (1.0 - 1e-4) * U(rng));
    const ProfileValue v = psi_eval(q, t);
    const double L = std::log(t / q.a);
    CHECK(v.d1 == doctest::Approx(-std::sqrt(2.0 / q.c) / std::sqrt(L)).epsilon(1e-12));
    CHECK(v.d2 == doctest::Approx(std::sqrt(2.0 / q.c) * 0.5 * std::pow(L, -1.5) / t).epsilon(1e-12));
    CHECK(q.c / t * v.d1 * v.d1 * v.d1 + v.d2 < 0.0);
    const double h = 1e-6 * (q.delta - q.a);
    if (t - h > q.a && t + h <= q.delta) {
      const double fd = (psi_eval(q, t + h).value - psi_eval(q, t - h).value) / (2.0 * h);
      CHECK(v.d1 == doctest::Approx(fd).epsilon(1e-5));
    }
  }
}

TEST_CASE("lemma constants on the euclidean disc") {
  const auto spec = make_disc(ManifoldModel::euclidean(), Vec2::Zero(), 1.0);
  const auto H = PrescribedH::constant(0.6);
  const LemmaConstants lc = compute_constants(spec, H, {0, 0.0}, 0.0);
  CHECK(lc.nu == doctest::Approx(0.025));
  CHECK(lc.c == doctest::Approx(1.0));
  CHECK(lc.delta == doctest::Approx(2.0).epsilon(1e-4));
  CHECK(lc.boundary_curvature == doctest::Approx(1.0));
  CHECK(lc.y0_point.x() == doctest::Approx(1.0));
  CHECK(lc.a == doctest::Approx(lc.R2 / 2.0));
  CHECK(lc.a > 0.0);
  CHECK(ball_trace_connected(spec, lc.y0_point, lc.a));
  // Constant H: R1 is the largest probed radius.
  CHECK(lc.R1 >= lc.delta - 1e-9);
  CHECK_THROWS_AS(compute_constants(spec, PrescribedH::constant(0.4), {0, 0.0}, 0.0), BarrierError);
}

TEST_CASE("height bound arithmetic") {
  LemmaConstants lc;
  lc.nu = 0.025;
  lc.a = 0.02;
  lc.c = 1.0;
  lc.delta = 2.0;
  const PsiProfile psi{1.0, 0.02, 2.0};
  const HeightBound hb = height_bound(lc, psi, 3.0, 3.0 - 5.0);
  CHECK(hb.phi_term == doctest::Approx(std::sqrt(1.6)));
  CHECK(hb.psi_a == doctest::Approx(psi_at_a(psi)));
  CHECK(hb.bound == doctest::Approx(3.0 + hb.eps_a));
  const auto eps = eps_of_a(0.025, 1.0, 2.0, {0.1, 0.05, 0.025});
  REQUIRE(eps.size() == 3);
  CHECK(eps[0] > eps[1]);
  CHECK(eps[1] > eps[2]);
}

TEST_CASE("assembled barriers") {
  const auto spec = make_disc(ManifoldModel::euclidean(), Vec2::Zero(), 1.0);
  const Mesh mesh = mesh_domain(spec, 0.05);
  const Vec2 y0(1.0, 0.0);
  const ScalarField rho = distance_to_point_field(mesh, y0);
  const PsiProfile psi{1.0, 0.3, 2.0};
  const BarrierField w = assemble_w(mesh, 1.5, psi, rho);
  CHECK(w.count() > 0);
  std::mt19937_64 rng(3);
  int checked = 0;
  for (int v = 0; v < mesh.num_vertices() && checked < 20; ++v) {
    const auto i = static_cast<std::size_t>(v);
    const bool inside = rho[i] > psi.a && rho[i] <= psi.delta;
    CHECK(static_cast<bool>(w.defined[i]) == inside);
    if (!inside) continue;
    CHECK(w.field[i] >= 1.5);
    if (rng() % 8 == 0) {
      CHECK(w.field[i] == doctest::Approx(1.5 + psi_eval(psi, rho[i]).value).epsilon(1e-14));
      ++checked;
    }
  }

  const PhiProfile phi{1.0, 0.1, 0.01};
  BoundaryWindow full{0, 0.0, 2.0 * std::numbers::pi};
  const BoundaryDistanceField d = distance_to_boundary_field(mesh, spec, full);
  const BarrierField v = assemble_v(mesh, 0.0, 1.0, phi, d, rho);
  CHECK(v.count() > 0);
  for (int u = 0; u < mesh.num_vertices(); ++u) {
    const auto i = static_cast<std::size_t>(u);
    if (!v.defined[i]) continue;
    CHECK(d.d[i] > phi.eps);
    CHECK(rho[i] < phi.a);
    CHECK(v.field[i] == doctest::Approx(1.0 + phi_eval(phi, d.d[i]).value).epsilon(1e-14));
  }
}

TEST_CASE("v is a strict supersolution on the collar, matching the radial closed form") {
  const auto spec = make_disc(ManifoldModel::euclidean(), Vec2::Zero(), 1.0);
  const auto H = PrescribedH::constant(0.6);
  const LemmaConstants lc = compute_constants(spec, H, {0, 0.0}, 0.0);
  MeshOptions mo;
  mo.refinements.push_back({lc.y0_point, lc.a / 20.0, 1.5 * lc.a});
  const Mesh mesh = mesh_domain(spec, 0.05, mo);
  const Discretization disc(mesh);
  const auto d = distance_to_boundary_field(mesh, spec, lc.window);
  const auto rho = distance_to_point_field(mesh, lc.y0_point);
  const PhiProfile phi{lc.nu, lc.a, 0.1 * lc.a};
  const BarrierField v = assemble_v(mesh, 0.0, 0.0, phi, d, rho);
  const SupersolutionCheck chk = verify_supersolution(disc, H, v);
  CHECK(chk.checked > 20);
  CHECK(chk.max_q < 0.0);
  // v = phi(1 - r): Q v = phi''/W^3 - phi'/(r W) - 2H.
  double exact_max = -std::numeric_limits<double>::infinity();
  for (int i : mesh.interior) {
    if (!disc.stencil_defined(i, v.field.values())) continue;
    const double t = d.d[static_cast<std::size_t>(i)];
    const ProfileValue p = phi_eval(phi, t);
    const double W = std::sqrt(1.0 + p.d1 * p.d1);
    exact_max = std::max(exact_max, p.d2 / (W * W * W) - p.d1 / ((1.0 - t) * W) - 1.2);
  }
  CHECK(chk.max_q == doctest::Approx(exact_max).epsilon(0.1));
}

TEST_CASE("w is a strict supersolution on the annulus and -w is not") {
  const auto spec = make_annulus(ManifoldModel::euclidean(), Vec2::Zero(), 0.4, 1.0);
  const auto H = PrescribedH::constant(0.0);
  const LemmaConstants lc = compute_constants(spec, H, {1, 0.0}, 0.0);
  CHECK(lc.nu == doctest::Approx(0.3125));
  const Mesh mesh = mesh_domain(spec, 0.05);
  const Discretization disc(mesh);
  const auto rho = distance_to_point_field(mesh, lc.y0_point);
  const BarrierField w = assemble_w(mesh, 0.0, {lc.c, lc.a, lc.delta}, rho);
  CHECK(verify_supersolution(disc, H, w).max_q < 0.0);
  ScalarField neg(mesh);
  for (std::size_t i = 0; i < neg.size(); ++i) neg[i] = -w.field[i];
  CHECK(verify_supersolution(disc, H, {neg, w.defined}).max_q > 0.0);
  CHECK_THROWS_AS(verify_supersolution(disc, PrescribedH::constant(-0.1), w), BarrierError);
}
