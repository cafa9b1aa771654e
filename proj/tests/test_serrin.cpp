#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pmc/barriers.hpp"
#include "pmc/serrin.hpp"

using namespace pmc;

namespace {

const TheoremCheck& theorem(const SerrinReport& rep, const std::string& id) {
  const auto it = std::find_if(rep.theorems.begin(), rep.theorems.end(), [&](const auto& t) { return t.id == id; });
  REQUIRE(it != rep.theorems.end());
  return *it;
}

}  // namespace

TEST_CASE("margins on closed-form circles") {
  const auto E = ManifoldModel::euclidean();
  const auto disc = make_disc(E, Vec2::Zero(), 1.0);
  CHECK(serrin_margin(disc, PrescribedH::constant(0.4), {0, 0.3}) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(serrin_margin(disc, PrescribedH::constant(0.0), {0, 1.1}) == doctest::Approx(1.0).epsilon(1e-12));

  // Inner circle of an annulus is concave seen from the domain.
  const auto ann = make_annulus(E, Vec2::Zero(), 0.4, 1.0);
  CHECK(serrin_margin(ann, PrescribedH::constant(0.0), {1, 0.7}) == doctest::Approx(-2.5).epsilon(1e-10));
  CHECK(serrin_margin(ann, PrescribedH::constant(0.0), {0, 0.7}) == doctest::Approx(1.0).epsilon(1e-10));

  for (double r : {0.5, 1.0, 1.5}) {
    const auto hyp = make_geodesic_disc(ManifoldModel::hyperbolic(), r);
    CHECK(serrin_margin(hyp, PrescribedH::constant(0.3), {0, 2.0}) ==
          doctest::Approx(1.0 / std::tanh(r) - 0.6).epsilon(1e-9));
    const auto cap = make_geodesic_disc(ManifoldModel::sphere(), r);
    CHECK(serrin_margin(cap, PrescribedH::constant(-0.3), {0, 2.0}) ==
          doctest::Approx(1.0 / std::tan(r) - 0.6).epsilon(1e-9));
  }
}

TEST_CASE("margin along a circle is constant for constant H") {
  const auto hyp = make_geodesic_disc(ManifoldModel::hyperbolic(), 0.8);
  const Mesh mesh = mesh_domain(hyp, 0.1);
  const SerrinReport rep = classify(hyp, PrescribedH::constant(0.2), mesh);
  double mean = 0.0;
  for (const auto& s : rep.samples) mean += s.margin;
  mean /= static_cast<double>(rep.samples.size());
  double var = 0.0;
  for (const auto& s : rep.samples) var += (s.margin - mean) * (s.margin - mean);
  var /= static_cast<double>(rep.samples.size());
  CHECK(var < 1e-10);
  REQUIRE(rep.samples_per_component.size() == 1);
  CHECK(rep.samples_per_component[0] == 4 * static_cast<int>(mesh.boundary.size()));
}

TEST_CASE("classifier examples") {
  SUBCASE("hyperbolic geodesic disc, minimal") {
    const auto spec = make_geodesic_disc(ManifoldModel::hyperbolic(), 1.0);
    const auto rep = classify(spec, PrescribedH::constant(0.0), mesh_domain(spec, 0.1));
    CHECK(rep.min_margin == doctest::Approx(1.0 / std::tanh(1.0)).epsilon(1e-9));
    CHECK(theorem(rep, "hadamard-minimal").applies());
    CHECK_FALSE(rep.ricci.holds);
    CHECK(rep.verdict == Verdict::StrongSerrinHolds);
  }
  SUBCASE("spherical cap beyond the threshold") {
    const auto spec = make_geodesic_disc(ManifoldModel::sphere(), 0.6);
    const double H = 0.55 / std::tan(0.6) + 0.05;
    const auto rep = classify(spec, PrescribedH::constant(H), mesh_domain(spec, 0.1));
    CHECK(rep.min_margin < 0.0);
    CHECK(theorem(rep, "sphere-nonexistence").applies());
    CHECK(theorem(rep, "sphere-constant").applies());
    CHECK(rep.verdict == Verdict::ViolatedAt);
  }
  SUBCASE("hyperbolic range endpoint") {
    const auto spec = make_geodesic_disc(ManifoldModel::hyperbolic(), 1.0);
    const auto rep = classify(spec, PrescribedH::constant(0.5), mesh_domain(spec, 0.1));
    CHECK(theorem(rep, "hyperbolic-range").applies());
    CHECK(rep.verdict == Verdict::StrongSerrinHolds);
    const auto above = classify(spec, PrescribedH::constant(0.51), mesh_domain(spec, 0.1));
    CHECK_FALSE(theorem(above, "hyperbolic-range").applies());
  }
  SUBCASE("annulus violates mean convexity") {
    const auto spec = make_annulus(ManifoldModel::euclidean(), Vec2::Zero(), 0.4, 1.0);
    const auto rep = classify(spec, PrescribedH::constant(0.0), mesh_domain(spec, 0.1));
    CHECK(rep.verdict == Verdict::ViolatedAt);
    CHECK(rep.argmin.at.component == 1);
    CHECK(rep.min_margin == doctest::Approx(-2.5).epsilon(1e-9));
  }
  SUBCASE("no applicable criterion") {
    const auto spec = make_disc(ManifoldModel::euclidean(), Vec2::Zero(), 1.0);
    const auto H = PrescribedH::expression("0.2*sin(z)", HSign::Mixed, false, -4.0, 4.0);
    const auto rep = classify(spec, H, mesh_domain(spec, 0.1));
    for (const auto& t : rep.theorems) CHECK_FALSE(t.applies());
    CHECK(rep.verdict == Verdict::Indeterminate);
    CHECK_FALSE(rep.z_extrema_exact);
  }
}

TEST_CASE("classifier never reports success on a negative sample") {
  const auto spec = make_dumbbell(ManifoldModel::euclidean(), Vec2::Zero(), 0.8, 0.35);
  const Mesh mesh = mesh_domain(spec, 0.1);
  for (double H : {0.0, 0.1, 0.3, 0.6}) {
    const auto rep = classify(spec, PrescribedH::constant(H), mesh);
    bool negative = false;
    for (const auto& s : rep.samples) negative = negative || s.margin < -rep.tolerance;
    if (negative) CHECK(rep.verdict != Verdict::StrongSerrinHolds);
  }
}

TEST_CASE("margin is invariant under rigid motions") {
  const auto E = ManifoldModel::euclidean();
  const auto base = make_ellipse(E, Vec2::Zero(), 1.0, 0.6);
  const Placement moved{0.7, Vec2(0.3, -1.2)};
  const auto spec = base.with_placement(moved);
  const auto H = PrescribedH::constant(0.45);
  const auto a = classify(base, H, mesh_domain(base, 0.1));
  const auto b = classify(spec, H, mesh_domain(spec, 0.1));
  REQUIRE(a.samples.size() == b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) CHECK(a.samples[i].margin == doctest::Approx(b.samples[i].margin).epsilon(1e-10));
  CHECK((moved.apply(a.argmin.point) - b.argmin.point).norm() < 1e-9);

  // Rotation about the centre of the disk model.
  const auto hyp = make_ellipse(ManifoldModel::hyperbolic(), Vec2::Zero(), 0.6, 0.4);
  const auto rot = hyp.with_placement({1.1, Vec2::Zero()});
  const auto c = classify(hyp, H, mesh_domain(hyp, 0.1));
  const auto d = classify(rot, H, mesh_domain(rot, 0.1));
  CHECK(c.min_margin == doctest::Approx(d.min_margin).epsilon(1e-10));
  CHECK((Placement{1.1, Vec2::Zero()}.apply(c.argmin.point) - d.argmin.point).norm() < 1e-9);
}

TEST_CASE("Ricci condition") {
  const auto spec = make_geodesic_disc(ManifoldModel::hyperbolic(), 1.0);
  const Mesh mesh = mesh_domain(spec, 0.1);
  const auto hold = ricci_condition_check(spec.model(), PrescribedH::constant(0.8), mesh);
  CHECK(hold.holds);
  CHECK(hold.slack == doctest::Approx(1.56));
  const auto fail = ricci_condition_check(spec.model(), PrescribedH::constant(0.0), mesh);
  CHECK_FALSE(fail.holds);
  CHECK(fail.slack == doctest::Approx(-1.0));
  const auto disc = make_disc(ManifoldModel::euclidean(), Vec2::Zero(), 1.0);
  CHECK(ricci_condition_check(disc.model(), PrescribedH::constant(0.3), mesh_domain(disc, 0.1)).holds);
  // A steep x-gradient breaks it: 0 >= 2 * 3 - 4 * 0.
  const auto steep = PrescribedH::expression("3*x1", HSign::Mixed, true, -1, 1);
  const auto r = ricci_condition_check(disc.model(), steep, mesh_domain(disc, 0.1));
  CHECK_FALSE(r.holds);
}

TEST_CASE("failing boundary data") {
  const auto spec = make_disc(ManifoldModel::euclidean(), Vec2::Zero(), 1.0);
  const Vec2 y0(1.0, 0.0);
  const double a = 0.2, k = 0.5, eps = 3.0;
  CHECK(bump(0.0) == 1.0);
  CHECK(bump(1.0) == 0.0);
  CHECK(bump(-0.5) == doctest::Approx(bump(0.5)));

  double curvature_scale[2] = {0.0, 0.0};
  int level = 0;
  for (double h : {0.02, 0.01}) {
    const Mesh mesh = mesh_domain(spec, h);
    const ScalarField g = generate_failing_data(mesh, y0, a, k, eps);
    const int at_y0 = mesh.nearest_boundary_vertex(0, 0.0);
    CHECK(g[static_cast<std::size_t>(at_y0)] == doctest::Approx(k + eps));
    for (const auto& b : mesh.boundary) {
      const double r = (mesh.vertices[static_cast<std::size_t>(b.vertex)] - y0).norm();
      if (r >= a) CHECK(g[static_cast<std::size_t>(b.vertex)] == k);
    }
    // Second differences along arc length, scaled by a^2 / eps.
    const std::size_t m = mesh.boundary.size();
    for (std::size_t i = 0; i < m; ++i) {
      const auto& p = mesh.boundary[(i + m - 1) % m];
      const auto& c = mesh.boundary[i];
      const auto& q = mesh.boundary[(i + 1) % m];
      const auto at = [&](const BoundaryVertex& b) { return mesh.vertices[static_cast<std::size_t>(b.vertex)]; };
      const auto val = [&](const BoundaryVertex& b) { return g[static_cast<std::size_t>(b.vertex)]; };
      const double hp = (at(q) - at(c)).norm(), hm = (at(c) - at(p)).norm();
      const double d2 = 2.0 * ((val(q) - val(c)) / hp - (val(c) - val(p)) / hm) / (hp + hm);
      curvature_scale[level] = std::max(curvature_scale[level], std::abs(d2) * a * a / eps);
    }
    ++level;
  }
  // Uniform bound: sup |chi''| from the closed form by central differences.
  double chi2 = 0.0;
  const auto chi = [](double t) { return std::abs(t) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - t * t)) : 0.0; };
  for (int i = -9999; i <= 9999; ++i) {
    const double t = i * 1e-4, e = 1e-4;
    chi2 = std::max(chi2, std::abs(chi(t + e) - 2.0 * chi(t) + chi(t - e)) / (e * e));
  }
  CHECK(chi2 == doctest::Approx(21.07).epsilon(0.01));
  CHECK(curvature_scale[0] <= 1.05 * chi2);
  CHECK(curvature_scale[1] <= 1.05 * chi2);

  const Mesh coarse = mesh_domain(spec, 0.2);
  CHECK_THROWS_AS(generate_failing_data(coarse, y0, 0.01, k, eps), FailingDataError);
}

TEST_CASE("failing data beats the height bound once eps exceeds eps(a)") {
  const auto spec = make_disc(ManifoldModel::euclidean(), Vec2::Zero(), 1.0);
  const auto H = PrescribedH::constant(0.6);
  const LemmaConstants lc = compute_constants(spec, H, {0, 0.0}, 0.0);
  const PsiProfile psi{lc.c, lc.a, lc.delta};
  const HeightBound hb = height_bound(lc, psi, 0.0, 0.0);
  MeshOptions mo;
  mo.refinements.push_back({lc.y0_point, lc.a / 10.0, 1.5 * lc.a});
  const Mesh mesh = mesh_domain(spec, 0.1, mo);
  const int at_y0 = mesh.nearest_boundary_vertex(0, 0.0);
  for (double factor : {1.01, 2.0}) {
    const ScalarField g = generate_failing_data(mesh, lc.y0_point, lc.a, 0.0, factor * hb.eps_a);
    CHECK(g[static_cast<std::size_t>(at_y0)] > hb.bound);
  }
  const ScalarField low = generate_failing_data(mesh, lc.y0_point, lc.a, 0.0, 0.99 * hb.eps_a);
  CHECK(low[static_cast<std::size_t>(at_y0)] < hb.bound);
}
