#include <doctest.h>

#include <cmath>
#include <random>

#include "pmc/spaceform.hpp"
#include "oracles.hpp"

using namespace pmc;
using Eigen::Vector2d;

TEST_CASE("metric in the three charts") {
  const auto e = metric_at(ManifoldModel::euclidean(), Vector2d(0.3, 0.7));
  CHECK((e.sigma - Eigen::Matrix2d::Identity()).norm() == doctest::Approx(0.0));

  const auto h0 = metric_at(ManifoldModel::hyperbolic(), Vector2d(0.0, 0.0));
  CHECK((h0.sigma - 4.0 * Eigen::Matrix2d::Identity()).norm() < 1e-14);

  const auto h = metric_at(ManifoldModel::hyperbolic(), Vector2d(0.5, 0.0));
  CHECK((h.sigma - (64.0 / 9.0) * Eigen::Matrix2d::Identity()).norm() < 1e-12);
  CHECK((h.sigma * h.sigma_inv - Eigen::Matrix2d::Identity()).norm() < 1e-12);

  CHECK_THROWS_AS(metric_at(ManifoldModel::hyperbolic(), Vector2d(1.0, 0.0)), ChartError);
  CHECK_THROWS_AS(ManifoldModel({1.0, 2, Chart::PoincareDisk}).validate(), ChartError);
}

TEST_CASE("christoffels match finite differences of the metric") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-0.6, 0.6);
  for (const auto& model : {ManifoldModel::euclidean(), ManifoldModel::hyperbolic(), ManifoldModel::hyperbolic(-2.5),
                            ManifoldModel::sphere(), ManifoldModel::sphere(3.0)}) {
    CAPTURE(to_string(model.chart));
    for (int trial = 0; trial < 100; ++trial) {
      const Vector2d x(U(rng), U(rng));
      const auto fd = oracle::christoffels_fd(model, x);
      const auto G = christoffels_at(model, x);
      for (int k = 0; k < 2; ++k)
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j) {
            CHECK(std::abs(G(k, i, j) - fd[k][i][j]) < 1e-6);
            CHECK(G(k, i, j) == G(k, j, i));
          }
    }
  }
  const auto G0 = christoffels_at(ManifoldModel::hyperbolic(), Vector2d::Zero());
  for (int k = 0; k < 2; ++k)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) CHECK(G0(k, i, j) == 0.0);
}

TEST_CASE("geodesic distance") {
  CHECK(distance(ManifoldModel::euclidean(), Vector2d(0, 0), Vector2d(3, 4)) == doctest::Approx(5.0));
  const double quad = oracle::poincare_radial_length(0.5);
  CHECK(std::abs(distance(ManifoldModel::hyperbolic(), Vector2d(0, 0), Vector2d(0.5, 0)) - quad) < 1e-8);

  // Two points on the meridian theta = 0.3 at polar radii 0.2 and 0.9.
  const Vector2d dir(std::cos(0.3), std::sin(0.3));
  CHECK(distance(ManifoldModel::sphere(), 0.2 * dir, 0.9 * dir) == doctest::Approx(0.7).epsilon(1e-12));

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-0.6, 0.6);
  for (const auto& model : {ManifoldModel::euclidean(), ManifoldModel::hyperbolic(), ManifoldModel::sphere()}) {
    for (int trial = 0; trial < 200; ++trial) {
      const Vector2d x(U(rng), U(rng)), y(U(rng), U(rng)), z(U(rng), U(rng));
      const double dxy = distance(model, x, y);
      CHECK(std::abs(dxy - distance(model, y, x)) < 1e-12);
      CHECK(distance(model, x, x) == 0.0);
      CHECK(dxy <= distance(model, x, z) + distance(model, z, y) + 1e-12);
    }
  }
}

TEST_CASE("sphere distance agrees with the great-circle angle of the embedding") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (double K : {1.0, 4.0}) {
    for (int trial = 0; trial < 100; ++trial) {
      const Vector2d x(U(rng), U(rng)), y(U(rng), U(rng));
      const double ref = oracle::sphere_distance_dot(K, x, y);
      CHECK(std::abs(distance(ManifoldModel::sphere(K), x, y) - ref) < 1e-9);
    }
  }
}

TEST_CASE("laplacian of the distance from a point") {
  CHECK(laplacian_rho(ManifoldModel::euclidean(), 0.5) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(std::abs(laplacian_rho(ManifoldModel::sphere(), std::numbers::pi / 4) - 1.0) < 1e-12);
  // Jacobi field J = sinh(rho): J'/J.
  CHECK(std::abs(laplacian_rho(ManifoldModel::hyperbolic(), 1.0) - std::cosh(1.0) / std::sinh(1.0)) < 1e-12);
  CHECK_THROWS(laplacian_rho(ManifoldModel::euclidean(), 0.0));
  CHECK_THROWS(laplacian_rho(ManifoldModel::sphere(), std::numbers::pi));

  for (double rho = 0.1; rho <= 1.0; rho += 0.05) {
    CHECK(std::abs(laplacian_rho(ManifoldModel::sphere(1e-8), rho) - 1.0 / rho) < 1e-6);
    CHECK(std::abs(laplacian_rho(ManifoldModel::hyperbolic(-1e-8), rho) - 1.0 / rho) < 1e-6);
    // Comparison direction: smaller curvature, larger Laplacian.
    CHECK(laplacian_rho(ManifoldModel::hyperbolic(-1.0), rho) >= laplacian_rho(ManifoldModel::euclidean(), rho));
    CHECK(laplacian_rho(ManifoldModel::euclidean(), rho) >= laplacian_rho(ManifoldModel::sphere(1.0), rho));
    CHECK(laplacian_rho(ManifoldModel::sphere(0.5), rho) >= laplacian_rho(ManifoldModel::sphere(2.0), rho));
  }
}

TEST_CASE("riccati laplacian of the distance to a curve") {
  const auto E = ManifoldModel::euclidean();
  CHECK(std::abs(riccati_laplacian_d(E, 1.0, 0.5) + 2.0) < 1e-8);
  CHECK(riccati_laplacian_d(E, 0.0, 3.0) == doctest::Approx(0.0));
  for (double k0 : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
    const double focal = k0 > 0 ? 1.0 / k0 : 2.0;
    for (int i = 1; i <= 8; ++i) {
      const double t = 0.1 * i * focal;
      CHECK(std::abs(riccati_laplacian_d(E, k0, t) - (-k0 / (1.0 - k0 * t))) < 1e-8);
    }
  }
  const double R = 1.2;
  const double coth = std::cosh(R) / std::sinh(R);
  const double t = R / 2;
  CHECK(std::abs(riccati_laplacian_d(ManifoldModel::hyperbolic(), coth, t) + 1.0 / std::tanh(R - t)) < 1e-8);

  CHECK_THROWS_AS(riccati_laplacian_d(E, 1.0, 1.0), FocalDistanceError);
  try {
    riccati_laplacian_d(E, 2.0, 0.9);
    FAIL("expected blow-up");
  } catch (const FocalDistanceError& err) {
    CHECK(err.focal_distance() == doctest::Approx(0.5).epsilon(1e-4));
  }
  CHECK(focal_distance(E, 1.0, 10.0) == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(std::isinf(focal_distance(E, -1.0, 10.0)));
  // Sphere: parallels of a geodesic (kappa0 = 0) focus at pi / (2 sqrt K).
  CHECK(focal_distance(ManifoldModel::sphere(), 0.0, 10.0) == doctest::Approx(std::numbers::pi / 2).epsilon(1e-4));
}
