#include "pmc/spaceform.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <boost/numeric/odeint.hpp>
#include <fmt/format.h>

namespace pmc {

namespace {

constexpr double kBlowUp = 1e6;

// G(Y) = sin^2(y) / y^2 with Y = y^2, together with derivatives of
// G and of F(Y) = (1 - G(Y)) / Y. Used for the sphere normal-coordinate metric.
struct SincTerms {
  double G, dG, F, dF;
};

SincTerms sinc_terms(double Y) {
  SincTerms out{};
  if (std::abs(Y) < 1.0) {
    // G = sum_m c_m Y^m, c_m = (-1)^m 2^(2m+1) / (2m+2)!
    double c = 1.0;  // c_0
    double G = 0.0, dG = 0.0, F = 0.0, dF = 0.0;
    double Ypow = 1.0;  // Y^m
    double Yprev = 0.0;  // Y^(m-1)
    double Yprev2 = 0.0;  // Y^(m-2)
    for (int m = 0; m < 18; ++m) {
      if (m > 0) {
        // c_m / c_{m-1} = -4 / ((2m+1)(2m+2))
        c *= -4.0 / ((2.0 * m + 1.0) * (2.0 * m + 2.0));
      }
      G += c * Ypow;
      if (m >= 1) {
        dG += m * c * Yprev;
        F -= c * Yprev;
      }
      if (m >= 2) dF -= (m - 1) * c * Yprev2;
      Yprev2 = Yprev;
      Yprev = Ypow;
      Ypow *= Y;
    }
    out = {G, dG, F, dF};
    return out;
  }
  const double y = std::sqrt(Y);
  const double s = std::sin(y);
  const double G = s * s / Y;
  const double dG = std::sin(2.0 * y) / (2.0 * y * Y) - s * s / (Y * Y);
  const double F = (1.0 - G) / Y;
  const double dF = -dG / Y - (1.0 - G) / (Y * Y);
  return {G, dG, F, dF};
}

void require_in_chart(const ManifoldModel& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != model.dim) {
    throw ChartError(fmt::format("chart point has dimension {}, model has {}", x.size(), model.dim));
  }
  if (!model.in_chart(x)) {
    throw ChartError(fmt::format("point with |x| = {} lies outside the {} chart", x.norm(),
                                 to_string(model.chart)));
  }
}

// Embedding of a sphere normal-coordinate point into the unit sphere of R^{n+1}.
Eigen::VectorXd sphere_embed(double K, const Eigen::Ref<const Eigen::VectorXd>& x) {
  const double r = x.norm();
  const double s = std::sqrt(K);
  Eigen::VectorXd p(x.size() + 1);
  p(0) = std::cos(s * r);
  const double sinc = (s * r < 1e-8) ? s * (1.0 - s * s * r * r / 6.0) : std::sin(s * r) / r;
  p.tail(x.size()) = sinc * x;
  return p;
}

}  // namespace

std::string_view to_string(Chart chart) {
  switch (chart) {
    case Chart::EuclideanCartesian:
      return "euclidean-cartesian";
    case Chart::PoincareDisk:
      return "poincare-disk";
    case Chart::SpherePolar:
      return "sphere-polar";
  }
  return "unknown";
}

Chart chart_from_string(std::string_view name) {
  if (name == "euclidean-cartesian" || name == "euclidean") return Chart::EuclideanCartesian;
  if (name == "poincare-disk" || name == "hyperbolic") return Chart::PoincareDisk;
  if (name == "sphere-polar" || name == "sphere") return Chart::SpherePolar;
  throw ChartError(fmt::format("unknown chart '{}'", name));
}

void ManifoldModel::validate() const {
  if (dim < 2) throw ChartError("model dimension must be at least 2");
  switch (chart) {
    case Chart::EuclideanCartesian:
      if (curvature != 0.0) throw ChartError("euclidean-cartesian chart requires K = 0");
      break;
    case Chart::PoincareDisk:
      if (!(curvature < 0.0)) throw ChartError("poincare-disk chart requires K < 0");
      break;
    case Chart::SpherePolar:
      if (!(curvature > 0.0)) throw ChartError("sphere-polar chart requires K > 0");
      break;
  }
}

bool ManifoldModel::in_chart(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (!x.allFinite()) return false;
  switch (chart) {
    case Chart::EuclideanCartesian:
      return true;
    case Chart::PoincareDisk:
      return x.squaredNorm() < 1.0;
    case Chart::SpherePolar:
      return std::sqrt(curvature) * x.norm() < std::numbers::pi;
  }
  return false;
}

MetricData metric_at(const ManifoldModel& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  require_in_chart(model, x);
  const int n = model.dim;
  MetricData m;
  switch (model.chart) {
    case Chart::EuclideanCartesian:
      m.sigma = Eigen::MatrixXd::Identity(n, n);
      m.sigma_inv = Eigen::MatrixXd::Identity(n, n);
      m.sqrt_det = 1.0;
      return m;
    case Chart::PoincareDisk: {
      const double conformal = 4.0 / (-model.curvature * std::pow(1.0 - x.squaredNorm(), 2));
      m.sigma = conformal * Eigen::MatrixXd::Identity(n, n);
      m.sigma_inv = Eigen::MatrixXd::Identity(n, n) / conformal;
      m.sqrt_det = std::pow(conformal, 0.5 * n);
      return m;
    }
    case Chart::SpherePolar: {
      // sigma_ij = g delta_ij + h x_i x_j with g = G(K r^2), h = K F(K r^2)
      const double K = model.curvature;
      const auto t = sinc_terms(K * x.squaredNorm());
      const double g = t.G;
      const double h = K * t.F;
      m.sigma = g * Eigen::MatrixXd::Identity(n, n) + h * x * x.transpose();
      // Radial eigenvalue is g + h r^2 = 1; the n-1 tangential ones are g.
      const double r2 = x.squaredNorm();
      if (r2 > 0.0) {
        const Eigen::MatrixXd P = x * x.transpose() / r2;
        m.sigma_inv = (Eigen::MatrixXd::Identity(n, n) - P) / g + P;
      } else {
        m.sigma_inv = Eigen::MatrixXd::Identity(n, n);
      }
      m.sqrt_det = std::pow(g, 0.5 * (n - 1));
      return m;
    }
  }
  throw ChartError("unreachable chart");
}

Christoffels christoffels_at(const ManifoldModel& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  require_in_chart(model, x);
  const int n = model.dim;
  Christoffels gamma(n);
  switch (model.chart) {
    case Chart::EuclideanCartesian:
      return gamma;
    case Chart::PoincareDisk: {
      // Conformal metric e^{2f} I with grad f = 2x / (1 - |x|^2).
      const Eigen::VectorXd df = 2.0 * x / (1.0 - x.squaredNorm());
      for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) {
            double v = 0.0;
            if (i == k) v += df(j);
            if (j == k) v += df(i);
            if (i == j) v -= df(k);
            gamma(k, i, j) = v;
          }
      return gamma;
    }
    case Chart::SpherePolar: {
      // With q = |x|^2, sigma_ij = g(q) delta_ij + h(q) x_i x_j and
      // Gamma_{l,ij} = g'(x_i d_jl + x_j d_il - x_l d_ij) + h' x_i x_j x_l + h d_ij x_l.
      const double K = model.curvature;
      const auto t = sinc_terms(K * x.squaredNorm());
      const double h = K * t.F;
      const double dg = K * t.dG;
      const double dh = K * K * t.dF;
      const MetricData m = metric_at(model, x);
      std::vector<double> first(static_cast<std::size_t>(n * n * n));
      auto at = [n](int l, int i, int j) { return static_cast<std::size_t>((l * n + i) * n + j); };
      for (int l = 0; l < n; ++l)
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) {
            double v = dh * x(i) * x(j) * x(l);
            if (j == l) v += dg * x(i);
            if (i == l) v += dg * x(j);
            if (i == j) v += -dg * x(l) + h * x(l);
            first[at(l, i, j)] = v;
          }
      for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
          for (int j = i; j < n; ++j) {
            double v = 0.0;
            for (int l = 0; l < n; ++l) v += m.sigma_inv(k, l) * first[at(l, i, j)];
            gamma(k, i, j) = v;
            gamma(k, j, i) = v;
          }
      return gamma;
    }
  }
  return gamma;
}

double distance(const ManifoldModel& model, const Eigen::Ref<const Eigen::VectorXd>& x,
                const Eigen::Ref<const Eigen::VectorXd>& y) {
  require_in_chart(model, x);
  require_in_chart(model, y);
  switch (model.chart) {
    case Chart::EuclideanCartesian:
      return (x - y).norm();
    case Chart::PoincareDisk: {
      // acosh(1 + 2q^2) written as 2 asinh(q) for accuracy at short range.
      const double q = (x - y).norm() / std::sqrt((1.0 - x.squaredNorm()) * (1.0 - y.squaredNorm()));
      return 2.0 * std::asinh(q) / std::sqrt(-model.curvature);
    }
    case Chart::SpherePolar: {
      const Eigen::VectorXd p = sphere_embed(model.curvature, x);
      const Eigen::VectorXd q = sphere_embed(model.curvature, y);
      const double angle = (p.dot(q) >= 0.0)
                               ? 2.0 * std::asin(std::min(1.0, 0.5 * (p - q).norm()))
                               : std::numbers::pi - 2.0 * std::asin(std::min(1.0, 0.5 * (p + q).norm()));
      return angle / std::sqrt(model.curvature);
    }
  }
  return 0.0;
}

double cot_k(double K, double rho) {
  if (K > 0.0) {
    const double s = std::sqrt(K);
    return s / std::tan(s * rho);
  }
  if (K < 0.0) {
    const double s = std::sqrt(-K);
    return s / std::tanh(s * rho);
  }
  return 1.0 / rho;
}

double laplacian_rho(const ManifoldModel& model, double rho) {
  if (!(rho > 0.0)) throw std::domain_error("laplacian_rho requires rho > 0");
  if (model.curvature > 0.0 && rho >= std::numbers::pi / std::sqrt(model.curvature)) {
    throw std::domain_error("laplacian_rho: rho reaches the conjugate radius pi/sqrt(K)");
  }
  return (model.dim - 1) * cot_k(model.curvature, rho);
}

namespace {

struct RiccatiResult {
  double lambda;
  double t_reached;
  bool blew_up;
};

RiccatiResult integrate_riccati(double K, double kappa0, double t_end) {
  namespace odeint = boost::numeric::odeint;
  auto rhs = [K](const double& lam, double& dlam, double /*t*/) { dlam = -lam * lam - K; };
  auto stepper = odeint::make_controlled(1e-13, 1e-13, odeint::runge_kutta_dopri5<double>());

  double lam = -kappa0;
  double t = 0.0;
  double dt = std::min(1e-3, t_end > 0 ? t_end : 1e-3);
  int rejected = 0;
  while (t < t_end) {
    if (t + dt > t_end) dt = t_end - t;
    const auto result = stepper.try_step(rhs, lam, t, dt);
    if (result == odeint::fail) {
      if (++rejected > 10000 || dt < 1e-15) return {lam, t, true};
      continue;
    }
    rejected = 0;
    if (!std::isfinite(lam) || std::abs(lam) > kBlowUp) return {lam, t, true};
  }
  return {lam, t, false};
}

}  // namespace

double riccati_laplacian_d(const ManifoldModel& model, double kappa0, double t) {
  if (model.dim != 2) throw std::domain_error("riccati_laplacian_d is implemented for n = 2");
  if (t < 0.0) throw std::domain_error("riccati_laplacian_d requires t >= 0");
  if (t == 0.0) return -kappa0;
  const auto r = integrate_riccati(model.curvature, kappa0, t);
  if (r.blew_up) {
    throw FocalDistanceError(r.t_reached,
                             fmt::format("parallel curve focal distance {:.6g} reached before depth {:.6g}",
                                         r.t_reached, t));
  }
  return r.lambda;
}

double focal_distance(const ManifoldModel& model, double kappa0, double horizon) {
  const auto r = integrate_riccati(model.curvature, kappa0, horizon);
  return r.blew_up ? r.t_reached : std::numeric_limits<double>::infinity();
}

}  // namespace pmc
