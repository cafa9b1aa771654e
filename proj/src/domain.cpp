#include "pmc/domain.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

namespace pmc {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kFinePolyline = 2048;

class EllipseCurve final : public Curve {
 public:
  EllipseCurve(Vec2 center, double a, double b, double angle) : c_(center), a_(a), b_(b), angle_(angle) {
    if (!(a > 0.0 && b > 0.0)) throw DomainError("ellipse semi-axes must be positive");
  }
  CurvePoint eval(double t) const override {
    const double ct = std::cos(t), st = std::sin(t);
    const double ca = std::cos(angle_), sa = std::sin(angle_);
    auto rot = [&](double x, double y) { return Vec2(ca * x - sa * y, sa * x + ca * y); };
    return {c_ + rot(a_ * ct, b_ * st), rot(-a_ * st, b_ * ct), rot(-a_ * ct, -b_ * st)};
  }
  std::string describe() const override {
    return fmt::format("ellipse(center=({}, {}), a={}, b={}, angle={})", c_.x(), c_.y(), a_, b_, angle_);
  }

 private:
  Vec2 c_;
  double a_, b_, angle_;
};

// gamma = c + r(theta) (cos theta, sin theta)
class RadialCurve : public Curve {
 public:
  explicit RadialCurve(Vec2 center) : c_(center) {}
  CurvePoint eval(double t) const override {
    const auto [r, dr, ddr] = radius(t);
    const Vec2 e(std::cos(t), std::sin(t));
    const Vec2 e_perp(-std::sin(t), std::cos(t));
    return {c_ + r * e, dr * e + r * e_perp, ddr * e + 2.0 * dr * e_perp - r * e};
  }

 protected:
  virtual std::array<double, 3> radius(double t) const = 0;
  Vec2 c_;
};

class FourierCurve final : public RadialCurve {
 public:
  FourierCurve(Vec2 center, double a0, std::vector<double> cos_k, std::vector<double> sin_k)
      : RadialCurve(center), a0_(a0), cos_k_(std::move(cos_k)), sin_k_(std::move(sin_k)) {}
  std::string describe() const override {
    return fmt::format("fourier(a0={}, cos=[{}], sin=[{}])", a0_, fmt::join(cos_k_, ", "), fmt::join(sin_k_, ", "));
  }

 protected:
  std::array<double, 3> radius(double t) const override {
    double r = a0_, dr = 0.0, ddr = 0.0;
    const std::size_t K = std::max(cos_k_.size(), sin_k_.size());
    for (std::size_t i = 0; i < K; ++i) {
      const double k = static_cast<double>(i + 1);
      const double a = i < cos_k_.size() ? cos_k_[i] : 0.0;
      const double b = i < sin_k_.size() ? sin_k_[i] : 0.0;
      const double c = std::cos(k * t), s = std::sin(k * t);
      r += a * c + b * s;
      dr += k * (-a * s + b * c);
      ddr += -k * k * (a * c + b * s);
    }
    return {r, dr, ddr};
  }

 private:
  double a0_;
  std::vector<double> cos_k_, sin_k_;
};

class SuperellipseCurve final : public RadialCurve {
 public:
  SuperellipseCurve(Vec2 center, double a, double b, int p) : RadialCurve(center), a_(a), b_(b), p_(p) {
    if (p < 2 || p % 2 != 0) throw DomainError("superellipse power must be an even integer >= 2");
    if (!(a > 0.0 && b > 0.0)) throw DomainError("superellipse half-widths must be positive");
  }
  std::string describe() const override {
    return fmt::format("superellipse(a={}, b={}, p={})", a_, b_, p_);
  }

 protected:
  std::array<double, 3> radius(double t) const override {
    const double p = p_;
    const double u = std::cos(t) / a_, v = std::sin(t) / b_;
    const double du = -std::sin(t) / a_, dv = std::cos(t) / b_;
    const double ddu = -u, ddv = -v;
    const double f = std::pow(u, p) + std::pow(v, p);
    const double df = p * (std::pow(u, p - 1) * du + std::pow(v, p - 1) * dv);
    const double ddf = p * ((p - 1) * std::pow(u, p - 2) * du * du + std::pow(u, p - 1) * ddu +
                            (p - 1) * std::pow(v, p - 2) * dv * dv + std::pow(v, p - 1) * ddv);
    const double r = std::pow(f, -1.0 / p);
    const double dr = -(1.0 / p) * std::pow(f, -1.0 / p - 1.0) * df;
    const double ddr = -(1.0 / p) * ((-1.0 / p - 1.0) * std::pow(f, -1.0 / p - 2.0) * df * df +
                                     std::pow(f, -1.0 / p - 1.0) * ddf);
    return {r, dr, ddr};
  }

 private:
  double a_, b_;
  int p_;
};

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

bool segments_cross(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2) {
  const double d1 = cross(p2 - p1, q1 - p1);
  const double d2 = cross(p2 - p1, q2 - p1);
  const double d3 = cross(q2 - q1, p1 - q1);
  const double d4 = cross(q2 - q1, p2 - q1);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 && d4 != 0;
}

}  // namespace

std::shared_ptr<const Curve> make_ellipse_curve(Vec2 center, double a, double b, double angle) {
  return std::make_shared<EllipseCurve>(center, a, b, angle);
}

std::shared_ptr<const Curve> make_circle_curve(Vec2 center, double radius) {
  return std::make_shared<EllipseCurve>(center, radius, radius, 0.0);
}

std::shared_ptr<const Curve> make_fourier_curve(Vec2 center, double a0, std::vector<double> cos_k,
                                                std::vector<double> sin_k) {
  return std::make_shared<FourierCurve>(center, a0, std::move(cos_k), std::move(sin_k));
}

std::shared_ptr<const Curve> make_superellipse_curve(Vec2 center, double a, double b, int p) {
  return std::make_shared<SuperellipseCurve>(center, a, b, p);
}

DomainSpec::DomainSpec(ManifoldModel model, std::vector<BoundaryComponent> components, std::string label,
                       Placement placement)
    : model_(model), components_(std::move(components)), label_(std::move(label)), placement_(placement) {
  model_.validate();
  if (model_.dim != 2) throw DomainError("domains are meshed in two-dimensional charts only");
  if (components_.empty()) throw DomainError("a domain needs at least one boundary component");
  for (const auto& c : components_)
    if (!c.curve) throw DomainError("null boundary curve");
  fine_polylines_.reserve(components_.size());
  for (int c = 0; c < num_components(); ++c) fine_polylines_.push_back(polyline(c, kFinePolyline));
}

CurvePoint DomainSpec::eval_local(int component, double t) const {
  const auto& comp = components_.at(static_cast<std::size_t>(component));
  if (!comp.reversed) return comp.curve->eval(t);
  CurvePoint cp = comp.curve->eval(-t);
  cp.d1 = -cp.d1;
  return cp;
}

CurvePoint DomainSpec::eval(int component, double t) const {
  CurvePoint cp = eval_local(component, t);
  cp.p = placement_.apply(cp.p);
  cp.d1 = placement_.apply_vector(cp.d1);
  cp.d2 = placement_.apply_vector(cp.d2);
  return cp;
}

double DomainSpec::chart_length(int component) const {
  // Trapezoid rule is spectrally accurate for smooth periodic integrands.
  constexpr int kSamples = 4096;
  double sum = 0.0;
  for (int i = 0; i < kSamples; ++i) sum += eval_local(component, kTwoPi * i / kSamples).d1.norm();
  return sum * kTwoPi / kSamples;
}

std::vector<Vec2> DomainSpec::polyline(int component, int samples) const {
  std::vector<Vec2> pts;
  pts.reserve(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) pts.push_back(eval(component, kTwoPi * i / samples).p);
  return pts;
}

bool DomainSpec::contains(const Vec2& p) const {
  bool inside = false;
  for (const auto& poly : fine_polylines_) {
    const std::size_t m = poly.size();
    for (std::size_t i = 0, j = m - 1; i < m; j = i++) {
      const Vec2& a = poly[i];
      const Vec2& b = poly[j];
      if ((a.y() > p.y()) != (b.y() > p.y())) {
        const double x = (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x();
        if (p.x() < x) inside = !inside;
      }
    }
  }
  return inside;
}

double DomainSpec::diameter(int samples_per_component) const {
  std::vector<Vec2> pts;
  for (int c = 0; c < num_components(); ++c) {
    auto poly = polyline(c, samples_per_component);
    pts.insert(pts.end(), poly.begin(), poly.end());
  }
  double best = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) best = std::max(best, pmc::distance(model_, pts[i], pts[j]));
  return best;
}

double DomainSpec::max_distance_from(const Vec2& y, int samples_per_component) const {
  double best = 0.0;
  for (int c = 0; c < num_components(); ++c)
    for (const auto& p : polyline(c, samples_per_component)) best = std::max(best, pmc::distance(model_, y, p));
  return best;
}

void DomainSpec::validate() const {
  constexpr int kSamples = 512;
  std::vector<std::vector<Vec2>> polys;
  for (int c = 0; c < num_components(); ++c) {
    polys.push_back(polyline(c, kSamples));
    for (const auto& p : polys.back()) {
      if (!model_.in_chart(p)) {
        throw DomainError(fmt::format("boundary component {} leaves the {} chart", c, to_string(model_.chart)));
      }
      if (model_.chart == Chart::PoincareDisk && p.norm() > 1.0 - 1e-6) {
        throw DomainError("boundary touches the ideal boundary of the Poincare disk");
      }
    }
  }
  for (std::size_t a = 0; a < polys.size(); ++a) {
    for (std::size_t b = a; b < polys.size(); ++b) {
      const auto& P = polys[a];
      const auto& Q = polys[b];
      for (std::size_t i = 0; i < P.size(); ++i) {
        const Vec2& p1 = P[i];
        const Vec2& p2 = P[(i + 1) % P.size()];
        for (std::size_t j = (a == b ? i + 2 : 0); j < Q.size(); ++j) {
          if (a == b && i == 0 && j + 1 == Q.size()) continue;
          if (segments_cross(p1, p2, Q[j], Q[(j + 1) % Q.size()])) {
            throw DomainError(a == b ? fmt::format("boundary component {} self-intersects", a)
                                     : fmt::format("boundary components {} and {} intersect", a, b));
          }
        }
      }
    }
  }
  for (int c = 0; c < num_components(); ++c) {
    // A point just left of the curve must be inside, just right outside.
    const CurvePoint cp = eval(c, 0.0);
    const Vec2 normal = Vec2(-cp.d1.y(), cp.d1.x()).normalized();
    const double step = 1e-4 * chart_length(c);
    if (!contains(cp.p + step * normal) || contains(cp.p - step * normal)) {
      throw DomainError(fmt::format("boundary component {} is not oriented with the domain on its left", c));
    }
  }
  if (model_.curvature > 0.0) {
    const double limit = std::numbers::pi / (2.0 * std::sqrt(model_.curvature));
    const double diam = diameter();
    if (!(diam < limit)) {
      throw DomainError(fmt::format("spherical domain diameter {:.6g} is not below pi/(2 sqrt K) = {:.6g}",
                                    diam, limit));
    }
  }
}

DomainSpec DomainSpec::with_placement(Placement placement) const {
  return DomainSpec(model_, components_, label_, placement);
}

double chart_radius_of_geodesic_circle(const ManifoldModel& model, double intrinsic_radius) {
  if (!(intrinsic_radius > 0.0)) throw DomainError("geodesic radius must be positive");
  switch (model.chart) {
    case Chart::EuclideanCartesian:
    case Chart::SpherePolar:
      return intrinsic_radius;
    case Chart::PoincareDisk:
      return std::tanh(0.5 * std::sqrt(-model.curvature) * intrinsic_radius);
  }
  return intrinsic_radius;
}

DomainSpec make_disc(const ManifoldModel& model, Vec2 center, double radius) {
  return DomainSpec(model, {{make_circle_curve(center, radius), false}},
                    fmt::format("disc(r={})", radius));
}

DomainSpec make_geodesic_disc(const ManifoldModel& model, double intrinsic_radius) {
  const double r = chart_radius_of_geodesic_circle(model, intrinsic_radius);
  return DomainSpec(model, {{make_circle_curve(Vec2::Zero(), r), false}},
                    fmt::format("geodesic-disc(r={})", intrinsic_radius));
}

DomainSpec make_annulus(const ManifoldModel& model, Vec2 center, double inner_radius, double outer_radius) {
  if (!(0.0 < inner_radius && inner_radius < outer_radius)) throw DomainError("annulus needs 0 < r_in < r_out");
  return DomainSpec(model,
                    {{make_circle_curve(center, outer_radius), false}, {make_circle_curve(center, inner_radius), true}},
                    fmt::format("annulus({} < r < {})", inner_radius, outer_radius));
}

DomainSpec make_ellipse(const ManifoldModel& model, Vec2 center, double a, double b, double angle) {
  return DomainSpec(model, {{make_ellipse_curve(center, a, b, angle), false}},
                    fmt::format("ellipse(a={}, b={})", a, b));
}

DomainSpec make_rounded_rectangle(const ManifoldModel& model, Vec2 center, double half_width, double half_height,
                                  int power) {
  return DomainSpec(model, {{make_superellipse_curve(center, half_width, half_height, power), false}},
                    fmt::format("rounded-rectangle({} x {}, p={})", half_width, half_height, power));
}

DomainSpec make_dumbbell(const ManifoldModel& model, Vec2 center, double radius, double waist) {
  if (!(waist >= 0.0 && waist < 1.0)) throw DomainError("dumbbell waist must lie in [0, 1)");
  return DomainSpec(model, {{make_fourier_curve(center, radius, {0.0, radius * waist}, {}), false}},
                    fmt::format("dumbbell(r={}, waist={})", radius, waist));
}

DomainSpec make_fourier_domain(const ManifoldModel& model, Vec2 center, double a0, std::vector<double> cos_k,
                               std::vector<double> sin_k) {
  return DomainSpec(model, {{make_fourier_curve(center, a0, std::move(cos_k), std::move(sin_k)), false}},
                    "fourier");
}

}  // namespace pmc
