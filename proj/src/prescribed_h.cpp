#include "pmc/prescribed_h.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <fmt/format.h>

namespace pmc {

namespace {
constexpr int kZProbes = 257;
}

std::string_view to_string(HSign sign) {
  switch (sign) {
    case HSign::Nonnegative:
      return "nonnegative";
    case HSign::Nonpositive:
      return "nonpositive";
    case HSign::Mixed:
      return "mixed";
  }
  return "mixed";
}

HSign hsign_from_string(std::string_view name) {
  if (name == "nonnegative") return HSign::Nonnegative;
  if (name == "nonpositive") return HSign::Nonpositive;
  if (name == "mixed") return HSign::Mixed;
  throw std::invalid_argument(fmt::format("unknown H sign '{}'", name));
}

PrescribedH PrescribedH::constant(double value) {
  PrescribedH h;
  h.value_ = value;
  h.sign_ = value > 0.0 ? HSign::Nonnegative : value < 0.0 ? HSign::Nonpositive : HSign::Nonnegative;
  h.z_nondecreasing_ = true;
  return h;
}

PrescribedH PrescribedH::expression(const std::string& source, HSign sign, bool z_nondecreasing, double z_min,
                                    double z_max) {
  if (!(z_min < z_max)) throw std::invalid_argument("H z-range must satisfy z_min < z_max");
  PrescribedH h;
  h.expr_ = Expression::parse(source);
  h.sign_ = sign;
  h.z_nondecreasing_ = z_nondecreasing;
  h.z_min_ = z_min;
  h.z_max_ = z_max;
  return h;
}

double PrescribedH::operator()(const Eigen::Vector2d& x, double z) const {
  if (!expr_) return scale_ * value_;
  return scale_ * (*expr_)(x.x(), x.y(), z);
}

double PrescribedH::dz(const Eigen::Vector2d& x, double z) const {
  if (!expr_ || !expr_->depends_on_z()) return 0.0;
  return scale_ * expr_->eval_grad(x.x(), x.y(), z).grad[2];
}

Eigen::Vector2d PrescribedH::grad_x(const Eigen::Vector2d& x, double z) const {
  if (!expr_ || !expr_->depends_on_x()) return Eigen::Vector2d::Zero();
  const auto g = expr_->eval_grad(x.x(), x.y(), z);
  return scale_ * Eigen::Vector2d(g.grad[0], g.grad[1]);
}

bool PrescribedH::z_extrema_exact() const { return !expr_ || !expr_->depends_on_z() || z_nondecreasing_; }

double PrescribedH::sup_abs_over_z(const Eigen::Vector2d& x) const {
  if (!expr_ || !expr_->depends_on_z()) return std::abs((*this)(x, 0.0));
  if (z_nondecreasing_) return std::max(std::abs((*this)(x, z_min_)), std::abs((*this)(x, z_max_)));
  double best = 0.0;
  for (int i = 0; i < kZProbes; ++i)
    best = std::max(best, std::abs((*this)(x, z_min_ + (z_max_ - z_min_) * i / (kZProbes - 1))));
  return best;
}

double PrescribedH::inf_sq_over_z(const Eigen::Vector2d& x) const {
  if (!expr_ || !expr_->depends_on_z()) {
    const double v = (*this)(x, 0.0);
    return v * v;
  }
  if (z_nondecreasing_) {
    const double lo = (*this)(x, z_min_), hi = (*this)(x, z_max_);
    if (lo <= 0.0 && hi >= 0.0) return 0.0;
    return std::min(lo * lo, hi * hi);
  }
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < kZProbes; ++i) {
    const double v = (*this)(x, z_min_ + (z_max_ - z_min_) * i / (kZProbes - 1));
    best = std::min(best, v * v);
  }
  return best;
}

double PrescribedH::grad_x_sup_norm(const Eigen::Vector2d& x, const Eigen::Matrix2d& sigma_inv) const {
  if (!expr_ || !expr_->depends_on_x()) return 0.0;
  auto norm_at = [&](double z) {
    const Eigen::Vector2d g = grad_x(x, z);
    return std::sqrt(std::max(0.0, g.dot(sigma_inv * g)));
  };
  if (!expr_->depends_on_z()) return norm_at(0.0);
  double best = 0.0;
  for (int i = 0; i < kZProbes; ++i) best = std::max(best, norm_at(z_min_ + (z_max_ - z_min_) * i / (kZProbes - 1)));
  return best;
}

PrescribedH PrescribedH::scaled(double factor) const {
  PrescribedH h = *this;
  h.scale_ *= factor;
  if (factor < 0.0) {
    if (h.sign_ == HSign::Nonnegative)
      h.sign_ = HSign::Nonpositive;
    else if (h.sign_ == HSign::Nonpositive)
      h.sign_ = HSign::Nonnegative;
    h.z_nondecreasing_ = h.is_constant() || (expr_ && !expr_->depends_on_z());
  }
  return h;
}

std::string PrescribedH::describe() const {
  if (!expr_) return fmt::format("{}", constant_value());
  if (scale_ == 1.0) return expr_->source();
  return fmt::format("{} * ({})", scale_, expr_->source());
}

std::optional<std::string> PrescribedH::spot_check(const Eigen::Vector2d& lo, const Eigen::Vector2d& hi,
                                                   std::uint64_t seed, int probes) const {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(lo.x(), hi.x()), uy(lo.y(), hi.y()), uz(z_min_, z_max_);
  for (int i = 0; i < probes; ++i) {
    const Eigen::Vector2d x(ux(rng), uy(rng));
    double z1 = uz(rng), z2 = uz(rng);
    if (z1 > z2) std::swap(z1, z2);
    const double h1 = (*this)(x, z1), h2 = (*this)(x, z2);
    if (!std::isfinite(h1) || !std::isfinite(h2))
      return fmt::format("H is not finite at x = ({}, {}), z = {}", x.x(), x.y(), std::isfinite(h1) ? z2 : z1);
    if (sign_ == HSign::Nonnegative && std::min(h1, h2) < 0.0)
      return fmt::format("H declared nonnegative but H({}, {}, {}) = {}", x.x(), x.y(), h1 < h2 ? z1 : z2,
                         std::min(h1, h2));
    if (sign_ == HSign::Nonpositive && std::max(h1, h2) > 0.0)
      return fmt::format("H declared nonpositive but H({}, {}, {}) = {}", x.x(), x.y(), h1 > h2 ? z1 : z2,
                         std::max(h1, h2));
    if (z_nondecreasing_ && h2 < h1 - 1e-12 * (1.0 + std::abs(h1)))
      return fmt::format("H declared nondecreasing in z but H(x, {}) = {} > H(x, {}) = {} at x = ({}, {})", z1, h1,
                         z2, h2, x.x(), x.y());
  }
  return std::nullopt;
}

}  // namespace pmc
