#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "pmc/expression.hpp"

namespace pmc {

enum class HSign { Nonnegative, Nonpositive, Mixed };

std::string_view to_string(HSign sign);
HSign hsign_from_string(std::string_view name);

/// The prescribed mean curvature H(x, z), either a constant or an expression,
/// together with the declarations the theorems need: sign, monotonicity in z,
/// and the z-range over which sup/inf over z are taken when they cannot be
/// found analytically.
class PrescribedH {
 public:
  static PrescribedH constant(double value);
  static PrescribedH expression(const std::string& source, HSign sign, bool z_nondecreasing, double z_min,
                                double z_max);

  double operator()(const Eigen::Vector2d& x, double z) const;
  double dz(const Eigen::Vector2d& x, double z) const;
  Eigen::Vector2d grad_x(const Eigen::Vector2d& x, double z) const;

  /// sup_z |H(x, z)|.
  double sup_abs_over_z(const Eigen::Vector2d& x) const;
  /// inf_z H(x, z)^2.
  double inf_sq_over_z(const Eigen::Vector2d& x) const;
  /// sup_z ||grad_x H(x, z)|| measured with the inverse metric.
  double grad_x_sup_norm(const Eigen::Vector2d& x, const Eigen::Matrix2d& sigma_inv) const;

  /// Same function multiplied by `factor`.
  PrescribedH scaled(double factor) const;

  bool is_constant() const { return !expr_.has_value(); }
  double constant_value() const { return scale_ * value_; }
  HSign sign() const { return sign_; }
  bool z_nondecreasing() const { return z_nondecreasing_; }
  double z_min() const { return z_min_; }
  double z_max() const { return z_max_; }
  /// True when sup/inf over z are exact (constant, z-free, or monotone in z
  /// and evaluated at the ends of the declared range).
  bool z_extrema_exact() const;
  std::string describe() const;

  /// Probes the declarations at `probes` random (x, z) in the box
  /// [lo, hi] x [z_min, z_max]. Returns a diagnostic if one fails.
  std::optional<std::string> spot_check(const Eigen::Vector2d& lo, const Eigen::Vector2d& hi, std::uint64_t seed,
                                        int probes = 1000) const;

 private:
  std::optional<Expression> expr_;
  double value_ = 0.0;
  double scale_ = 1.0;
  HSign sign_ = HSign::Mixed;
  bool z_nondecreasing_ = true;
  double z_min_ = -1.0;
  double z_max_ = 1.0;
};

}  // namespace pmc
