#pragma once

// Barrier profiles and supersolutions for the height estimate near a boundary
// point y0 where the Serrin condition fails:
//
//   phi(t) = sqrt(2/nu) ((a - eps)^(1/2) - (t - eps)^(1/2)),  eps < t <= a
//   psi(t) = sqrt(2/c) int_t^delta (log(r/a))^(-1/2) dr,      a < t <= delta
//
//   v = max{k, sup_ring} + phi(d)   on {x in B_a(y0) : d(x) > eps}
//   w = sup_outer + psi(rho)        on Omega minus B_a(y0)

#include <optional>
#include <stdexcept>
#include <vector>

#include "pmc/fields.hpp"
#include "pmc/mc_operator.hpp"
#include "pmc/prescribed_h.hpp"

namespace pmc {

class BarrierError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ProfileValue {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

struct PhiProfile {
  double nu = 1.0;
  double a = 0.1;
  double eps = 0.0;
};

struct PsiProfile {
  double c = 1.0;
  double a = 0.1;
  double delta = 1.0;
};

/// Closed form; t = a is allowed. Throws BarrierError for t <= eps or t > a.
ProfileValue phi_eval(const PhiProfile& p, double t);
/// psi by Gauss-Kronrod quadrature after r = a exp(w^2); derivatives in
/// closed form. Throws BarrierError for t <= a or t > delta.
ProfileValue psi_eval(const PsiProfile& p, double t);
/// psi(a+), evaluated at a + 1e-12.
double psi_at_a(const PsiProfile& p);

struct LemmaConstants {
  double nu = 0.0;
  double R1 = 0.0;
  double R2 = 0.0;
  double a = 0.0;
  double k = 0.0;
  /// pi / (2 sqrt K) - max dist(y0, x) for K > 0; NaN otherwise.
  double kappa_margin = 0.0;
  double c = 1.0;      ///< psi constant: n - 1, or (n - 1) C on the sphere
  double delta = 0.0;  ///< intrinsic diameter of the domain
  double tau = 0.0;    ///< focal distance of the boundary at y0 (may be +inf)
  double boundary_curvature = 0.0;
  double h_at_y0 = 0.0;
  int connectivity_shrinks = 0;
  BoundaryPoint y0;
  Vec2 y0_point = Vec2::Zero();
  /// Arc of the y0 component used as S: every boundary point within 3a of y0.
  BoundaryWindow window;
};

/// Selects nu, R1, R2 and a at y0 for the level k. Throws BarrierError when
/// the Serrin condition holds at (y0, k).
LemmaConstants compute_constants(const DomainSpec& spec, const PrescribedH& H, BoundaryPoint y0, double k);

/// True if the circle of radius a about y0 meets the domain in one arc
/// (exactly two boundary crossings).
bool ball_trace_connected(const DomainSpec& spec, const Vec2& y0, double a, int samples = 4096);

/// A field defined on a subset of vertices; undefined values are NaN.
struct BarrierField {
  ScalarField field;
  std::vector<char> defined;
  int count() const;
};

/// v = max{k, sup_ring} + phi(d) where d is valid, d > eps and rho < a.
BarrierField assemble_v(const Mesh& mesh, double k, double sup_ring, const PhiProfile& profile,
                        const BoundaryDistanceField& d, const ScalarField& rho);
/// w = sup_outer + psi(rho) where a < rho <= delta.
BarrierField assemble_w(const Mesh& mesh, double sup_outer, const PsiProfile& profile, const ScalarField& rho);

struct SupersolutionCheck {
  double max_q = 0.0;
  int argmax = -1;
  int checked = 0;
};

/// max of Q over interior vertices whose whole stencil lies in the defined
/// region. Throws BarrierError if no vertex qualifies or if H is not declared
/// nonnegative and nondecreasing in z.
SupersolutionCheck verify_supersolution(const Discretization& disc, const PrescribedH& H, const BarrierField& f);

struct HeightBound {
  double bound = 0.0;
  double psi_a = 0.0;
  double phi_term = 0.0;  ///< sqrt(2a / nu)
  double eps_a = 0.0;     ///< psi(a) + sqrt(2a / nu)
};

/// max{k, sup_outer} + psi(a) + sqrt(2a / nu).
HeightBound height_bound(const LemmaConstants& constants, const PsiProfile& psi, double k, double sup_outer);

/// eps(a) = psi_a(a) + sqrt(2a / nu) for each probe a, with c and delta fixed.
std::vector<double> eps_of_a(double nu, double c, double delta, const std::vector<double>& a_values);

}  // namespace pmc
