#include "pmc/demo.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace pmc {

std::string_view to_string(ControlKind k) {
  return k == ControlKind::ScaledH ? "scaled-h" : "other-boundary";
}

SolveOptions DemoOptions::default_solver() {
  SolveOptions o;
  o.schedule = {0.005, 0.01, 0.02, 0.04, 0.07, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  return o;
}

namespace {

double min_margin(const SerrinReport& rep, double scale, int n = 2) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& s : rep.samples) m = std::min(m, (n - 1) * s.curvature - n * scale * s.sup_abs_h);
  return m;
}

// Largest scale whose min margin is the mirror image of the violating one.
double mirrored_scale(const SerrinReport& rep) {
  const double target = -rep.min_margin;
  if (!(min_margin(rep, 0.0) > target)) return std::numeric_limits<double>::quiet_NaN();
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (lo + hi);
    (min_margin(rep, mid) > target ? lo : hi) = mid;
  }
  return lo;
}

void run_paired(DemoRun& run, const Discretization& disc, const SolveOptions& opt, double a) {
  const Mesh& mesh = disc.mesh();
  run.report = solve_dirichlet(disc, run.H, *run.data, opt);
  const auto& trace = run.report.continuation_trace;
  run.initial_gradient = trace.empty() ? 0.0 : trace.front().max_boundary_gradient;
  if (run.report.solution) run.final_gradient = max_boundary_gradient(disc, *run.report.solution);
  const int v = run.report.max_gradient_vertex;
  run.gradient_distance =
      v >= 0 ? distance(mesh.model, mesh.vertices[static_cast<std::size_t>(v)], run.spike)
             : std::numeric_limits<double>::infinity();
  run.localized = run.gradient_distance < a;
  spdlog::info("{}: converged {} stalled {} at lambda {:.4g}, boundary gradient {:.4g} (initial {:.4g})", run.label,
               run.report.converged, run.report.stalled, run.report.last_converged_lambda,
               run.report.max_boundary_gradient, run.initial_gradient);
}

}  // namespace

DemoReport demo_nonexistence(const DomainSpec& spec, const PrescribedH& H, const DemoOptions& options) {
  DemoReport rep;
  const Mesh coarse = mesh_domain(spec, options.mesh_h);
  rep.serrin = classify(spec, H, coarse);
  if (rep.serrin.verdict != Verdict::ViolatedAt) {
    throw DemoRefused(fmt::format("classifier verdict is {}, not ViolatedAt", to_string(rep.serrin.verdict)));
  }
  if (spec.model().dim != 2) throw DemoRefused("the demo runs on surfaces (n = 2)");

  const MarginSample& worst = rep.serrin.argmin;
  rep.constants = compute_constants(spec, H, worst.at, options.k);
  const double a = rep.constants.a;
  const PsiProfile psi{rep.constants.c, a, rep.constants.delta};
  rep.bound = height_bound(rep.constants, psi, options.k, options.k);
  rep.eps = options.safety_factor * rep.bound.eps_a;

  const bool minimal = H.is_constant() && H.constant_value() == 0.0;
  rep.control_kind = options.control.value_or(minimal ? ControlKind::OtherBoundary : ControlKind::ScaledH);

  Vec2 control_spike = worst.point;
  double control_margin = 0.0;
  if (rep.control_kind == ControlKind::ScaledH) {
    rep.control_scale = options.control_scale.value_or(mirrored_scale(rep.serrin));
    if (!std::isfinite(rep.control_scale)) throw DemoRefused("no scaling of H makes the margin positive");
    control_margin = min_margin(rep.serrin, rep.control_scale);
  } else {
    const MarginSample* best = &rep.serrin.samples.front();
    for (const auto& s : rep.serrin.samples)
      if (s.margin > best->margin) best = &s;
    control_spike = best->point;
    control_margin = best->margin;
  }
  if (!(control_margin > 0.0)) throw DemoRefused("the control configuration does not satisfy the Serrin condition");

  rep.h_min = a / options.refine_divisor;
  MeshOptions mo;
  mo.refinements.push_back({worst.point, rep.h_min, options.refine_radius_factor * a});
  if (rep.control_kind == ControlKind::OtherBoundary)
    mo.refinements.push_back({control_spike, rep.h_min, options.refine_radius_factor * a});
  rep.mesh = std::make_shared<const Mesh>(mesh_domain(spec, options.mesh_h, mo));
  const Discretization disc(*rep.mesh);

  rep.violating.label = "violating";
  rep.violating.H = H;
  rep.violating.spike = worst.point;
  rep.violating.margin = rep.serrin.min_margin;
  rep.violating.data = generate_failing_data(*rep.mesh, worst.point, a, options.k, rep.eps);
  rep.control.label = "control";
  rep.control.H = rep.control_kind == ControlKind::ScaledH ? H.scaled(rep.control_scale) : H;
  rep.control.spike = control_spike;
  rep.control.margin = control_margin;
  rep.control.data = rep.control_kind == ControlKind::ScaledH
                         ? rep.violating.data
                         : generate_failing_data(*rep.mesh, control_spike, a, options.k, rep.eps);

  run_paired(rep.violating, disc, options.solver, a);
  run_paired(rep.control, disc, options.solver, a);

  const auto& v = rep.violating;
  rep.nonexistence_detected = v.report.stalled && v.localized &&
                              v.report.max_boundary_gradient > options.growth_threshold * v.initial_gradient;
  rep.control_converged = rep.control.report.converged;
  return rep;
}

}  // namespace pmc
