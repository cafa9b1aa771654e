#include "pmc/solver.hpp"

#include <cmath>
#include <limits>
#include <optional>

#include <Eigen/SparseLU>
#include <spdlog/spdlog.h>

namespace pmc {

namespace {

double interior_residual(const Discretization& disc, const PrescribedH& H, std::span<const double> u,
                         Eigen::VectorXd& F) {
  const Mesh& mesh = disc.mesh();
  F.setZero(mesh.num_vertices());
  double norm = 0.0;
  for (int v : mesh.interior) {
    const double q = q_at(disc, H, v, u);
    F(v) = q;
    if (!std::isfinite(q)) return std::numeric_limits<double>::infinity();
    norm = std::max(norm, std::abs(q));
  }
  return norm;
}

struct NewtonResult {
  bool converged = false;
  bool singular = false;
  int iterations = 0;
  double residual = 0.0;
};

NewtonResult newton(const Discretization& disc, const PrescribedH& H, std::vector<double>& u,
                    const SolveOptions& opt, std::vector<double>& history) {
  const Mesh& mesh = disc.mesh();
  Eigen::VectorXd F;
  NewtonResult out;
  double norm = interior_residual(disc, H, u, F);
  history.push_back(std::max(norm, std::numeric_limits<double>::min()));
  out.residual = norm;
  if (!std::isfinite(norm)) return out;
  std::vector<double> trial(u.size());
  Eigen::VectorXd Ft;
  while (norm >= opt.tol && out.iterations < opt.max_iterations) {
    const ScalarField uf(mesh, u);
    const Eigen::SparseMatrix<double> J = q_jacobian(disc, H, uf);
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(J);
    if (lu.info() != Eigen::Success) {
      out.singular = true;
      return out;
    }
    Eigen::VectorXd delta = lu.solve(-F);
    if (lu.info() != Eigen::Success || !delta.allFinite()) {
      out.singular = true;
      return out;
    }
    // The boundary rows are the identity with zero right-hand side; drop the
    // round-off so Dirichlet values stay exact.
    for (const auto& b : mesh.boundary) delta(b.vertex) = 0.0;
    double t = 1.0;
    double trial_norm = 0.0;
    while (true) {
      for (std::size_t i = 0; i < u.size(); ++i) trial[i] = u[i] + t * delta(static_cast<Eigen::Index>(i));
      trial_norm = interior_residual(disc, H, trial, Ft);
      if (std::isfinite(trial_norm) && trial_norm <= (1.0 - 1e-4 * t) * norm) break;
      t *= opt.armijo_factor;
      if (t < opt.min_step) {
        Eigen::Index worst = 0;
        F.cwiseAbs().maxCoeff(&worst);
        const Vec2& at = mesh.vertices[static_cast<std::size_t>(worst)];
        spdlog::debug("newton: line search failed at residual {:.3e} (vertex {} at ({:.6f}, {:.6f}))", norm, worst,
                      at.x(), at.y());
        return out;
      }
    }
    u.swap(trial);
    F.swap(Ft);
    norm = trial_norm;
    ++out.iterations;
    out.residual = norm;
    history.push_back(std::max(norm, std::numeric_limits<double>::min()));
    spdlog::trace("newton: iteration {} step {} residual {:.3e}", out.iterations, t, norm);
  }
  out.converged = norm < opt.tol;
  return out;
}

// du/dlambda along the solution branch: J du = -dF/dlambda, where F is the
// residual with boundary rows u - lambda g (data mode) or the interior rows
// M u - lambda n H (amplitude mode).
std::optional<Eigen::VectorXd> branch_tangent(const Discretization& disc, const PrescribedH& H_step,
                                              const PrescribedH& H, const ScalarField& boundary_data,
                                              const std::vector<double>& u, bool data_mode) {
  const Mesh& mesh = disc.mesh();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(mesh.num_vertices());
  if (data_mode) {
    for (const auto& b : mesh.boundary) rhs(b.vertex) = boundary_data[static_cast<std::size_t>(b.vertex)];
  } else {
    const int n = mesh.model.dim;
    for (int v : mesh.interior) rhs(v) = n * H(mesh.vertices[static_cast<std::size_t>(v)], u[static_cast<std::size_t>(v)]);
  }
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(q_jacobian(disc, H_step, ScalarField(mesh, u)));
  if (lu.info() != Eigen::Success) return std::nullopt;
  Eigen::VectorXd du = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !du.allFinite()) return std::nullopt;
  return du;
}

}  // namespace

Eigen::SparseMatrix<double> q_jacobian(const Discretization& disc, const PrescribedH& H, const ScalarField& u) {
  const Mesh& mesh = disc.mesh();
  const int nv = mesh.num_vertices();
  const int n = mesh.model.dim;
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(nv) * 20);
  for (const auto& b : mesh.boundary) trips.emplace_back(b.vertex, b.vertex, 1.0);
  for (int v : mesh.interior) {
    const auto i = static_cast<std::size_t>(v);
    const Stencil& st = disc.stencil(v);
    const PointOperator P = mean_curvature_point(disc.metric(v), disc.christoffels(v), disc.jet(v, u.values()));
    Eigen::Matrix<double, 5, 1> w;
    w << P.d_grad(0), P.d_grad(1), P.d_hess(0, 0), P.d_hess(0, 1) + P.d_hess(1, 0), P.d_hess(1, 1);
    double diag = -n * H.dz(mesh.vertices[i], u[i]);
    for (std::size_t j = 0; j < st.nbrs.size(); ++j) {
      const double c = w.dot(st.coeff.col(static_cast<Eigen::Index>(j)));
      trips.emplace_back(v, st.nbrs[j], c);
      diag -= c;
    }
    trips.emplace_back(v, v, diag);
  }
  Eigen::SparseMatrix<double> J(nv, nv);
  J.setFromTriplets(trips.begin(), trips.end());
  return J;
}

ScalarField harmonic_extension(const Discretization& disc, const ScalarField& data) {
  const Mesh& mesh = disc.mesh();
  const int nv = mesh.num_vertices();
  std::vector<Eigen::Triplet<double>> trips;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nv);
  for (const auto& b : mesh.boundary) {
    trips.emplace_back(b.vertex, b.vertex, 1.0);
    rhs(b.vertex) = data[static_cast<std::size_t>(b.vertex)];
  }
  for (int v : mesh.interior) {
    const Stencil& st = disc.stencil(v);
    const Christoffels& G = disc.christoffels(v);
    const Eigen::MatrixXd& s = disc.metric(v).sigma_inv;
    Eigen::Matrix<double, 5, 1> w;
    w << -(s(0, 0) * G(0, 0, 0) + 2 * s(0, 1) * G(0, 0, 1) + s(1, 1) * G(0, 1, 1)),
        -(s(0, 0) * G(1, 0, 0) + 2 * s(0, 1) * G(1, 0, 1) + s(1, 1) * G(1, 1, 1)), s(0, 0), 2 * s(0, 1), s(1, 1);
    double diag = 0.0;
    for (std::size_t j = 0; j < st.nbrs.size(); ++j) {
      const double c = w.dot(st.coeff.col(static_cast<Eigen::Index>(j)));
      trips.emplace_back(v, st.nbrs[j], c);
      diag -= c;
    }
    trips.emplace_back(v, v, diag);
  }
  Eigen::SparseMatrix<double> L(nv, nv);
  L.setFromTriplets(trips.begin(), trips.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(L);
  if (lu.info() != Eigen::Success) throw std::runtime_error("harmonic extension: singular Laplacian");
  const Eigen::VectorXd x = lu.solve(rhs);
  return ScalarField(mesh, std::vector<double>(x.data(), x.data() + nv));
}

double max_boundary_gradient(const Discretization& disc, const ScalarField& u, int* argmax) {
  double best = 0.0;
  int arg = -1;
  for (const auto& b : disc.mesh().boundary) {
    const double g = disc.gradient_norm(b.vertex, u.values());
    if (g > best || arg < 0) {
      best = g;
      arg = b.vertex;
    }
  }
  if (argmax) *argmax = arg;
  return best;
}

SolveReport solve_dirichlet(const Discretization& disc, const PrescribedH& H, const ScalarField& boundary_data,
                            const SolveOptions& options, const ScalarField* initial) {
  const Mesh& mesh = disc.mesh();
  if (options.schedule.empty() || std::abs(options.schedule.back() - 1.0) > 1e-15)
    throw std::invalid_argument("continuation schedule must end at 1");
  for (const auto& b : mesh.boundary)
    if (!std::isfinite(boundary_data[static_cast<std::size_t>(b.vertex)]))
      throw std::invalid_argument("boundary data is not finite");

  bool trivial = true;
  if (options.continuation == ContinuationMode::BoundaryData) {
    for (const auto& b : mesh.boundary)
      if (boundary_data[static_cast<std::size_t>(b.vertex)] != 0.0) trivial = false;
  } else {
    trivial = H.is_constant() && H.constant_value() == 0.0;
  }
  const std::vector<double> schedule = trivial ? std::vector<double>{1.0} : options.schedule;

  SolveReport report;
  const bool data_mode = options.continuation == ContinuationMode::BoundaryData;
  std::vector<double> u_prev(static_cast<std::size_t>(mesh.num_vertices()), 0.0);
  double done = 0.0;
  if (initial) {
    u_prev.assign(initial->values().begin(), initial->values().end());
  } else if (!data_mode) {
    const ScalarField ext = harmonic_extension(disc, boundary_data);
    u_prev.assign(ext.values().begin(), ext.values().end());
  }
  // Start the data branch from the zero-data solution so the first tangent is
  // taken on the branch.
  auto record = [&](double lam, const NewtonResult& nr, const std::vector<double>& u) {
    ContinuationStep step;
    step.lambda = lam;
    step.converged = nr.converged;
    step.iterations = nr.iterations;
    step.final_residual = nr.residual;
    step.max_boundary_gradient = max_boundary_gradient(disc, ScalarField(mesh, u), &step.max_gradient_vertex);
    report.continuation_trace.push_back(step);
    report.iterations += nr.iterations;
    report.jacobian_singular = report.jacobian_singular || nr.singular;
    if (std::isfinite(step.max_boundary_gradient) && step.max_boundary_gradient >= report.max_boundary_gradient) {
      report.max_boundary_gradient = step.max_boundary_gradient;
      report.max_gradient_vertex = step.max_gradient_vertex;
    }
    spdlog::debug("continuation: lambda {:.6f} {} after {} iterations, residual {:.3e}, boundary gradient {:.3e}",
                  lam, nr.converged ? "converged" : "failed", nr.iterations, nr.residual, step.max_boundary_gradient);
  };
  if (data_mode && !initial && !trivial && !(H.is_constant() && H.constant_value() == 0.0)) {
    std::vector<double> u0 = u_prev;
    const NewtonResult nr = newton(disc, H, u0, options, report.residual_history);
    record(0.0, nr, u0);
    if (nr.converged) u_prev.swap(u0);
  }
  // Euler predictor along the branch; the harmonic extension of the data
  // stands in where the Jacobian is singular.
  const ScalarField unit_ext = data_mode ? harmonic_extension(disc, boundary_data) : ScalarField(mesh);
  auto tangent_at = [&](double lam) {
    const PrescribedH H_lam = data_mode ? H : H.scaled(lam);
    auto du = branch_tangent(disc, H_lam, H, boundary_data, u_prev, data_mode);
    if (du) return std::vector<double>(du->data(), du->data() + du->size());
    return std::vector<double>(unit_ext.values().begin(), unit_ext.values().end());
  };
  std::vector<double> tangent = tangent_at(0.0);
  int failures = 0;
  std::size_t next = 0;
  double lambda = schedule[0];
  while (next < schedule.size()) {
    const PrescribedH H_step = data_mode ? H : H.scaled(lambda);
    const double data_scale = data_mode ? lambda : 1.0;
    std::vector<double> u = u_prev;
    if (!(initial && report.continuation_trace.empty()))
      for (std::size_t i = 0; i < u.size(); ++i) u[i] += (lambda - done) * tangent[i];
    for (const auto& b : mesh.boundary)
      u[static_cast<std::size_t>(b.vertex)] = data_scale * boundary_data[static_cast<std::size_t>(b.vertex)];

    const NewtonResult nr = newton(disc, H_step, u, options, report.residual_history);
    record(lambda, nr, u);

    if (nr.converged) {
      failures = 0;
      done = lambda;
      u_prev.swap(u);
      report.solution = ScalarField(mesh, u_prev);
      report.last_converged_lambda = done;
      tangent = tangent_at(done);
      if (lambda >= schedule[next]) ++next;
      if (next < schedule.size()) lambda = schedule[next];
    } else {
      if (++failures >= options.max_consecutive_failures) {
        report.stalled = true;
        break;
      }
      lambda = 0.5 * (done + lambda);
    }
  }
  report.converged = next >= schedule.size();
  return report;
}

ComparisonResult discrete_comparison_check(const ScalarField& u, const ScalarField& v, const ScalarField& Qu,
                                           const ScalarField& Qv, const std::vector<char>& interior_mask,
                                           const std::vector<char>& boundary_mask, double slack) {
  ComparisonResult out;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (interior_mask[i] && Qu[i] < Qv[i] - slack) {
      return {ComparisonVerdict::Inapplicable, static_cast<int>(i), Qv[i] - Qu[i]};
    }
    if (boundary_mask[i] && u[i] > v[i] + slack) {
      return {ComparisonVerdict::Inapplicable, static_cast<int>(i), u[i] - v[i]};
    }
  }
  out.gap = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!interior_mask[i] && !boundary_mask[i]) continue;
    const double g = u[i] - v[i];
    if (g > out.gap) {
      out.gap = g;
      out.worst_vertex = static_cast<int>(i);
    }
  }
  if (out.worst_vertex < 0) out.gap = 0.0;
  out.verdict = out.gap > slack ? ComparisonVerdict::Violated : ComparisonVerdict::Holds;
  return out;
}

}  // namespace pmc
