#include "pmc/runner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <memory>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "pmc/barriers.hpp"
#include "pmc/demo.hpp"
#include "pmc/expression.hpp"
#include "pmc/serrin.hpp"
#include "pmc/solver.hpp"

namespace pmc {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return fmt::format("{:.17g}", x);
}

namespace {

void dump_into(const json& j, int indent, std::string& out) {
  const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
  const std::string close(static_cast<std::size_t>(indent), ' ');
  switch (j.type()) {
    case json::value_t::number_float: {
      const double x = j.get<double>();
      out += std::isfinite(x) ? format_real(x) : "null";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        out += pad;
        dump_into(j[i], indent + 2, out);
        out += i + 1 < j.size() ? ",\n" : "\n";
      }
      out += close + "]";
      return;
    }
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      std::size_t i = 0;
      for (auto it = j.begin(); it != j.end(); ++it, ++i) {
        out += pad + json(it.key()).dump() + ": ";
        dump_into(it.value(), indent + 2, out);
        out += i + 1 < j.size() ? ",\n" : "\n";
      }
      out += close + "}";
      return;
    }
    default:
      out += j.dump();
  }
}

}  // namespace

std::string dump_json(const json& j) {
  std::string out;
  dump_into(j, 0, out);
  out += "\n";
  return out;
}

ArtifactWriter::ArtifactWriter(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

void ArtifactWriter::write(const std::string& name, const std::string& contents) {
  std::ofstream f(dir_ / name, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error(fmt::format("cannot write '{}'", (dir_ / name).string()));
  f << contents;
  entries_.erase(std::remove_if(entries_.begin(), entries_.end(), [&](const Entry& e) { return e.name == name; }),
                 entries_.end());
  entries_.push_back({name, sha256_hex(contents), contents.size()});
}

void ArtifactWriter::write_field(const std::string& name, const ScalarField& f) {
  const Mesh& mesh = f.mesh();
  std::string s = "vertex,x,y,value\n";
  for (int i = 0; i < mesh.num_vertices(); ++i) {
    const Vec2& p = mesh.vertices[static_cast<std::size_t>(i)];
    s += fmt::format("{},{},{},{}\n", i, format_real(p.x()), format_real(p.y()),
                     format_real(f[static_cast<std::size_t>(i)]));
  }
  write(name, s);
}

void ArtifactWriter::write_manifest(const std::string& scenario_sha256) {
  std::vector<Entry> sorted = entries_;
  std::sort(sorted.begin(), sorted.end(), [](const Entry& a, const Entry& b) { return a.name < b.name; });
  json m;
  m["scenario_sha256"] = scenario_sha256;
  m["artifacts"] = json::array();
  for (const Entry& e : sorted) m["artifacts"].push_back({{"path", e.name}, {"sha256", e.sha256}, {"bytes", e.bytes}});
  const std::string text = dump_json(m);
  std::ofstream f(dir_ / "manifest.json", std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write manifest.json");
  f << text;
}

namespace {

json vec_json(const Vec2& p) { return json::array({p.x(), p.y()}); }

json mesh_json(const Mesh& mesh) {
  return {{"h", mesh.h},
          {"vertices", mesh.num_vertices()},
          {"cells", mesh.cells.size()},
          {"boundary_vertices", mesh.boundary.size()},
          {"min_angle_deg", mesh.min_angle_deg()}};
}

json header_json(const Scenario& s, Experiment e) {
  json o = json::object();
  if (s.overrides.mesh_h) o["mesh_h"] = *s.overrides.mesh_h;
  if (s.overrides.tol) o["tol"] = *s.overrides.tol;
  if (s.overrides.seed) o["seed"] = *s.overrides.seed;
  return {{"name", s.name},
          {"sha256", s.sha256},
          {"experiment", to_string(e)},
          {"seed", s.seed},
          {"overrides", o},
          {"model",
           {{"curvature", s.model.curvature}, {"dim", s.model.dim}, {"chart", to_string(s.model.chart)}}},
          {"domain", s.domain.label()},
          {"H",
           {{"value", s.H.describe()},
            {"sign", to_string(s.H.sign())},
            {"z_nondecreasing", s.H.z_nondecreasing()},
            {"z_range", json::array({s.H.z_min(), s.H.z_max()})}}}};
}

json serrin_json(const SerrinReport& r) {
  json theorems = json::array();
  for (const TheoremCheck& t : r.theorems) {
    json hyp = json::object();
    for (const Hypothesis& h : t.hypotheses) hyp[h.name] = h.holds;
    theorems.push_back(
        {{"id", t.id}, {"title", t.title}, {"direction", to_string(t.direction)}, {"applies", t.applies()},
         {"hypotheses", hyp}});
  }
  return {{"verdict", to_string(r.verdict)},
          {"min_margin", r.min_margin},
          {"argmin",
           {{"component", r.argmin.at.component},
            {"t", r.argmin.at.t},
            {"point", vec_json(r.argmin.point)},
            {"curvature", r.argmin.curvature},
            {"sup_abs_h", r.argmin.sup_abs_h},
            {"margin", r.argmin.margin}}},
          {"tolerance", r.tolerance},
          {"z_extrema_exact", r.z_extrema_exact},
          {"samples_per_component", r.samples_per_component},
          {"theorems", theorems},
          {"ricci", {{"holds", r.ricci.holds}, {"slack", r.ricci.slack}, {"worst_vertex", r.ricci.worst_vertex}}}};
}

std::string margins_csv(const SerrinReport& r) {
  std::string s = "component,t,x,y,curvature,sup_abs_h,margin\n";
  for (const MarginSample& m : r.samples) {
    s += fmt::format("{},{},{},{},{},{},{}\n", m.at.component, format_real(m.at.t), format_real(m.point.x()),
                     format_real(m.point.y()), format_real(m.curvature), format_real(m.sup_abs_h),
                     format_real(m.margin));
  }
  return s;
}

json constants_json(const LemmaConstants& c) {
  return {{"y0", {{"component", c.y0.component}, {"t", c.y0.t}, {"point", vec_json(c.y0_point)}}},
          {"nu", c.nu},
          {"R1", c.R1},
          {"R2", c.R2},
          {"a", c.a},
          {"k", c.k},
          {"kappa_margin", c.kappa_margin},
          {"c", c.c},
          {"delta", c.delta},
          {"tau", c.tau},
          {"boundary_curvature", c.boundary_curvature},
          {"h_at_y0", c.h_at_y0},
          {"connectivity_shrinks", c.connectivity_shrinks},
          {"window", {{"component", c.window.component}, {"t_begin", c.window.t_begin}, {"t_end", c.window.t_end}}}};
}

json bound_json(const HeightBound& b) {
  return {{"bound", b.bound}, {"psi_a", b.psi_a}, {"phi_term", b.phi_term}, {"eps_a", b.eps_a}};
}

json trace_json(const SolveReport& r) {
  json t = json::array();
  for (const ContinuationStep& s : r.continuation_trace) {
    t.push_back({{"lambda", s.lambda},
                 {"converged", s.converged},
                 {"max_boundary_gradient", s.max_boundary_gradient},
                 {"max_gradient_vertex", s.max_gradient_vertex},
                 {"iterations", s.iterations},
                 {"final_residual", s.final_residual}});
  }
  return t;
}

json solve_json(const SolveReport& r) {
  return {{"converged", r.converged},
          {"stalled", r.stalled},
          {"jacobian_singular", r.jacobian_singular},
          {"iterations", r.iterations},
          {"max_boundary_gradient", r.max_boundary_gradient},
          {"max_gradient_vertex", r.max_gradient_vertex},
          {"last_converged_lambda", r.last_converged_lambda},
          {"residual_history", r.residual_history},
          {"continuation_trace", trace_json(r)}};
}

std::string trace_csv(const std::vector<std::pair<std::string, const SolveReport*>>& runs) {
  std::string s = "run,lambda,converged,max_boundary_gradient,max_gradient_vertex,iterations,final_residual\n";
  for (const auto& [name, r] : runs) {
    for (const ContinuationStep& c : r->continuation_trace) {
      s += fmt::format("{},{},{},{},{},{},{}\n", name, format_real(c.lambda), c.converged ? 1 : 0,
                       format_real(c.max_boundary_gradient), c.max_gradient_vertex, c.iterations,
                       format_real(c.final_residual));
    }
  }
  return s;
}

ScalarField boundary_data(const Scenario& s, const Mesh& mesh) {
  ScalarField g(mesh);
  switch (s.data.kind) {
    case DataKind::Zero:
      break;
    case DataKind::Constant:
      for (const BoundaryVertex& b : mesh.boundary) g[static_cast<std::size_t>(b.vertex)] = s.data.value;
      break;
    case DataKind::Expression: {
      const Expression e = Expression::parse(s.data.source);
      for (const BoundaryVertex& b : mesh.boundary) {
        const Vec2& p = mesh.vertices[static_cast<std::size_t>(b.vertex)];
        g[static_cast<std::size_t>(b.vertex)] = e(p.x(), p.y(), 0.0);
      }
      break;
    }
    case DataKind::Table:
      for (const BoundaryVertex& b : mesh.boundary) g[static_cast<std::size_t>(b.vertex)] = s.data.value;
      for (const auto& [v, value] : s.data.table) {
        if (v < 0 || v >= mesh.num_vertices() || !mesh.is_boundary(v))
          throw ScenarioError(fmt::format("boundary_data.table: vertex {} is not a boundary vertex of the mesh", v));
        g[static_cast<std::size_t>(v)] = value;
      }
      break;
  }
  if (!g.all_finite()) throw ScenarioError("boundary data is not finite on the boundary");
  return g;
}

struct Outcome {
  int status = kExitOk;
  json body = json::object();
};

Outcome run_analyze(const Scenario& s, ArtifactWriter& out) {
  const Mesh mesh = mesh_domain(s.domain, s.mesh_h);
  const SerrinReport rep = classify(s.domain, s.H, mesh, s.classify_tol);
  out.write("margins.csv", margins_csv(rep));
  Outcome o;
  o.body["verdict"] = to_string(rep.verdict);
  o.body["mesh"] = mesh_json(mesh);
  o.body["serrin"] = serrin_json(rep);
  return o;
}

Outcome run_solve(const Scenario& s, ArtifactWriter& out) {
  const Mesh mesh = mesh_domain(s.domain, s.mesh_h);
  const Discretization disc(mesh);
  const ScalarField g = boundary_data(s, mesh);
  const SerrinReport serrin = classify(s.domain, s.H, mesh, s.classify_tol);
  const SolveReport rep = solve_dirichlet(disc, s.H, g, s.solver);
  out.write_field("boundary_data.csv", g);
  out.write("margins.csv", margins_csv(serrin));
  if (rep.solution) {
    out.write_field("solution.csv", *rep.solution);
    out.write_field("residual.csv", q_operator(disc, s.H, *rep.solution));
  }
  Outcome o;
  o.status = rep.converged ? kExitOk : kExitSolveFailed;
  o.body["verdict"] = to_string(serrin.verdict);
  o.body["converged"] = rep.converged;
  o.body["mesh"] = mesh_json(mesh);
  o.body["serrin"] = serrin_json(serrin);
  o.body["solve"] = solve_json(rep);
  return o;
}

json check_json(const SupersolutionCheck& c, const Mesh& mesh) {
  json j = {{"max_q", c.max_q}, {"argmax", c.argmax}, {"checked", c.checked}};
  if (c.argmax >= 0) j["argmax_point"] = vec_json(mesh.vertices[static_cast<std::size_t>(c.argmax)]);
  return j;
}

Outcome run_verify_barriers(const Scenario& s, ArtifactWriter& out) {
  Outcome o;
  const Mesh coarse = mesh_domain(s.domain, s.mesh_h);
  const SerrinReport serrin = classify(s.domain, s.H, coarse, s.classify_tol);
  o.body["verdict"] = to_string(serrin.verdict);
  o.body["serrin"] = serrin_json(serrin);
  out.write("margins.csv", margins_csv(serrin));
  const BarrierSettings& bs = s.barriers;
  const BoundaryPoint y0 = bs.y0.value_or(serrin.argmin.at);
  LemmaConstants lc;
  try {
    lc = compute_constants(s.domain, s.H, y0, bs.k);
  } catch (const BarrierError& e) {
    o.status = kExitInvalidScenario;
    o.body["error"] = fmt::format("barriers need a boundary point of negative margin: {}", e.what());
    return o;
  }
  o.body["constants"] = constants_json(lc);

  MeshOptions mo;
  mo.refinements.push_back({lc.y0_point, lc.a / bs.refine_divisor, 1.5 * lc.a});
  const auto mesh = std::make_shared<const Mesh>(mesh_domain(s.domain, s.mesh_h, mo));
  const Discretization disc(*mesh);
  o.body["mesh"] = mesh_json(*mesh);
  o.body["h_min"] = lc.a / bs.refine_divisor;

  const auto d = distance_to_boundary_field(*mesh, s.domain, lc.window);
  const ScalarField rho = distance_to_point_field(*mesh, lc.y0_point);
  const PhiProfile phi{lc.nu, lc.a, bs.eps_factor * lc.a};
  const PsiProfile psi{lc.c, lc.a, lc.delta};
  const BarrierField v = assemble_v(*mesh, bs.k, bs.k, phi, d, rho);
  const BarrierField w = assemble_w(*mesh, bs.k, psi, rho);
  out.write_field("barrier_v.csv", v.field);
  out.write_field("barrier_w.csv", w.field);

  bool ok = true;
  auto verify = [&](const char* name, const BarrierField& f) {
    json j;
    try {
      const SupersolutionCheck c = verify_supersolution(disc, s.H, f);
      j = check_json(c, *mesh);
      if (!(c.max_q < 0.0)) ok = false;
      o.body[fmt::format("max_Q_{}", name)] = c.max_q;
      ScalarField q(*mesh, std::numeric_limits<double>::quiet_NaN());
      for (int i : mesh->interior) {
        if (f.defined[static_cast<std::size_t>(i)] && disc.stencil_defined(i, f.field.values()))
          q[static_cast<std::size_t>(i)] = q_at(disc, s.H, i, f.field.values());
      }
      out.write_field(fmt::format("q_{}.csv", name), q);
    } catch (const BarrierError& e) {
      ok = false;
      j = {{"error", e.what()}};
    }
    j["defined_vertices"] = f.count();
    return j;
  };
  o.body["v"] = verify("v", v);
  o.body["v"]["eps"] = phi.eps;
  o.body["w"] = verify("w", w);
  o.body["height_bound"] = bound_json(height_bound(lc, psi, bs.k, bs.k));
  o.body["barriers_verified"] = ok;
  o.status = ok ? kExitOk : kExitBarrierFailed;
  return o;
}

json demo_run_json(const DemoRun& r) {
  return {{"label", r.label},
          {"H", r.H.describe()},
          {"spike", vec_json(r.spike)},
          {"margin", r.margin},
          {"initial_gradient", r.initial_gradient},
          {"final_gradient", r.final_gradient},
          {"gradient_distance", r.gradient_distance},
          {"localized", r.localized},
          {"solve", solve_json(r.report)}};
}

Outcome run_demo(const Scenario& s, ArtifactWriter& out) {
  Outcome o;
  DemoReport rep;
  try {
    rep = demo_nonexistence(s.domain, s.H, s.demo);
  } catch (const DemoRefused& e) {
    o.status = kExitInvalidScenario;
    o.body["refused"] = e.what();
    return o;
  }
  o.body["verdict"] = to_string(rep.serrin.verdict);
  o.body["nonexistence_detected"] = rep.nonexistence_detected;
  o.body["control_converged"] = rep.control_converged;
  o.body["serrin"] = serrin_json(rep.serrin);
  o.body["constants"] = constants_json(rep.constants);
  o.body["height_bound"] = bound_json(rep.bound);
  o.body["eps"] = rep.eps;
  o.body["control_kind"] = to_string(rep.control_kind);
  o.body["control_scale"] = rep.control_scale;
  o.body["mesh"] = mesh_json(*rep.mesh);
  o.body["h_min"] = rep.h_min;
  o.body["violating"] = demo_run_json(rep.violating);
  o.body["control"] = demo_run_json(rep.control);
  out.write("margins.csv", margins_csv(rep.serrin));
  out.write("demo_trace.csv", trace_csv({{"violating", &rep.violating.report}, {"control", &rep.control.report}}));
  for (const DemoRun* r : {&rep.violating, &rep.control}) {
    const std::string tag = r == &rep.violating ? "violating" : "control";
    if (r->data) out.write_field(fmt::format("{}_data.csv", tag), *r->data);
    if (r->report.solution) out.write_field(fmt::format("{}_solution.csv", tag), *r->report.solution);
  }
  return o;
}

}  // namespace

int run_experiment(const Scenario& scenario, Experiment experiment, const fs::path& out_dir) {
  ArtifactWriter out(out_dir);
  json report;
  report["scenario"] = header_json(scenario, experiment);
  Outcome o;
  try {
    switch (experiment) {
      case Experiment::Analyze: o = run_analyze(scenario, out); break;
      case Experiment::Solve: o = run_solve(scenario, out); break;
      case Experiment::VerifyBarriers: o = run_verify_barriers(scenario, out); break;
      case Experiment::DemoNonexistence: o = run_demo(scenario, out); break;
    }
  } catch (const ScenarioError& e) {
    o.status = kExitInvalidScenario;
    o.body["error"] = e.what();
  } catch (const std::exception& e) {
    o.status = kExitError;
    o.body["error"] = e.what();
  }
  report["exit_status"] = o.status;
  for (auto it = o.body.begin(); it != o.body.end(); ++it) report[it.key()] = it.value();
  out.write("report.json", dump_json(report));
  out.write_manifest(scenario.sha256);
  if (o.body.contains("error")) spdlog::error("{}: {}", scenario.name, o.body["error"].get<std::string>());
  if (o.body.contains("refused")) spdlog::error("{}: refused: {}", scenario.name, o.body["refused"].get<std::string>());
  spdlog::info("{}: {} finished with status {}", scenario.name, to_string(experiment), o.status);
  return o.status;
}

int run_batch(const std::vector<fs::path>& scenarios, const fs::path& out, const ScenarioOverrides& overrides,
              int jobs, std::vector<BatchItem>* items_out) {
  std::vector<BatchItem> items;
  for (const fs::path& p : scenarios) items.push_back({p, out / p.stem(), 0, {}});
  auto run_one = [&](BatchItem& it) {
    try {
      const Scenario s = load_scenario(it.scenario, overrides);
      it.status = run_experiment(s, s.experiment, it.out);
    } catch (const ScenarioError& e) {
      it.status = kExitInvalidScenario;
      it.error = e.what();
      spdlog::error("{}", e.what());
    } catch (const std::exception& e) {
      it.status = kExitError;
      it.error = e.what();
      spdlog::error("{}", e.what());
    }
  };
  jobs = std::max(1, jobs);
  for (std::size_t begin = 0; begin < items.size(); begin += static_cast<std::size_t>(jobs)) {
    const std::size_t end = std::min(items.size(), begin + static_cast<std::size_t>(jobs));
    std::vector<std::future<void>> running;
    for (std::size_t i = begin; i < end; ++i) running.push_back(std::async(std::launch::async, run_one, std::ref(items[i])));
    for (auto& f : running) f.get();
  }

  ArtifactWriter writer(out);
  json summary = json::array();
  int worst = kExitOk;
  std::string hashes;
  for (const BatchItem& it : items) {
    json j = {{"scenario", it.scenario.string()}, {"out", it.out.filename().string()}, {"status", it.status}};
    if (!it.error.empty()) j["error"] = it.error;
    summary.push_back(j);
    worst = std::max(worst, it.status);
    hashes += it.scenario.string() + "\n";
  }
  writer.write("batch.json", dump_json({{"items", summary}}));
  writer.write_manifest(sha256_hex(hashes));
  if (items_out) *items_out = items;
  return worst;
}

}  // namespace pmc
