#include "pmc/scenario.hpp"

#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <openssl/evp.h>
#include <yaml-cpp/yaml.h>

namespace pmc {

std::string_view to_string(Experiment e) {
  switch (e) {
    case Experiment::Analyze: return "analyze";
    case Experiment::Solve: return "solve";
    case Experiment::VerifyBarriers: return "verify-barriers";
    case Experiment::DemoNonexistence: return "demo-nonexistence";
  }
  return "?";
}

Experiment experiment_from_string(std::string_view name) {
  if (name == "analyze") return Experiment::Analyze;
  if (name == "solve") return Experiment::Solve;
  if (name == "verify-barriers") return Experiment::VerifyBarriers;
  if (name == "demo-nonexistence") return Experiment::DemoNonexistence;
  throw ScenarioError(fmt::format("unknown experiment '{}'", name));
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 failed");
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) out += fmt::format("{:02x}", digest[i]);
  return out;
}

namespace {

// Key lookups that reject typos: every block lists the keys it accepts.
class Block {
 public:
  Block(YAML::Node node, std::string path, std::set<std::string> allowed) : node_(node), path_(std::move(path)) {
    if (!node_.IsMap()) throw ScenarioError(fmt::format("'{}' must be a mapping", path_));
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!allowed.count(key)) throw ScenarioError(fmt::format("unknown key '{}.{}'", path_, key));
    }
  }

  bool has(const std::string& key) const { return static_cast<bool>(node_[key]); }
  YAML::Node node(const std::string& key) const { return node_[key]; }
  std::string where(const std::string& key) const { return path_ + "." + key; }

  template <typename T>
  T get(const std::string& key) const {
    if (!has(key)) throw ScenarioError(fmt::format("missing key '{}'", where(key)));
    return as<T>(key);
  }
  template <typename T>
  T get(const std::string& key, T fallback) const {
    return has(key) ? as<T>(key) : fallback;
  }

  Vec2 vec2(const std::string& key, Vec2 fallback = Vec2::Zero()) const {
    if (!has(key)) return fallback;
    const auto v = as<std::vector<double>>(key);
    if (v.size() != 2) throw ScenarioError(fmt::format("'{}' must have two entries", where(key)));
    return {v[0], v[1]};
  }

 private:
  template <typename T>
  T as(const std::string& key) const {
    try {
      return node_[key].template as<T>();
    } catch (const YAML::Exception&) {
      throw ScenarioError(fmt::format("'{}' has the wrong type", where(key)));
    }
  }

  YAML::Node node_;
  std::string path_;
};

ManifoldModel parse_model(const YAML::Node& n) {
  const Block b(n, "model", {"curvature", "dim", "chart"});
  ManifoldModel m;
  m.curvature = b.get<double>("curvature", 0.0);
  m.dim = b.get<int>("dim", 2);
  if (b.has("chart")) {
    m.chart = chart_from_string(b.get<std::string>("chart"));
  } else {
    m.chart = m.curvature < 0.0 ? Chart::PoincareDisk : m.curvature > 0.0 ? Chart::SpherePolar
                                                                           : Chart::EuclideanCartesian;
  }
  m.validate();
  if (m.dim != 2) throw ScenarioError("only n = 2 domains can be meshed");
  return m;
}

DomainSpec parse_domain(const YAML::Node& n, const ManifoldModel& m) {
  const Block b(n, "domain",
                {"primitive", "center", "radius", "intrinsic_radius", "inner_radius", "outer_radius", "a", "b",
                 "angle", "half_width", "half_height", "power", "waist", "a0", "cos", "sin", "placement"});
  const auto prim = b.get<std::string>("primitive");
  const Vec2 c = b.vec2("center");
  DomainSpec spec;
  if (prim == "disc" || prim == "circle") {
    spec = make_disc(m, c, b.get<double>("radius"));
  } else if (prim == "geodesic-disc") {
    spec = make_geodesic_disc(m, b.get<double>("intrinsic_radius"));
  } else if (prim == "annulus") {
    spec = make_annulus(m, c, b.get<double>("inner_radius"), b.get<double>("outer_radius"));
  } else if (prim == "ellipse") {
    spec = make_ellipse(m, c, b.get<double>("a"), b.get<double>("b"), b.get<double>("angle", 0.0));
  } else if (prim == "rounded-rectangle") {
    spec = make_rounded_rectangle(m, c, b.get<double>("half_width"), b.get<double>("half_height"),
                                  b.get<int>("power", 4));
  } else if (prim == "dumbbell") {
    spec = make_dumbbell(m, c, b.get<double>("radius"), b.get<double>("waist"));
  } else if (prim == "fourier") {
    spec = make_fourier_domain(m, c, b.get<double>("a0"), b.get<std::vector<double>>("cos", {}),
                               b.get<std::vector<double>>("sin", {}));
  } else {
    throw ScenarioError(fmt::format("unknown domain primitive '{}'", prim));
  }
  if (b.has("placement")) {
    const Block p(b.node("placement"), "domain.placement", {"angle", "shift"});
    Placement pl;
    pl.angle = p.get<double>("angle", 0.0);
    pl.shift = p.vec2("shift");
    spec = spec.with_placement(pl);
  }
  spec.validate();
  return spec;
}

PrescribedH parse_h(const YAML::Node& n) {
  const Block b(n, "H", {"kind", "value", "source", "z_range", "sign", "z_nondecreasing"});
  const auto kind = b.get<std::string>("kind", "constant");
  if (kind == "constant") {
    const double value = b.get<double>("value");
    PrescribedH H = PrescribedH::constant(value);
    if (b.has("sign")) {
      const HSign declared = hsign_from_string(b.get<std::string>("sign"));
      if ((declared == HSign::Nonnegative && value < 0.0) || (declared == HSign::Nonpositive && value > 0.0))
        throw ScenarioError(fmt::format("H = {} contradicts the declared sign '{}'", value, to_string(declared)));
    }
    return H;
  }
  if (kind != "expression") throw ScenarioError(fmt::format("unknown H kind '{}'", kind));
  const auto range = b.get<std::vector<double>>("z_range");
  if (range.size() != 2) throw ScenarioError("'H.z_range' must have two entries");
  try {
    return PrescribedH::expression(b.get<std::string>("source"), hsign_from_string(b.get<std::string>("sign")),
                                   b.get<bool>("z_nondecreasing"), range[0], range[1]);
  } catch (const ScenarioError&) {
    throw;
  } catch (const std::exception& e) {
    throw ScenarioError(fmt::format("H: {}", e.what()));
  }
}

BoundaryDataSpec parse_data(const YAML::Node& n) {
  const Block b(n, "boundary_data", {"generator", "value", "source", "table"});
  BoundaryDataSpec d;
  const auto gen = b.get<std::string>("generator", "zero");
  if (gen == "zero") {
    d.kind = DataKind::Zero;
  } else if (gen == "constant") {
    d.kind = DataKind::Constant;
    d.value = b.get<double>("value");
  } else if (gen == "expression") {
    d.kind = DataKind::Expression;
    d.source = b.get<std::string>("source");
    try {
      const Expression e = Expression::parse(d.source);
      if (e.depends_on_z()) throw ScenarioError("boundary data expressions may not use z");
    } catch (const ExpressionError& e) {
      throw ScenarioError(fmt::format("boundary_data.source: {}", e.what()));
    }
  } else if (gen == "table") {
    d.kind = DataKind::Table;
    d.value = b.get<double>("value", 0.0);
    for (const auto& row : b.node("table")) {
      if (!row.IsSequence() || row.size() != 2) throw ScenarioError("boundary_data.table rows are [vertex, value]");
      d.table.emplace_back(row[0].as<int>(), row[1].as<double>());
    }
  } else {
    throw ScenarioError(fmt::format("unknown boundary data generator '{}'", gen));
  }
  return d;
}

void parse_solver(const YAML::Node& n, Scenario& s) {
  const Block b(n, "solver",
                {"h", "tol", "classify_tol", "schedule", "continuation", "max_iterations", "armijo_factor",
                 "min_step", "max_consecutive_failures"});
  s.mesh_h = b.get<double>("h", s.mesh_h);
  s.classify_tol = b.get<double>("classify_tol", s.classify_tol);
  for (SolveOptions* o : {&s.solver, &s.demo.solver}) {
    o->tol = b.get<double>("tol", o->tol);
    o->max_iterations = b.get<int>("max_iterations", o->max_iterations);
    o->armijo_factor = b.get<double>("armijo_factor", o->armijo_factor);
    o->min_step = b.get<double>("min_step", o->min_step);
    o->max_consecutive_failures = b.get<int>("max_consecutive_failures", o->max_consecutive_failures);
    if (b.has("schedule")) o->schedule = b.get<std::vector<double>>("schedule");
    if (b.has("continuation")) {
      const auto c = b.get<std::string>("continuation");
      if (c == "boundary-data") {
        o->continuation = ContinuationMode::BoundaryData;
      } else if (c == "h-amplitude") {
        o->continuation = ContinuationMode::HAmplitude;
      } else {
        throw ScenarioError(fmt::format("unknown continuation mode '{}'", c));
      }
    }
  }
  const auto& sch = s.solver.schedule;
  if (sch.empty() || sch.back() != 1.0) throw ScenarioError("solver.schedule must end at 1");
  for (std::size_t i = 0; i < sch.size(); ++i) {
    if (!(sch[i] > 0.0) || (i > 0 && !(sch[i] > sch[i - 1])))
      throw ScenarioError("solver.schedule must be positive and increasing");
  }
  if (!(s.mesh_h > 0.0)) throw ScenarioError("solver.h must be positive");
  if (!(s.solver.tol > 0.0)) throw ScenarioError("solver.tol must be positive");
}

void parse_demo(const YAML::Node& n, DemoOptions& d) {
  const Block b(n, "demo",
                {"refine_divisor", "refine_radius_factor", "safety_factor", "k", "growth_threshold", "control",
                 "control_scale"});
  d.refine_divisor = b.get<double>("refine_divisor", d.refine_divisor);
  d.refine_radius_factor = b.get<double>("refine_radius_factor", d.refine_radius_factor);
  d.safety_factor = b.get<double>("safety_factor", d.safety_factor);
  d.k = b.get<double>("k", d.k);
  d.growth_threshold = b.get<double>("growth_threshold", d.growth_threshold);
  if (b.has("control")) {
    const auto c = b.get<std::string>("control");
    if (c == "scaled-h") {
      d.control = ControlKind::ScaledH;
    } else if (c == "other-boundary") {
      d.control = ControlKind::OtherBoundary;
    } else {
      throw ScenarioError(fmt::format("unknown demo control '{}'", c));
    }
  }
  if (b.has("control_scale")) d.control_scale = b.get<double>("control_scale");
}

void parse_barriers(const YAML::Node& n, BarrierSettings& s) {
  const Block b(n, "barriers", {"y0", "k", "eps_factor", "refine_divisor"});
  if (b.has("y0")) {
    const Block y(b.node("y0"), "barriers.y0", {"component", "t"});
    s.y0 = BoundaryPoint{y.get<int>("component", 0), y.get<double>("t")};
  }
  s.k = b.get<double>("k", s.k);
  s.eps_factor = b.get<double>("eps_factor", s.eps_factor);
  s.refine_divisor = b.get<double>("refine_divisor", s.refine_divisor);
  if (!(s.eps_factor > 0.0 && s.eps_factor < 1.0)) throw ScenarioError("barriers.eps_factor must lie in (0, 1)");
}

void spot_check_h(const Scenario& s) {
  Vec2 lo = Vec2::Constant(std::numeric_limits<double>::infinity());
  Vec2 hi = -lo;
  for (int c = 0; c < s.domain.num_components(); ++c) {
    for (const Vec2& p : s.domain.polyline(c, 256)) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
  }
  if (auto diag = s.H.spot_check(lo, hi, s.seed, 1000))
    throw ScenarioError(fmt::format("H declaration rejected: {}", *diag));
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& origin, const ScenarioOverrides& overrides) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ScenarioError(fmt::format("{}: {}", origin, e.what()));
  }
  try {
    const Block b(root, "scenario",
                  {"name", "experiment", "seed", "model", "domain", "H", "boundary_data", "solver", "demo",
                   "barriers"});
    Scenario s;
    s.source_text = text;
    s.sha256 = sha256_hex(text);
    s.name = b.get<std::string>("name");
    s.experiment = experiment_from_string(b.get<std::string>("experiment"));
    s.seed = b.get<std::uint64_t>("seed", 1);
    s.model = parse_model(b.get<YAML::Node>("model"));
    s.domain = parse_domain(b.get<YAML::Node>("domain"), s.model);
    s.H = parse_h(b.get<YAML::Node>("H"));
    if (b.has("boundary_data")) s.data = parse_data(b.node("boundary_data"));
    if (b.has("solver")) parse_solver(b.node("solver"), s);
    if (b.has("demo")) parse_demo(b.node("demo"), s.demo);
    s.overrides = overrides;
    if (overrides.mesh_h) {
      if (!(*overrides.mesh_h > 0.0)) throw ScenarioError("--mesh-h must be positive");
      s.mesh_h = *overrides.mesh_h;
    }
    if (overrides.tol) {
      if (!(*overrides.tol > 0.0)) throw ScenarioError("--tol must be positive");
      s.solver.tol = s.demo.solver.tol = *overrides.tol;
    }
    if (overrides.seed) s.seed = *overrides.seed;
    s.demo.mesh_h = s.mesh_h;
    if (b.has("barriers")) parse_barriers(b.node("barriers"), s.barriers);
    spot_check_h(s);
    return s;
  } catch (const ScenarioError& e) {
    throw ScenarioError(fmt::format("{}: {}", origin, e.what()));
  } catch (const std::exception& e) {
    throw ScenarioError(fmt::format("{}: {}", origin, e.what()));
  }
}

Scenario load_scenario(const std::filesystem::path& path, const ScenarioOverrides& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError(fmt::format("cannot read scenario '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), path.string(), overrides);
}

}  // namespace pmc
