#include "pmc/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <memory>
#include <optional>
#include <numbers>
#include <unordered_set>

#include <fmt/format.h>

#include "delaunay.hpp"

namespace pmc {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kMinTable = 8192;
constexpr double kGrading = 0.25;
constexpr int kMinBoundaryVertices = 16;
constexpr double kLatticeClearance = 0.55;  // in units of h

std::uint64_t edge_key(int a, int b) {
  const auto lo = static_cast<std::uint64_t>(std::min(a, b));
  const auto hi = static_cast<std::uint64_t>(std::max(a, b));
  return (hi << 32) | lo;
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  const double s = len2 > 0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (p - (a + s * ab)).norm();
}

// Tabulated arc length and sizing-weighted arc length of one component.
struct CurveTable {
  std::vector<double> t, s, phi;
};

struct Segment {
  int a, b;
  int component;
  double ta, tb;  // tb > ta, unwrapped
};

class Mesher {
 public:
  Mesher(const DomainSpec& spec, double h, const MeshOptions& opt) : spec_(spec), h_(h), opt_(opt) {
    double length = 0.0;
    for (int c = 0; c < spec_.num_components(); ++c) length = std::max(length, spec_.chart_length(c));
    const Placement& pl = spec_.placement();
    for (const auto& r : opt_.refinements) {
      if (!(r.h_min > 0.0 && r.h_min <= h_)) throw MeshError("refinement h_min must lie in (0, h]");
      if (!(r.radius >= 0.0)) throw MeshError("refinement radius must be nonnegative");
      refine_centers_.push_back(pl.rotation().transpose() * (r.center - pl.shift));
      table_ = std::max(table_, static_cast<int>(std::ceil(16.0 * length / r.h_min)));
    }
  }

  Mesh run();

 private:
  double size_at(const Vec2& p) const {
    double size = h_;
    for (std::size_t i = 0; i < refine_centers_.size(); ++i) {
      const auto& r = opt_.refinements[i];
      const double beyond = std::max(0.0, (p - refine_centers_[i]).norm() - r.radius);
      size = std::min(size, r.h_min + kGrading * beyond);
    }
    return size;
  }
  void build_tables();
  void sample_boundary();
  void insert_lattice();
  bool recover_segments();
  void split_segment(std::size_t index);
  std::vector<char> classify() const;
  bool refine_pass(const std::vector<char>& inside);
  double arclength_at(int component, double t) const;
  int insert_boundary_point(int component, double t);

  const DomainSpec& spec_;
  double h_;
  MeshOptions opt_;
  std::vector<Vec2> refine_centers_;
  int table_ = kMinTable;

  std::vector<CurveTable> tables_;
  std::vector<Segment> segments_;
  std::unique_ptr<detail::Delaunay> dt_;
  struct BInfo {
    int component;
    double t;
  };
  std::vector<std::optional<BInfo>> binfo_;  // per Delaunay vertex
  std::vector<std::vector<Vec2>> initial_points_;
  std::vector<std::vector<double>> initial_params_;
};

void Mesher::build_tables() {
  for (int c = 0; c < spec_.num_components(); ++c) {
    CurveTable tab;
    tab.t.resize(static_cast<std::size_t>(table_) + 1);
    tab.s.resize(static_cast<std::size_t>(table_) + 1);
    tab.phi.resize(static_cast<std::size_t>(table_) + 1);
    double prev_speed = 0.0, prev_density = 0.0;
    for (int i = 0; i <= table_; ++i) {
      const double t = kTwoPi * i / table_;
      const CurvePoint cp = spec_.eval_local(c, t);
      const double speed = cp.d1.norm();
      const double density = speed / size_at(cp.p);
      tab.t[static_cast<std::size_t>(i)] = t;
      if (i == 0) {
        tab.s[0] = 0.0;
        tab.phi[0] = 0.0;
      } else {
        const double dt = kTwoPi / table_;
        tab.s[static_cast<std::size_t>(i)] = tab.s[static_cast<std::size_t>(i - 1)] + 0.5 * dt * (speed + prev_speed);
        tab.phi[static_cast<std::size_t>(i)] =
            tab.phi[static_cast<std::size_t>(i - 1)] + 0.5 * dt * (density + prev_density);
      }
      prev_speed = speed;
      prev_density = density;
    }
    tables_.push_back(std::move(tab));
  }
}

double Mesher::arclength_at(int component, double t) const {
  const CurveTable& tab = tables_[static_cast<std::size_t>(component)];
  double tt = std::fmod(t, kTwoPi);
  if (tt < 0) tt += kTwoPi;
  const double x = tt / kTwoPi * table_;
  const auto i = std::min<std::size_t>(static_cast<std::size_t>(x), static_cast<std::size_t>(table_ - 1));
  const double w = x - static_cast<double>(i);
  return (1.0 - w) * tab.s[i] + w * tab.s[i + 1];
}

void Mesher::sample_boundary() {
  for (int c = 0; c < spec_.num_components(); ++c) {
    const CurveTable& tab = tables_[static_cast<std::size_t>(c)];
    const double total = tab.phi.back();
    const int n = static_cast<int>(std::lround(total));
    if (n < kMinBoundaryVertices) {
      throw MeshError(fmt::format("h = {} is too coarse: boundary component {} would receive {} < {} vertices", h_,
                                  c, n, kMinBoundaryVertices));
    }
    std::vector<Vec2> pts;
    std::vector<double> params;
    std::size_t j = 0;
    for (int k = 0; k < n; ++k) {
      const double target = total * k / n;
      while (j + 1 < tab.phi.size() && tab.phi[j + 1] < target) ++j;
      const double span = tab.phi[j + 1] - tab.phi[j];
      const double w = span > 0 ? (target - tab.phi[j]) / span : 0.0;
      const double t = (k == 0) ? 0.0 : tab.t[j] + w * (tab.t[j + 1] - tab.t[j]);
      params.push_back(t);
      pts.push_back(spec_.eval_local(c, t).p);
    }
    initial_points_.push_back(std::move(pts));
    initial_params_.push_back(std::move(params));
  }
}

int Mesher::insert_boundary_point(int component, double t) {
  const int id = dt_->insert(spec_.eval_local(component, t).p);
  binfo_.resize(static_cast<std::size_t>(id + 1));
  binfo_[static_cast<std::size_t>(id)] = BInfo{component, t};
  return id;
}

void Mesher::insert_lattice() {
  // Segment buckets for the clearance test.
  Vec2 lo = initial_points_[0][0], hi = lo;
  for (const auto& poly : initial_points_)
    for (const auto& p : poly) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
  const double cell = h_;
  const int nx = static_cast<int>(std::ceil((hi.x() - lo.x()) / cell)) + 3;
  const int ny = static_cast<int>(std::ceil((hi.y() - lo.y()) / cell)) + 3;
  std::vector<std::vector<std::pair<Vec2, Vec2>>> buckets(static_cast<std::size_t>(nx * ny));
  auto cell_of = [&](double x, double y) {
    const int i = std::clamp(static_cast<int>(std::floor((x - lo.x()) / cell)) + 1, 0, nx - 1);
    const int j = std::clamp(static_cast<int>(std::floor((y - lo.y()) / cell)) + 1, 0, ny - 1);
    return std::pair{i, j};
  };
  const double reach = kLatticeClearance * h_;
  for (const auto& poly : initial_points_) {
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const Vec2& a = poly[i];
      const Vec2& b = poly[(i + 1) % poly.size()];
      const auto [i0, j0] = cell_of(std::min(a.x(), b.x()) - reach, std::min(a.y(), b.y()) - reach);
      const auto [i1, j1] = cell_of(std::max(a.x(), b.x()) + reach, std::max(a.y(), b.y()) + reach);
      for (int ii = i0; ii <= i1; ++ii)
        for (int jj = j0; jj <= j1; ++jj) buckets[static_cast<std::size_t>(jj * nx + ii)].emplace_back(a, b);
    }
  }
  auto inside_polygon = [&](const Vec2& p) {
    bool inside = false;
    for (const auto& poly : initial_points_) {
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
  };

  auto add_lattice = [&](double spacing, const Vec2& anchor, double clearance, auto&& accept) {
    const double dy = spacing * std::sqrt(3.0) / 2.0;
    const int j_lo = static_cast<int>(std::floor((lo.y() - anchor.y()) / dy)) - 1;
    const int j_hi = static_cast<int>(std::ceil((hi.y() - anchor.y()) / dy)) + 1;
    const int i_lo = static_cast<int>(std::floor((lo.x() - anchor.x()) / spacing)) - 2;
    const int i_hi = static_cast<int>(std::ceil((hi.x() - anchor.x()) / spacing)) + 2;
    for (int j = j_lo; j <= j_hi; ++j) {
      const double shift = (j % 2 != 0) ? 0.5 * spacing : 0.0;
      for (int i = i_lo; i <= i_hi; ++i) {
        const Vec2 p = anchor + Vec2(i * spacing + shift, j * dy);
        if (!accept(p)) continue;
        const auto [ci, cj] = cell_of(p.x(), p.y());
        bool clear = true;
        for (const auto& [a, b] : buckets[static_cast<std::size_t>(cj * nx + ci)]) {
          if (point_segment_distance(p, a, b) < clearance) {
            clear = false;
            break;
          }
        }
        if (!clear || !inside_polygon(p)) continue;
        dt_->insert(p);
      }
    }
  };

  // Lattice anchored at the local origin so symmetric domains get symmetric meshes.
  add_lattice(h_, Vec2::Zero(), reach, [&](const Vec2& p) { return size_at(p) >= 0.999 * h_; });
  for (std::size_t i = 0; i < refine_centers_.size(); ++i) {
    // Fine lattice over each uniformly refined disc, anchored at its centre;
    // earlier discs keep their own lattice where two overlap.
    const auto& r = opt_.refinements[i];
    if (r.h_min >= 0.999 * h_) continue;
    add_lattice(r.h_min, refine_centers_[i], kLatticeClearance * r.h_min, [&](const Vec2& p) {
      if ((p - refine_centers_[i]).norm() > r.radius) return false;
      for (std::size_t j = 0; j < i; ++j)
        if ((p - refine_centers_[j]).norm() <= opt_.refinements[j].radius + r.h_min) return false;
      return true;
    });
  }
}

void Mesher::split_segment(std::size_t index) {
  const Segment s = segments_[index];
  const double tm = 0.5 * (s.ta + s.tb);
  const int m = insert_boundary_point(s.component, tm);
  segments_[index] = {s.a, m, s.component, s.ta, tm};
  segments_.push_back({m, s.b, s.component, tm, s.tb});
}

bool Mesher::recover_segments() {
  bool changed = false;
  for (int pass = 0; pass < 64; ++pass) {
    bool any = false;
    const std::size_t count = segments_.size();
    for (std::size_t i = 0; i < count; ++i) {
      const Segment& s = segments_[i];
      bool split = dt_->find_edge(s.a, s.b) < 0;
      if (!split) {
        // Diametral-circle encroachment by an apex of either adjacent triangle.
        const auto& pts = dt_->points();
        const Vec2& pa = pts[static_cast<std::size_t>(s.a)];
        const Vec2& pb = pts[static_cast<std::size_t>(s.b)];
        const Vec2 mid = 0.5 * (pa + pb);
        const double r2 = 0.25 * (pa - pb).squaredNorm();
        for (int t : dt_->incident(s.a)) {
          const auto& v = dt_->triangles()[static_cast<std::size_t>(t)].v;
          if (std::find(v.begin(), v.end(), s.b) == v.end()) continue;
          for (int w : v) {
            if (w == s.a || w == s.b || dt_->is_super(w)) continue;
            if ((pts[static_cast<std::size_t>(w)] - mid).squaredNorm() < r2 * (1.0 - 1e-9)) split = true;
          }
        }
      }
      if (split) {
        split_segment(i);
        any = true;
      }
    }
    if (!any) return changed;
    changed = true;
  }
  throw MeshError("boundary recovery did not converge");
}

std::vector<char> Mesher::classify() const {
  const auto& tris = dt_->triangles();
  std::unordered_set<std::uint64_t> constrained;
  for (const auto& s : segments_) constrained.insert(edge_key(s.a, s.b));
  std::vector<char> inside(tris.size(), 0);
  std::deque<int> queue;
  for (const auto& s : segments_) {
    for (int t : dt_->incident(s.a)) {
      const auto& v = tris[static_cast<std::size_t>(t)].v;
      for (int k = 0; k < 3; ++k) {
        if (v[static_cast<std::size_t>(k)] == s.a && v[static_cast<std::size_t>((k + 1) % 3)] == s.b &&
            !inside[static_cast<std::size_t>(t)]) {
          inside[static_cast<std::size_t>(t)] = 1;
          queue.push_back(t);
        }
      }
    }
  }
  while (!queue.empty()) {
    const int t = queue.front();
    queue.pop_front();
    const auto& tri = tris[static_cast<std::size_t>(t)];
    for (int k = 0; k < 3; ++k) {
      const int n = tri.nb[static_cast<std::size_t>(k)];
      if (n < 0 || inside[static_cast<std::size_t>(n)]) continue;
      const int a = tri.v[static_cast<std::size_t>((k + 1) % 3)];
      const int b = tri.v[static_cast<std::size_t>((k + 2) % 3)];
      if (constrained.count(edge_key(a, b))) continue;
      inside[static_cast<std::size_t>(n)] = 1;
      queue.push_back(n);
    }
  }
  for (std::size_t t = 0; t < tris.size(); ++t) {
    if (!inside[t] || !tris[t].alive) continue;
    for (int v : tris[t].v)
      if (dt_->is_super(v)) throw MeshError("domain flood fill leaked outside the boundary");
  }
  return inside;
}

namespace {

double min_angle(const Vec2& a, const Vec2& b, const Vec2& c) {
  auto angle = [](const Vec2& p, const Vec2& q, const Vec2& r) {
    const Vec2 u = q - p, v = r - p;
    return std::atan2(std::abs(u.x() * v.y() - u.y() * v.x()), u.dot(v));
  };
  return std::min({angle(a, b, c), angle(b, c, a), angle(c, a, b)});
}

Vec2 circumcenter(const Vec2& a, const Vec2& b, const Vec2& c) {
  const Vec2 ab = b - a, ac = c - a;
  const double d = 2.0 * (ab.x() * ac.y() - ab.y() * ac.x());
  const double ab2 = ab.squaredNorm(), ac2 = ac.squaredNorm();
  return a + Vec2(ac.y() * ab2 - ab.y() * ac2, ab.x() * ac2 - ac.x() * ab2) / d;
}

}  // namespace

bool Mesher::refine_pass(const std::vector<char>& inside) {
  const double min_rad = opt_.min_angle_deg * std::numbers::pi / 180.0;
  const auto& pts = dt_->points();
  std::vector<int> bad;
  for (std::size_t t = 0; t < dt_->triangles().size(); ++t) {
    const auto& tri = dt_->triangles()[t];
    if (!tri.alive || !inside[t]) continue;
    const Vec2& a = pts[static_cast<std::size_t>(tri.v[0])];
    const Vec2& b = pts[static_cast<std::size_t>(tri.v[1])];
    const Vec2& c = pts[static_cast<std::size_t>(tri.v[2])];
    const Vec2 cc = circumcenter(a, b, c);
    const double radius = (cc - a).norm();
    if (min_angle(a, b, c) < min_rad || radius > 0.9 * size_at((a + b + c) / 3.0)) bad.push_back(static_cast<int>(t));
  }
  if (bad.empty()) return false;
  for (int t : bad) {
    const auto& tri = dt_->triangles()[static_cast<std::size_t>(t)];
    if (!tri.alive) continue;
    const Vec2 a = pts[static_cast<std::size_t>(tri.v[0])];
    const Vec2 b = pts[static_cast<std::size_t>(tri.v[1])];
    const Vec2 c = pts[static_cast<std::size_t>(tri.v[2])];
    const Vec2 cc = circumcenter(a, b, c);
    std::vector<std::size_t> encroached;
    for (std::size_t i = 0; i < segments_.size(); ++i) {
      const Vec2& pa = pts[static_cast<std::size_t>(segments_[i].a)];
      const Vec2& pb = pts[static_cast<std::size_t>(segments_[i].b)];
      if ((cc - 0.5 * (pa + pb)).squaredNorm() <= 0.25 * (pa - pb).squaredNorm()) encroached.push_back(i);
    }
    if (!encroached.empty()) {
      for (std::size_t i : encroached) split_segment(i);
      continue;
    }
    dt_->insert(cc);
  }
  return true;
}

Mesh Mesher::run() {
  build_tables();
  sample_boundary();

  Vec2 lo = initial_points_[0][0], hi = lo;
  for (const auto& poly : initial_points_)
    for (const auto& p : poly) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
  dt_ = std::make_unique<detail::Delaunay>(lo, hi);
  binfo_.resize(3);
  for (int c = 0; c < spec_.num_components(); ++c) {
    const auto& params = initial_params_[static_cast<std::size_t>(c)];
    std::vector<int> ids;
    for (double t : params) ids.push_back(insert_boundary_point(c, t));
    for (std::size_t k = 0; k < ids.size(); ++k) {
      const double ta = params[k];
      const double tb = (k + 1 < ids.size()) ? params[k + 1] : kTwoPi;
      segments_.push_back({ids[k], ids[(k + 1) % ids.size()], c, ta, tb});
    }
  }
  insert_lattice();

  const std::size_t max_passes = 100000;
  for (std::size_t pass = 0; pass < max_passes; ++pass) {
    recover_segments();
    const auto inside = classify();
    if (!refine_pass(inside)) break;
    if (pass + 1 == max_passes) throw MeshError("quality refinement did not terminate");
  }
  recover_segments();
  const auto inside = classify();

  // Compact to the triangles inside the domain.
  const auto& tris = dt_->triangles();
  const auto& pts = dt_->points();
  binfo_.resize(pts.size());
  std::vector<int> remap(pts.size(), -1);
  Mesh mesh;
  mesh.model = spec_.model();
  mesh.h = h_;
  const Placement& pl = spec_.placement();
  auto map_vertex = [&](int v) {
    if (remap[static_cast<std::size_t>(v)] < 0) {
      remap[static_cast<std::size_t>(v)] = mesh.num_vertices();
      const auto& bi = binfo_[static_cast<std::size_t>(v)];
      mesh.vertices.push_back(bi ? spec_.eval(bi->component, bi->t).p : pl.apply(pts[static_cast<std::size_t>(v)]));
    }
    return remap[static_cast<std::size_t>(v)];
  };
  // Boundary vertices first, in curve order.
  std::vector<std::pair<std::pair<int, double>, int>> bverts;
  for (std::size_t v = 3; v < pts.size(); ++v) {
    const auto& bi = binfo_[v];
    if (bi) {
      double t = std::fmod(bi->t, kTwoPi);
      if (t < 0) t += kTwoPi;
      bverts.push_back({{bi->component, t}, static_cast<int>(v)});
    }
  }
  std::sort(bverts.begin(), bverts.end());
  for (const auto& [key, v] : bverts) {
    const int id = map_vertex(v);
    mesh.boundary.push_back({id, key.first, key.second, arclength_at(key.first, key.second)});
  }
  for (std::size_t t = 0; t < tris.size(); ++t) {
    if (!tris[t].alive || !inside[t]) continue;
    mesh.cells.push_back({map_vertex(tris[t].v[0]), map_vertex(tris[t].v[1]), map_vertex(tris[t].v[2])});
  }
  std::vector<char> is_b(static_cast<std::size_t>(mesh.num_vertices()), 0);
  for (const auto& b : mesh.boundary) is_b[static_cast<std::size_t>(b.vertex)] = 1;
  for (int v = 0; v < mesh.num_vertices(); ++v)
    if (!is_b[static_cast<std::size_t>(v)]) mesh.interior.push_back(v);
  mesh.finalize();
  return mesh;
}

}  // namespace

void Mesh::finalize() {
  boundary_slot_.assign(vertices.size(), -1);
  for (std::size_t i = 0; i < boundary.size(); ++i) boundary_slot_[static_cast<std::size_t>(boundary[i].vertex)] = static_cast<int>(i);
  neighbors_.assign(vertices.size(), {});
  for (const auto& c : cells) {
    for (int k = 0; k < 3; ++k) {
      const int a = c[static_cast<std::size_t>(k)];
      const int b = c[static_cast<std::size_t>((k + 1) % 3)];
      neighbors_[static_cast<std::size_t>(a)].push_back(b);
      neighbors_[static_cast<std::size_t>(b)].push_back(a);
    }
  }
  for (auto& n : neighbors_) {
    std::sort(n.begin(), n.end());
    n.erase(std::unique(n.begin(), n.end()), n.end());
  }
}

std::vector<int> Mesh::ring(int v, int depth) const {
  std::vector<int> out;
  std::vector<int> frontier{v};
  std::unordered_set<int> seen{v};
  for (int d = 0; d < depth; ++d) {
    std::vector<int> next;
    for (int u : frontier)
      for (int w : neighbors(u))
        if (seen.insert(w).second) {
          next.push_back(w);
          out.push_back(w);
        }
    frontier = std::move(next);
  }
  return out;
}

int Mesh::num_edges() const {
  std::size_t twice = 0;
  for (const auto& n : neighbors_) twice += n.size();
  return static_cast<int>(twice / 2);
}

double Mesh::min_angle_deg() const {
  double best = 180.0;
  for (const auto& c : cells) {
    best = std::min(best, min_angle(vertices[static_cast<std::size_t>(c[0])], vertices[static_cast<std::size_t>(c[1])],
                                    vertices[static_cast<std::size_t>(c[2])]) *
                              180.0 / std::numbers::pi);
  }
  return best;
}

int Mesh::nearest_boundary_vertex(int component, double t) const {
  int best = -1;
  double best_gap = std::numeric_limits<double>::infinity();
  for (const auto& b : boundary) {
    if (b.component != component) continue;
    double gap = std::abs(std::remainder(b.t - t, kTwoPi));
    if (gap < best_gap) {
      best_gap = gap;
      best = b.vertex;
    }
  }
  return best;
}

Mesh mesh_domain(const DomainSpec& spec, double h, const MeshOptions& options) {
  if (!(h > 0.0)) throw MeshError("mesh size h must be positive");
  return Mesher(spec, h, options).run();
}

}  // namespace pmc
