#include "delaunay.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

namespace pmc::detail {

double orient2d(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c) {
  return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

Delaunay::Delaunay(const Eigen::Vector2d& lo, const Eigen::Vector2d& hi) {
  const Eigen::Vector2d c = 0.5 * (lo + hi);
  const double m = std::max(1.0, (hi - lo).maxCoeff()) * 50.0;
  pts_ = {c + Eigen::Vector2d(-m, -m), c + Eigen::Vector2d(m, -m), c + Eigen::Vector2d(0.0, m)};
  incident_.resize(3);
  tris_.push_back({{0, 1, 2}, {-1, -1, -1}, true});
  attach(0);
}

void Delaunay::attach(int tri) {
  for (int v : tris_[static_cast<std::size_t>(tri)].v) incident_[static_cast<std::size_t>(v)].push_back(tri);
}

void Delaunay::detach(int tri) {
  for (int v : tris_[static_cast<std::size_t>(tri)].v) {
    auto& list = incident_[static_cast<std::size_t>(v)];
    list.erase(std::remove(list.begin(), list.end(), tri), list.end());
  }
}

bool Delaunay::in_circumcircle(const Triangle& t, const Eigen::Vector2d& p) const {
  using LD = long double;
  const auto& a = pts_[static_cast<std::size_t>(t.v[0])];
  const auto& b = pts_[static_cast<std::size_t>(t.v[1])];
  const auto& c = pts_[static_cast<std::size_t>(t.v[2])];
  const LD adx = LD(a.x()) - p.x(), ady = LD(a.y()) - p.y();
  const LD bdx = LD(b.x()) - p.x(), bdy = LD(b.y()) - p.y();
  const LD cdx = LD(c.x()) - p.x(), cdy = LD(c.y()) - p.y();
  const LD det = (adx * adx + ady * ady) * (bdx * cdy - cdx * bdy) -
                 (bdx * bdx + bdy * bdy) * (adx * cdy - cdx * ady) +
                 (cdx * cdx + cdy * cdy) * (adx * bdy - bdx * ady);
  return det > 0;
}

int Delaunay::locate(const Eigen::Vector2d& p) const {
  int cur = hint_;
  if (cur < 0 || cur >= static_cast<int>(tris_.size()) || !tris_[static_cast<std::size_t>(cur)].alive) {
    cur = -1;
    for (int i = static_cast<int>(tris_.size()) - 1; i >= 0; --i)
      if (tris_[static_cast<std::size_t>(i)].alive) {
        cur = i;
        break;
      }
  }
  const std::size_t max_steps = 4 * tris_.size() + 16;
  for (std::size_t step = 0; step < max_steps; ++step) {
    const Triangle& t = tris_[static_cast<std::size_t>(cur)];
    int next = -1;
    // Rotate the starting edge so the walk cannot cycle on degenerate input.
    for (int k = 0; k < 3; ++k) {
      const int i = static_cast<int>((k + step) % 3);
      const auto& a = pts_[static_cast<std::size_t>(t.v[static_cast<std::size_t>((i + 1) % 3)])];
      const auto& b = pts_[static_cast<std::size_t>(t.v[static_cast<std::size_t>((i + 2) % 3)])];
      if (orient2d(a, b, p) < 0.0) {
        next = t.nb[static_cast<std::size_t>(i)];
        break;
      }
    }
    if (next < 0) return cur;
    cur = next;
  }
  // Fallback: exhaustive search.
  for (std::size_t i = 0; i < tris_.size(); ++i) {
    const Triangle& t = tris_[i];
    if (!t.alive) continue;
    const auto& a = pts_[static_cast<std::size_t>(t.v[0])];
    const auto& b = pts_[static_cast<std::size_t>(t.v[1])];
    const auto& c = pts_[static_cast<std::size_t>(t.v[2])];
    if (orient2d(a, b, p) >= 0 && orient2d(b, c, p) >= 0 && orient2d(c, a, p) >= 0) return static_cast<int>(i);
  }
  throw std::runtime_error("delaunay: point location failed");
}

int Delaunay::insert(const Eigen::Vector2d& p) {
  const int start = locate(p);
  const int id = static_cast<int>(pts_.size());
  pts_.push_back(p);
  incident_.emplace_back();

  std::vector<int> cavity{start};
  std::vector<int> stack{start};
  auto in_cavity = [&cavity](int t) { return std::find(cavity.begin(), cavity.end(), t) != cavity.end(); };
  while (!stack.empty()) {
    const int t = stack.back();
    stack.pop_back();
    for (int n : tris_[static_cast<std::size_t>(t)].nb) {
      if (n < 0 || in_cavity(n)) continue;
      if (in_circumcircle(tris_[static_cast<std::size_t>(n)], p)) {
        cavity.push_back(n);
        stack.push_back(n);
      }
    }
  }

  struct Rim {
    int a, b, outside, old;
  };
  std::vector<Rim> rim;
  for (int t : cavity) {
    const Triangle& tri = tris_[static_cast<std::size_t>(t)];
    for (int i = 0; i < 3; ++i) {
      const int n = tri.nb[static_cast<std::size_t>(i)];
      if (n >= 0 && in_cavity(n)) continue;
      rim.push_back({tri.v[static_cast<std::size_t>((i + 1) % 3)], tri.v[static_cast<std::size_t>((i + 2) % 3)], n, t});
    }
  }
  for (int t : cavity) {
    detach(t);
    tris_[static_cast<std::size_t>(t)].alive = false;
  }

  std::unordered_map<int, int> starts, ends;
  std::vector<int> created;
  created.reserve(rim.size());
  for (const Rim& r : rim) {
    const int nt = static_cast<int>(tris_.size());
    tris_.push_back({{r.a, r.b, id}, {-1, -1, r.outside}, true});
    if (r.outside >= 0) {
      for (int& nb : tris_[static_cast<std::size_t>(r.outside)].nb)
        if (nb == r.old) nb = nt;
    }
    starts[r.a] = nt;
    ends[r.b] = nt;
    created.push_back(nt);
    attach(nt);
  }
  for (int nt : created) {
    Triangle& t = tris_[static_cast<std::size_t>(nt)];
    t.nb[0] = starts.at(t.v[1]);
    t.nb[1] = ends.at(t.v[0]);
  }
  hint_ = created.back();
  return id;
}

int Delaunay::find_edge(int a, int b) const {
  for (int t : incident_[static_cast<std::size_t>(a)]) {
    const auto& v = tris_[static_cast<std::size_t>(t)].v;
    if (v[0] == b || v[1] == b || v[2] == b) return t;
  }
  return -1;
}

}  // namespace pmc::detail
