#pragma once

// Incremental Bowyer-Watson Delaunay triangulation with triangle adjacency.
// Internal to the mesher.

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace pmc::detail {

class Delaunay {
 public:
  struct Triangle {
    std::array<int, 3> v;   // counter-clockwise
    std::array<int, 3> nb;  // nb[i] is across the edge opposite v[i]; -1 on the hull
    bool alive = true;
  };

  /// Creates a super-triangle enclosing the box [lo, hi].
  Delaunay(const Eigen::Vector2d& lo, const Eigen::Vector2d& hi);

  /// Inserts a point and returns its vertex id.
  int insert(const Eigen::Vector2d& p);

  const std::vector<Eigen::Vector2d>& points() const { return pts_; }
  const std::vector<Triangle>& triangles() const { return tris_; }
  bool is_super(int v) const { return v < 3; }

  /// Index of a live triangle having the directed or undirected edge (a, b), or -1.
  int find_edge(int a, int b) const;

  /// Live triangles incident to vertex v.
  const std::vector<int>& incident(int v) const { return incident_[static_cast<std::size_t>(v)]; }

 private:
  int locate(const Eigen::Vector2d& p) const;
  bool in_circumcircle(const Triangle& t, const Eigen::Vector2d& p) const;
  void attach(int tri);
  void detach(int tri);

  std::vector<Eigen::Vector2d> pts_;
  std::vector<Triangle> tris_;
  std::vector<std::vector<int>> incident_;
  int hint_ = 0;
};

double orient2d(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c);

}  // namespace pmc::detail
