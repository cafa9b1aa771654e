#pragma once

#include <array>
#include <optional>
#include <vector>

#include "pmc/domain.hpp"

namespace pmc {

struct BoundaryVertex {
  int vertex = -1;
  int component = 0;
  double t = 0.0;          ///< curve parameter
  double arclength = 0.0;  ///< chart arc length from t = 0
};

/// Local grading: target edge length h_min within `radius` of `center`,
/// growing with slope 0.25 beyond it up to the global h.
struct MeshRefinement {
  Vec2 center = Vec2::Zero();
  double h_min = 0.0;
  double radius = 0.0;
};

struct MeshOptions {
  /// Graded discs; the local size is the minimum over all of them.
  std::vector<MeshRefinement> refinements;
  double min_angle_deg = 20.7;
};

class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Mesh {
 public:
  ManifoldModel model;
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> cells;
  std::vector<BoundaryVertex> boundary;  ///< ordered by component, then parameter
  std::vector<int> interior;
  double h = 0.0;

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  bool is_boundary(int v) const { return boundary_slot_[static_cast<std::size_t>(v)] >= 0; }
  /// Index into `boundary` for a boundary vertex, -1 otherwise.
  int boundary_slot(int v) const { return boundary_slot_[static_cast<std::size_t>(v)]; }
  const std::vector<int>& neighbors(int v) const { return neighbors_[static_cast<std::size_t>(v)]; }

  /// Vertices within `depth` edges of v, excluding v, in breadth-first order.
  std::vector<int> ring(int v, int depth) const;

  int num_edges() const;
  double min_angle_deg() const;
  int euler_characteristic() const { return num_vertices() - num_edges() + static_cast<int>(cells.size()); }

  /// Boundary vertex of `component` whose parameter is closest to t.
  int nearest_boundary_vertex(int component, double t) const;

  /// Rebuilds adjacency and slot tables; call after editing the public arrays.
  void finalize();

 private:
  std::vector<int> boundary_slot_;
  std::vector<std::vector<int>> neighbors_;
};

/// Conforming Delaunay triangulation of the chart domain: boundary vertices
/// equally spaced in chart arc length, an equilateral lattice of spacing h in
/// the interior, and Ruppert refinement for the remaining poor triangles.
Mesh mesh_domain(const DomainSpec& spec, double h, const MeshOptions& options = {});

}  // namespace pmc
