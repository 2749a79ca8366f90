#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

namespace quadrec {

using Vec3 = Eigen::Vector3d;

/// Input point set. Coordinates are model-space and unitless. `noise_flag`
/// is either empty or one flag per point (true marks a synthetic noise
/// point that does not lie on the reference surface).
struct PointCloud {
  std::vector<Vec3> points;
  std::vector<bool> noise_flag;  // empty or points.size() entries

  int size() const { return static_cast<int>(points.size()); }
  bool is_noise(int i) const {
    return !noise_flag.empty() && noise_flag[static_cast<std::size_t>(i)];
  }
};

/// Quad-only mesh. Each face is a cyclic CCW quadrilateral over vertex
/// indices. Immutable by convention: operations build new meshes.
struct QuadMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 4>> faces;

  int vertex_count() const { return static_cast<int>(vertices.size()); }
  int face_count() const { return static_cast<int>(faces.size()); }

  std::array<Vec3, 4> face_points(int f) const {
    const auto& q = faces[static_cast<std::size_t>(f)];
    return {vertices[static_cast<std::size_t>(q[0])],
            vertices[static_cast<std::size_t>(q[1])],
            vertices[static_cast<std::size_t>(q[2])],
            vertices[static_cast<std::size_t>(q[3])]};
  }
};

/// Undirected edge key: vertex indices sorted ascending.
using EdgeKey = std::pair<int, int>;

inline EdgeKey make_edge_key(int a, int b) {
  return a < b ? EdgeKey{a, b} : EdgeKey{b, a};
}

/// Edge-incidence summary of a quad mesh. `incidence` maps each undirected
/// edge to the number of faces containing it. e1/e2 count edges of
/// incidence exactly 1 and exactly 2; e_all counts distinct edges.
struct EdgeStats {
  std::map<EdgeKey, int> incidence;
  std::int64_t e1 = 0;
  std::int64_t e2 = 0;
  std::int64_t e_all = 0;
};

/// Counts each undirected edge (v_i, v_{i+1 mod 4}) of every face once per
/// containing face. Throws std::invalid_argument naming the face index if a
/// face repeats a vertex.
EdgeStats edge_stats(const QuadMesh& mesh);

/// Fraction of edges with incidence in {1,2} and fraction with incidence
/// exactly 2. An empty mesh (no edges) scores (1, 1) and emits a warning so
/// that batch metric reports never abort on pathological outputs.
struct MeshTopologyScores {
  double manifoldness = 1.0;
  double watertightness = 1.0;
};
MeshTopologyScores manifold_watertight_scores(const EdgeStats& stats);

/// Unit normal at one corner of a quadrilateral: normalized cross product
/// of the incoming edge (p_{i-1} -> p_i) and the outgoing edge
/// (p_i -> p_{i+1}). Throws std::domain_error if the adjacent edges are
/// collinear or one of them has zero length.
Vec3 corner_normal(const std::array<Vec3, 4>& face_points, int corner);

/// Validates the QuadMesh invariants: 4 distinct in-range indices per face
/// and no duplicate unordered vertex sets. Throws std::invalid_argument.
void validate_mesh(const QuadMesh& mesh);

}  // namespace quadrec
