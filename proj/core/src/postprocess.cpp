#include "quadrec/postprocess.hpp"

#include "quadrec/face_features.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <queue>
#include <set>
#include <stdexcept>
#include <tuple>
#include <vector>

namespace quadrec {

int face_score(int boundary_edges, int nonmanifold_edges) {
  return (boundary_edges + 1) * (10 * nonmanifold_edges + 1);
}

namespace {

struct FaceDegrees {
  int boundary = 0;
  int nonmanifold = 0;
  int score() const { return face_score(boundary, nonmanifold); }
};

FaceDegrees face_degrees(const QuadMesh& mesh, int f,
                         const std::map<EdgeKey, int>& incidence) {
  FaceDegrees d;
  const auto& q = mesh.faces[static_cast<std::size_t>(f)];
  for (int i = 0; i < 4; ++i) {
    const int count = incidence.at(make_edge_key(q[i], q[(i + 1) % 4]));
    if (count == 1) ++d.boundary;
    if (count >= 3) ++d.nonmanifold;
  }
  return d;
}

}  // namespace

QuadMesh prune_nonmanifold(const QuadMesh& mesh) {
  EdgeStats stats = edge_stats(mesh);
  std::map<EdgeKey, int> incidence = std::move(stats.incidence);

  std::map<EdgeKey, std::vector<int>> edge_faces;
  for (int f = 0; f < mesh.face_count(); ++f) {
    const auto& q = mesh.faces[static_cast<std::size_t>(f)];
    for (int i = 0; i < 4; ++i) {
      edge_faces[make_edge_key(q[i], q[(i + 1) % 4])].push_back(f);
    }
  }

  std::vector<char> alive(static_cast<std::size_t>(mesh.face_count()), 1);
  std::vector<FaceDegrees> degrees(static_cast<std::size_t>(mesh.face_count()));

  // Deletion targets only faces touching a non-manifold edge. Boundary-rich
  // but manifold faces (an open sheet's corners score 3) stay: removing
  // them would erode open boundaries instead of repairing overlaps.
  // Max-heap ordered by (score, non-manifold count, smaller index last so
  // it pops first). Entries go stale when a face's degrees change; they are
  // discarded on pop by comparing against the current degrees.
  using Entry = std::tuple<int, int, int>;  // score, E_n, -face index
  std::priority_queue<Entry> heap;
  for (int f = 0; f < mesh.face_count(); ++f) {
    degrees[static_cast<std::size_t>(f)] = face_degrees(mesh, f, incidence);
    const FaceDegrees& d = degrees[static_cast<std::size_t>(f)];
    if (d.nonmanifold > 0) heap.emplace(d.score(), d.nonmanifold, -f);
  }

  while (!heap.empty()) {
    const auto [score, en, neg_f] = heap.top();
    heap.pop();
    const int f = -neg_f;
    if (!alive[static_cast<std::size_t>(f)]) continue;
    const FaceDegrees& current = degrees[static_cast<std::size_t>(f)];
    if (current.score() != score || current.nonmanifold != en) continue;
    if (current.nonmanifold == 0) continue;

    alive[static_cast<std::size_t>(f)] = 0;
    const auto& q = mesh.faces[static_cast<std::size_t>(f)];
    for (int i = 0; i < 4; ++i) {
      const EdgeKey key = make_edge_key(q[i], q[(i + 1) % 4]);
      --incidence[key];
      for (int g : edge_faces[key]) {
        if (!alive[static_cast<std::size_t>(g)]) continue;
        const FaceDegrees updated = face_degrees(mesh, g, incidence);
        FaceDegrees& stored = degrees[static_cast<std::size_t>(g)];
        if (updated.boundary != stored.boundary ||
            updated.nonmanifold != stored.nonmanifold) {
          stored = updated;
          if (stored.nonmanifold > 0) {
            heap.emplace(stored.score(), stored.nonmanifold, -g);
          }
        }
      }
    }
  }

  QuadMesh out;
  out.vertices = mesh.vertices;
  for (int f = 0; f < mesh.face_count(); ++f) {
    if (alive[static_cast<std::size_t>(f)]) {
      out.faces.push_back(mesh.faces[static_cast<std::size_t>(f)]);
    }
  }
  return out;
}

namespace {

struct BoundaryPath {
  std::vector<int> vertices;  // consecutive boundary vertices
  bool closed = false;

  int edge_count() const {
    return static_cast<int>(vertices.size()) - (closed ? 0 : 1);
  }
};

// Walks chains of incidence-1 edges. At junction vertices (more than two
// boundary edges) the smallest-index continuation is taken, which keeps
// traversal deterministic.
std::vector<BoundaryPath> trace_boundary(const std::map<EdgeKey, int>& incidence) {
  std::map<int, std::vector<int>> adjacency;
  std::set<EdgeKey> unvisited;
  for (const auto& [edge, count] : incidence) {
    if (count != 1) continue;
    unvisited.insert(edge);
    adjacency[edge.first].push_back(edge.second);
    adjacency[edge.second].push_back(edge.first);
  }
  for (auto& [v, nbrs] : adjacency) {
    (void)v;
    std::sort(nbrs.begin(), nbrs.end());
  }

  std::vector<BoundaryPath> paths;
  while (!unvisited.empty()) {
    const EdgeKey start = *unvisited.begin();
    unvisited.erase(unvisited.begin());
    BoundaryPath path;
    path.vertices = {start.first, start.second};
    while (true) {
      const int cur = path.vertices.back();
      int next = -1;
      for (int candidate : adjacency[cur]) {
        if (unvisited.count(make_edge_key(cur, candidate))) {
          next = candidate;
          break;
        }
      }
      if (next < 0) break;
      unvisited.erase(make_edge_key(cur, next));
      if (next == path.vertices.front()) {
        path.closed = true;
        break;
      }
      path.vertices.push_back(next);
    }
    paths.push_back(std::move(path));
  }
  return paths;
}

constexpr double kDegPerRad = 180.0 / std::numbers::pi;

double turn_angle_deg(const Vec3& prev, const Vec3& corner, const Vec3& next) {
  const Vec3 a = prev - corner;
  const Vec3 b = next - corner;
  return std::atan2(a.cross(b).norm(), a.dot(b)) * kDegPerRad;
}

class HoleFiller {
 public:
  HoleFiller(QuadMesh mesh, const PostprocessOptions& options)
      : mesh_(std::move(mesh)), options_(options) {
    EdgeStats stats = edge_stats(mesh_);
    incidence_ = std::move(stats.incidence);
    for (const auto& [edge, count] : incidence_) {
      (void)edge;
      if (count >= 3) {
        throw std::invalid_argument(
            "fill_holes: mesh has non-manifold edges; run prune first");
      }
    }
    for (const auto& face : mesh_.faces) {
      std::array<int, 4> key = face;
      std::sort(key.begin(), key.end());
      face_sets_.insert(key);
    }
  }

  QuadMesh run() {
    for (int pass = 0; pass < options_.max_passes; ++pass) {
      if (!fill_pass()) break;
    }
    return std::move(mesh_);
  }

 private:
  bool fill_pass() {
    bool applied = false;
    for (const BoundaryPath& path : trace_boundary(incidence_)) {
      if (try_pattern1(path) || try_pattern2(path) || try_pattern3(path)) {
        applied = true;
      }
    }
    return applied;
  }

  // A quad-sized closed loop becomes one face.
  bool try_pattern1(const BoundaryPath& path) {
    if (!path.closed || path.vertices.size() != 4) return false;
    return add_face({path.vertices[0], path.vertices[1], path.vertices[2],
                     path.vertices[3]});
  }

  // Three consecutive boundary edges with both interior turns near 90
  // degrees: bridge first source to last target. An S-shaped window (turns
  // in opposite directions, e.g. where a notch meets the outer rim) yields
  // a self-intersecting quad; the scaled-Jacobian gate rejects those and
  // keeps only genuine concave hole segments.
  bool try_pattern2(const BoundaryPath& path) {
    const int n = static_cast<int>(path.vertices.size());
    const int windows = path.closed ? n : n - 3;
    for (int s = 0; s < windows; ++s) {
      const int a = vertex_at(path, s);
      const int b = vertex_at(path, s + 1);
      const int c = vertex_at(path, s + 2);
      const int d = vertex_at(path, s + 3);
      if (a == d) continue;
      if (!near_right_angle(a, b, c) || !near_right_angle(b, c, d)) continue;
      const std::array<Vec3, 4> quad{point(a), point(b), point(c), point(d)};
      try {
        if (scaled_jacobian(quad) <= 0.2) continue;
      } catch (const std::domain_error&) {
        continue;
      }
      if (add_face({a, b, c, d})) return true;
    }
    return false;
  }

  // Two consecutive boundary edges with a near-right turn: complete the
  // parallelogram with a fresh vertex. If the completed position lands on
  // an existing vertex the corner is the outer rim of an intact sheet, not
  // a hole, and the fill is skipped.
  bool try_pattern3(const BoundaryPath& path) {
    const int n = static_cast<int>(path.vertices.size());
    const int windows = path.closed ? n : n - 2;
    for (int s = 0; s < windows; ++s) {
      const int a = vertex_at(path, s);
      const int b = vertex_at(path, s + 1);
      const int c = vertex_at(path, s + 2);
      if (!near_right_angle(a, b, c)) continue;
      const Vec3 fresh = point(a) + point(c) - point(b);
      const double clearance =
          0.5 * std::min((point(a) - point(b)).norm(),
                         (point(c) - point(b)).norm());
      if (near_existing_vertex(fresh, clearance)) continue;
      const int fresh_id = static_cast<int>(mesh_.vertices.size());
      mesh_.vertices.push_back(fresh);
      if (add_face({a, b, c, fresh_id})) return true;
      mesh_.vertices.pop_back();
    }
    return false;
  }

  bool near_existing_vertex(const Vec3& position, double clearance) const {
    for (const Vec3& v : mesh_.vertices) {
      if ((v - position).norm() < clearance) return true;
    }
    return false;
  }

  int vertex_at(const BoundaryPath& path, int i) const {
    const int n = static_cast<int>(path.vertices.size());
    return path.vertices[static_cast<std::size_t>(path.closed ? i % n : i)];
  }

  const Vec3& point(int v) const {
    return mesh_.vertices[static_cast<std::size_t>(v)];
  }

  bool near_right_angle(int a, int b, int c) const {
    return std::abs(turn_angle_deg(point(a), point(b), point(c)) - 90.0) <=
           options_.angle_tol_deg;
  }

  bool add_face(const std::array<int, 4>& face) {
    for (int i = 0; i < 4; ++i) {
      for (int j = i + 1; j < 4; ++j) {
        if (face[static_cast<std::size_t>(i)] == face[static_cast<std::size_t>(j)]) {
          return false;
        }
      }
    }
    std::array<int, 4> key = face;
    std::sort(key.begin(), key.end());
    if (face_sets_.count(key)) return false;
    for (int i = 0; i < 4; ++i) {
      const auto it = incidence_.find(
          make_edge_key(face[static_cast<std::size_t>(i)],
                        face[static_cast<std::size_t>((i + 1) % 4)]));
      if (it != incidence_.end() && it->second >= 2) return false;
    }
    for (int i = 0; i < 4; ++i) {
      ++incidence_[make_edge_key(face[static_cast<std::size_t>(i)],
                                 face[static_cast<std::size_t>((i + 1) % 4)])];
    }
    mesh_.faces.push_back(face);
    face_sets_.insert(key);
    return true;
  }

  QuadMesh mesh_;
  PostprocessOptions options_;
  std::map<EdgeKey, int> incidence_;
  std::set<std::array<int, 4>> face_sets_;
};

}  // namespace

QuadMesh fill_holes(const QuadMesh& mesh, const PostprocessOptions& options) {
  return HoleFiller(mesh, options).run();
}

QuadMesh postprocess(const QuadMesh& mesh, const PostprocessOptions& options) {
  QuadMesh out = options.skip_prune ? mesh : prune_nonmanifold(mesh);
  if (!options.skip_fill) out = fill_holes(out, options);
  return out;
}

}  // namespace quadrec
