#include "quadrec/mesh.hpp"

#include <algorithm>
#include <iostream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace quadrec {

EdgeStats edge_stats(const QuadMesh& mesh) {
  EdgeStats stats;
  for (int f = 0; f < mesh.face_count(); ++f) {
    const auto& q = mesh.faces[static_cast<std::size_t>(f)];
    for (int i = 0; i < 4; ++i) {
      for (int j = i + 1; j < 4; ++j) {
        if (q[i] == q[j]) {
          std::ostringstream msg;
          msg << "edge_stats: face " << f << " is degenerate (vertex " << q[i]
              << " repeated)";
          throw std::invalid_argument(msg.str());
        }
      }
    }
    for (int i = 0; i < 4; ++i) {
      ++stats.incidence[make_edge_key(q[i], q[(i + 1) % 4])];
    }
  }
  for (const auto& [edge, count] : stats.incidence) {
    (void)edge;
    if (count == 1) ++stats.e1;
    if (count == 2) ++stats.e2;
  }
  stats.e_all = static_cast<std::int64_t>(stats.incidence.size());
  return stats;
}

MeshTopologyScores manifold_watertight_scores(const EdgeStats& stats) {
  if (stats.e_all == 0) {
    std::cerr << "warning: manifold_watertight_scores on empty mesh, "
                 "reporting (1, 1)\n";
    return {1.0, 1.0};
  }
  const double all = static_cast<double>(stats.e_all);
  return {static_cast<double>(stats.e1 + stats.e2) / all,
          static_cast<double>(stats.e2) / all};
}

Vec3 corner_normal(const std::array<Vec3, 4>& face_points, int corner) {
  const Vec3 incoming =
      face_points[static_cast<std::size_t>(corner)] -
      face_points[static_cast<std::size_t>((corner + 3) % 4)];
  const Vec3 outgoing =
      face_points[static_cast<std::size_t>((corner + 1) % 4)] -
      face_points[static_cast<std::size_t>(corner)];
  const Vec3 cross = incoming.cross(outgoing);
  const double len = cross.norm();
  if (!(len > 0.0)) {
    throw std::domain_error(
        "corner_normal: degenerate corner (zero-length or collinear edges)");
  }
  return cross / len;
}

void validate_mesh(const QuadMesh& mesh) {
  std::set<std::array<int, 4>> seen;
  for (int f = 0; f < mesh.face_count(); ++f) {
    auto q = mesh.faces[static_cast<std::size_t>(f)];
    for (int i = 0; i < 4; ++i) {
      if (q[i] < 0 || q[i] >= mesh.vertex_count()) {
        std::ostringstream msg;
        msg << "mesh: face " << f << " references out-of-range vertex "
            << q[i];
        throw std::invalid_argument(msg.str());
      }
      for (int j = i + 1; j < 4; ++j) {
        if (q[i] == q[j]) {
          std::ostringstream msg;
          msg << "mesh: face " << f << " repeats vertex " << q[i];
          throw std::invalid_argument(msg.str());
        }
      }
    }
    std::sort(q.begin(), q.end());
    if (!seen.insert(q).second) {
      std::ostringstream msg;
      msg << "mesh: face " << f << " duplicates another face's vertex set";
      throw std::invalid_argument(msg.str());
    }
  }
}

}  // namespace quadrec
