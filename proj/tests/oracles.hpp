#pragma once

// Independent reference implementations used by unit tests and the
// acceptance suite. These deliberately re-derive results with their own
// enumeration and sorting so the production paths are checked against
// something that cannot share their shortcuts.

#include "quadrec/candidates.hpp"
#include "quadrec/face_features.hpp"
#include "quadrec/knn.hpp"

#include <algorithm>
#include <vector>

namespace quadrec::testing {

/// Straight-line reimplementation of candidate proposal: every neighbor
/// triple, the same ordering/filter primitives, an explicit stable sort on
/// (quality descending, sorted vertex tuple ascending) and a plain
/// truncation.
inline std::vector<CandidateFace> brute_force_candidates(
    const PointCloud& cloud, const NeighborGraph& graph,
    const CandidateConfig& config) {
  const LocalFrames frames = local_pca_frames(cloud, graph);
  std::vector<CandidateFace> all;
  for (int center = 0; center < cloud.size(); ++center) {
    std::vector<CandidateFace> mine;
    const auto& nbrs = graph.neighbors[static_cast<std::size_t>(center)];
    const int k = static_cast<int>(nbrs.size());
    for (int a = 0; a < k; ++a) {
      for (int b = a + 1; b < k; ++b) {
        for (int c = b + 1; c < k; ++c) {
          std::array<int, 4> idx{center, nbrs[static_cast<std::size_t>(a)],
                                 nbrs[static_cast<std::size_t>(b)],
                                 nbrs[static_cast<std::size_t>(c)]};
          std::array<Vec3, 4> pts;
          for (int i = 0; i < 4; ++i) {
            pts[static_cast<std::size_t>(i)] =
                cloud.points[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
          }
          const auto ring = order_ccw(
              pts, idx, 0, frames.normals[static_cast<std::size_t>(center)]);
          if (!ring) continue;
          std::array<Vec3, 4> ring_pts;
          for (int i = 0; i < 4; ++i) {
            ring_pts[static_cast<std::size_t>(i)] = cloud.points[static_cast<std::size_t>(
                (*ring)[static_cast<std::size_t>(i)])];
          }
          if (!geometric_filter(ring_pts, config.thresholds).pass) continue;
          CandidateFace face;
          face.center = center;
          face.ring = *ring;
          face.quality = scaled_jacobian(ring_pts);
          mine.push_back(face);
        }
      }
    }
    std::stable_sort(mine.begin(), mine.end(),
                     [](const CandidateFace& x, const CandidateFace& y) {
                       if (x.quality != y.quality) return x.quality > y.quality;
                       return x.sorted_vertex_set() < y.sorted_vertex_set();
                     });
    if (static_cast<int>(mine.size()) > config.max_per_point) {
      mine.resize(static_cast<std::size_t>(config.max_per_point));
    }
    all.insert(all.end(), mine.begin(), mine.end());
  }
  return all;
}

inline bool same_candidates(const std::vector<CandidateFace>& a,
                            const std::vector<CandidateFace>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].center != b[i].center || a[i].ring != b[i].ring ||
        a[i].quality != b[i].quality) {
      return false;
    }
  }
  return true;
}

}  // namespace quadrec::testing
