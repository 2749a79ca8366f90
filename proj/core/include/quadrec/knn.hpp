#pragma once

#include "quadrec/mesh.hpp"

#include <vector>

namespace quadrec {

/// Exact k-nearest-neighbor graph. Per point, `neighbors[i]` holds the k
/// nearest other points ascending by Euclidean distance, ties broken by
/// smaller index.
struct NeighborGraph {
  int k = 0;
  std::vector<std::vector<int>> neighbors;
};

/// Brute-force exact k-NN. Throws std::invalid_argument when the cloud has
/// fewer than k+1 points (instructing to lower k).
NeighborGraph knn_graph(const PointCloud& cloud, int k);

/// Per-point surface normals from the PCA of each point's neighborhood
/// (the point plus its k neighbors). Signs are propagated breadth-first
/// over the graph so that orientation is consistent within each connected
/// component; the global sign per component is arbitrary.
struct LocalFrames {
  std::vector<Vec3> normals;
  // Eigenvalue ratios lambda2/lambda1 and lambda3/lambda1 with
  // lambda1 >= lambda2 >= lambda3 >= 0.
  std::vector<double> ratio21;
  std::vector<double> ratio31;
};
LocalFrames local_pca_frames(const PointCloud& cloud,
                             const NeighborGraph& graph);

}  // namespace quadrec
