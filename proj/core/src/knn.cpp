#include "quadrec/knn.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>
#include <stdexcept>

namespace quadrec {

NeighborGraph knn_graph(const PointCloud& cloud, int k) {
  const int n = cloud.size();
  if (k < 1) throw std::invalid_argument("knn_graph: k must be >= 1");
  if (n <= k) {
    std::ostringstream msg;
    msg << "knn_graph: cloud has " << n << " points but k=" << k
        << "; lower k below the point count";
    throw std::invalid_argument(msg.str());
  }
  NeighborGraph graph;
  graph.k = k;
  graph.neighbors.assign(static_cast<std::size_t>(n), {});

  std::vector<std::pair<double, int>> dist(static_cast<std::size_t>(n - 1));
  for (int i = 0; i < n; ++i) {
    const Vec3& pi = cloud.points[static_cast<std::size_t>(i)];
    std::size_t m = 0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      dist[m++] = {(cloud.points[static_cast<std::size_t>(j)] - pi).squaredNorm(), j};
    }
    std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
    auto& out = graph.neighbors[static_cast<std::size_t>(i)];
    out.resize(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) out[static_cast<std::size_t>(j)] = dist[static_cast<std::size_t>(j)].second;
  }
  return graph;
}

LocalFrames local_pca_frames(const PointCloud& cloud,
                             const NeighborGraph& graph) {
  const int n = cloud.size();
  LocalFrames frames;
  frames.normals.resize(static_cast<std::size_t>(n));
  frames.ratio21.resize(static_cast<std::size_t>(n));
  frames.ratio31.resize(static_cast<std::size_t>(n));

  for (int i = 0; i < n; ++i) {
    const auto& nbrs = graph.neighbors[static_cast<std::size_t>(i)];
    Vec3 mean = cloud.points[static_cast<std::size_t>(i)];
    for (int j : nbrs) mean += cloud.points[static_cast<std::size_t>(j)];
    mean /= static_cast<double>(nbrs.size() + 1);

    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    auto accumulate = [&](const Vec3& p) {
      const Vec3 d = p - mean;
      cov += d * d.transpose();
    };
    accumulate(cloud.points[static_cast<std::size_t>(i)]);
    for (int j : nbrs) accumulate(cloud.points[static_cast<std::size_t>(j)]);
    cov /= static_cast<double>(nbrs.size() + 1);

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
    // Eigen reports eigenvalues ascending: [l3, l2, l1].
    const Vec3 evals = solver.eigenvalues().cwiseMax(0.0);
    const double l1 = evals[2], l2 = evals[1], l3 = evals[0];
    if (!(l1 > 0.0)) {
      std::ostringstream msg;
      msg << "local_pca_frames: degenerate neighborhood at point " << i
          << " (all neighbors coincident)";
      throw std::domain_error(msg.str());
    }
    frames.normals[static_cast<std::size_t>(i)] = solver.eigenvectors().col(0);
    frames.ratio21[static_cast<std::size_t>(i)] = l2 / l1;
    frames.ratio31[static_cast<std::size_t>(i)] = l3 / l1;
  }

  // Orient signs consistently inside each graph component. The root of
  // each component gets a fixed sign rule; neighbors inherit by majority
  // agreement with already-oriented points, walked breadth-first from the
  // lowest unvisited index for determinism.
  std::vector<char> oriented(static_cast<std::size_t>(n), 0);
  for (int root = 0; root < n; ++root) {
    if (oriented[static_cast<std::size_t>(root)]) continue;
    Vec3& rn = frames.normals[static_cast<std::size_t>(root)];
    int axis = 0;
    rn.cwiseAbs().maxCoeff(&axis);
    if (rn[axis] < 0.0) rn = -rn;
    oriented[static_cast<std::size_t>(root)] = 1;

    std::deque<int> queue{root};
    while (!queue.empty()) {
      const int cur = queue.front();
      queue.pop_front();
      const Vec3& cn = frames.normals[static_cast<std::size_t>(cur)];
      for (int j : graph.neighbors[static_cast<std::size_t>(cur)]) {
        if (oriented[static_cast<std::size_t>(j)]) continue;
        Vec3& jn = frames.normals[static_cast<std::size_t>(j)];
        if (cn.dot(jn) < 0.0) jn = -jn;
        oriented[static_cast<std::size_t>(j)] = 1;
        queue.push_back(j);
      }
    }
  }
  return frames;
}

}  // namespace quadrec
