#include "quadrec/candidates.hpp"

#include "quadrec/face_features.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace quadrec {

const char* filter_reason_name(FilterReason reason) {
  switch (reason) {
    case FilterReason::kPass: return "pass";
    case FilterReason::kDegenerate: return "degenerate";
    case FilterReason::kEdgeRatio: return "edge_ratio";
    case FilterReason::kCornerSine: return "corner_sine";
    case FilterReason::kCoplanarity: return "coplanarity";
  }
  return "unknown";
}

std::optional<std::array<int, 4>> order_ccw(
    const std::array<Vec3, 4>& points, const std::array<int, 4>& indices,
    int center_slot, const Vec3& orientation_normal) {
  Vec3 centroid = Vec3::Zero();
  for (const Vec3& p : points) centroid += p;
  centroid *= 0.25;

  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const Vec3& p : points) {
    const Vec3 d = p - centroid;
    cov += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
  const Vec3 evals = solver.eigenvalues().cwiseMax(0.0);
  // Ascending order: evals[2] is the largest in-plane spread.
  if (!(evals[1] > 1e-12 * evals[2])) {
    return std::nullopt;  // all 4 points within tolerance of a line
  }
  const Vec3 u = solver.eigenvectors().col(2);
  const Vec3 v = solver.eigenvectors().col(1);

  struct Slot {
    double angle;
    double radius;
    int slot;
  };
  std::array<Slot, 4> order{};
  for (int i = 0; i < 4; ++i) {
    const Vec3 d = points[static_cast<std::size_t>(i)] - centroid;
    order[static_cast<std::size_t>(i)] = {std::atan2(d.dot(v), d.dot(u)),
                                          d.norm(), i};
  }
  std::sort(order.begin(), order.end(), [](const Slot& a, const Slot& b) {
    if (a.angle != b.angle) return a.angle < b.angle;
    if (a.radius != b.radius) return a.radius < b.radius;
    return a.slot < b.slot;
  });

  std::array<int, 4> cyclic{};
  for (int i = 0; i < 4; ++i) {
    cyclic[static_cast<std::size_t>(i)] = order[static_cast<std::size_t>(i)].slot;
  }

  // The angular sort is CCW about u x v; flip if that disagrees with the
  // requested orientation normal.
  if (u.cross(v).dot(orientation_normal) < 0.0) {
    std::swap(cyclic[1], cyclic[3]);
  }

  int start = 0;
  while (cyclic[static_cast<std::size_t>(start)] != center_slot) ++start;
  std::array<int, 4> out{};
  for (int i = 0; i < 4; ++i) {
    out[static_cast<std::size_t>(i)] =
        indices[static_cast<std::size_t>(cyclic[static_cast<std::size_t>((start + i) % 4)])];
  }
  return out;
}

FilterResult geometric_filter(const std::array<Vec3, 4>& face_points,
                              const FilterThresholds& thresholds) {
  std::array<Vec3, 4> edges;
  std::array<double, 4> lengths{};
  for (int i = 0; i < 4; ++i) {
    edges[static_cast<std::size_t>(i)] =
        face_points[static_cast<std::size_t>((i + 1) % 4)] -
        face_points[static_cast<std::size_t>(i)];
    lengths[static_cast<std::size_t>(i)] = edges[static_cast<std::size_t>(i)].norm();
  }

  std::array<Vec3, 4> crosses;
  for (int i = 0; i < 4; ++i) {
    const Vec3& incoming = edges[static_cast<std::size_t>((i + 3) % 4)];
    const Vec3& outgoing = edges[static_cast<std::size_t>(i)];
    const double denom = lengths[static_cast<std::size_t>((i + 3) % 4)] *
                         lengths[static_cast<std::size_t>(i)];
    crosses[static_cast<std::size_t>(i)] = incoming.cross(outgoing);
    if (!(denom > 0.0) ||
        crosses[static_cast<std::size_t>(i)].norm() <= 1e-14 * denom) {
      return {false, FilterReason::kDegenerate};
    }
  }

  const auto [min_len, max_len] = std::minmax_element(lengths.begin(), lengths.end());
  if (*min_len / *max_len < thresholds.min_edge_ratio) {
    return {false, FilterReason::kEdgeRatio};
  }

  for (int i = 0; i < 4; ++i) {
    const double sine =
        crosses[static_cast<std::size_t>(i)].norm() /
        (lengths[static_cast<std::size_t>((i + 3) % 4)] *
         lengths[static_cast<std::size_t>(i)]);
    if (sine < thresholds.min_sine) return {false, FilterReason::kCornerSine};
  }

  std::array<Vec3, 4> normals;
  for (int i = 0; i < 4; ++i) {
    normals[static_cast<std::size_t>(i)] =
        crosses[static_cast<std::size_t>(i)].normalized();
  }
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      if (normals[static_cast<std::size_t>(i)].dot(
              normals[static_cast<std::size_t>(j)]) < thresholds.min_normal_dot) {
        return {false, FilterReason::kCoplanarity};
      }
    }
  }
  return {true, FilterReason::kPass};
}

std::vector<CandidateFace> propose_candidates(const PointCloud& cloud,
                                              const NeighborGraph& graph,
                                              const CandidateConfig& config) {
  const int n = cloud.size();
  const int k = graph.k;
  const LocalFrames frames = local_pca_frames(cloud, graph);

  std::vector<CandidateFace> out;
  std::vector<CandidateFace> per_point;
  per_point.reserve(static_cast<std::size_t>(k * k * k) / 6 + 1);

  for (int center = 0; center < n; ++center) {
    per_point.clear();
    const auto& nbrs = graph.neighbors[static_cast<std::size_t>(center)];
    const Vec3& orient = frames.normals[static_cast<std::size_t>(center)];
    for (int a = 0; a < k; ++a) {
      for (int b = a + 1; b < k; ++b) {
        for (int c = b + 1; c < k; ++c) {
          const std::array<int, 4> idx{center, nbrs[static_cast<std::size_t>(a)],
                                       nbrs[static_cast<std::size_t>(b)],
                                       nbrs[static_cast<std::size_t>(c)]};
          const std::array<Vec3, 4> pts{
              cloud.points[static_cast<std::size_t>(idx[0])],
              cloud.points[static_cast<std::size_t>(idx[1])],
              cloud.points[static_cast<std::size_t>(idx[2])],
              cloud.points[static_cast<std::size_t>(idx[3])]};
          const auto ring = order_ccw(pts, idx, 0, orient);
          if (!ring) continue;
          std::array<Vec3, 4> ring_pts;
          for (int i = 0; i < 4; ++i) {
            ring_pts[static_cast<std::size_t>(i)] =
                cloud.points[static_cast<std::size_t>((*ring)[static_cast<std::size_t>(i)])];
          }
          if (!geometric_filter(ring_pts, config.thresholds).pass) continue;
          CandidateFace face;
          face.center = center;
          face.ring = *ring;
          face.quality = scaled_jacobian(ring_pts);
          per_point.push_back(face);
        }
      }
    }
    std::sort(per_point.begin(), per_point.end(),
              [](const CandidateFace& a, const CandidateFace& b) {
                if (a.quality != b.quality) return a.quality > b.quality;
                return a.sorted_vertex_set() < b.sorted_vertex_set();
              });
    const std::size_t keep = std::min<std::size_t>(
        per_point.size(), static_cast<std::size_t>(config.max_per_point));
    out.insert(out.end(), per_point.begin(),
               per_point.begin() + static_cast<std::ptrdiff_t>(keep));
  }
  return out;
}

void write_candidates(const std::string& path,
                      const std::vector<CandidateFace>& candidates) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "# center v0 v1 v2 v3 quality\n";
  out << std::setprecision(17);
  for (const CandidateFace& c : candidates) {
    out << c.center << " " << c.ring[0] << " " << c.ring[1] << " " << c.ring[2]
        << " " << c.ring[3] << " " << c.quality << "\n";
  }
  if (!out) throw std::runtime_error("failed while writing " + path);
}

std::vector<CandidateFace> read_candidates(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path + " for reading");
  std::vector<CandidateFace> candidates;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ss(line);
    CandidateFace c;
    if (!(ss >> c.center)) continue;  // blank or comment-only line
    if (!(ss >> c.ring[0] >> c.ring[1] >> c.ring[2] >> c.ring[3] >> c.quality)) {
      std::ostringstream msg;
      msg << path << ":" << lineno << ": malformed candidate record";
      throw std::runtime_error(msg.str());
    }
    if (c.ring[0] != c.center) {
      std::ostringstream msg;
      msg << path << ":" << lineno << ": ring must start at the center index";
      throw std::runtime_error(msg.str());
    }
    candidates.push_back(c);
  }
  return candidates;
}

}  // namespace quadrec
