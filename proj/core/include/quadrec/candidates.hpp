#pragma once

#include "quadrec/knn.hpp"
#include "quadrec/mesh.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace quadrec {

/// Thresholds of the three candidate filters: reciprocal aspect ratio,
/// minimum corner sine, and minimum pairwise dot of unit corner normals.
struct FilterThresholds {
  double min_edge_ratio = 0.25;
  double min_sine = 0.3;
  double min_normal_dot = 0.5;
};

struct CandidateConfig {
  FilterThresholds thresholds;
  int max_per_point = 12;
};

/// A quadrilateral proposed around a center point. `ring` holds 4 point
/// indices in CCW cyclic order with ring[0] == center. `quality` is the
/// scaled Jacobian used for per-point ranking.
struct CandidateFace {
  int center = -1;
  std::array<int, 4> ring{};
  double quality = 0.0;

  std::array<int, 4> sorted_vertex_set() const {
    std::array<int, 4> s = ring;
    if (s[0] > s[1]) std::swap(s[0], s[1]);
    if (s[2] > s[3]) std::swap(s[2], s[3]);
    if (s[0] > s[2]) std::swap(s[0], s[2]);
    if (s[1] > s[3]) std::swap(s[1], s[3]);
    if (s[1] > s[2]) std::swap(s[1], s[2]);
    return s;
  }
};

enum class FilterReason {
  kPass,
  kDegenerate,
  kEdgeRatio,
  kCornerSine,
  kCoplanarity,
};

struct FilterResult {
  bool pass = false;
  FilterReason reason = FilterReason::kPass;
};

const char* filter_reason_name(FilterReason reason);

/// Sorts the 4 points by angle around their centroid within their
/// least-squares plane and orients the cycle so its normal agrees with
/// `orientation_normal`. The returned cyclic order starts at
/// `indices[center_slot]`. Returns nullopt when the best-fit plane is
/// degenerate (points within tolerance of a line).
std::optional<std::array<int, 4>> order_ccw(
    const std::array<Vec3, 4>& points, const std::array<int, 4>& indices,
    int center_slot, const Vec3& orientation_normal);

/// Applies the three geometric tests in order (edge ratio, corner sine,
/// normal coplanarity) to a CCW-ordered face and reports the first failure.
FilterResult geometric_filter(const std::array<Vec3, 4>& face_points,
                              const FilterThresholds& thresholds);

/// Enumerates every C(k,3) neighbor triple per point, orders and filters
/// each prospective quad, ranks survivors per point by scaled Jacobian
/// descending (ties: lower sorted vertex tuple first) and keeps the best
/// `max_per_point`. Output is deterministic: ascending center, then rank.
std::vector<CandidateFace> propose_candidates(const PointCloud& cloud,
                                              const NeighborGraph& graph,
                                              const CandidateConfig& config);

/// Line-oriented candidate records: `center v0 v1 v2 v3 quality` with
/// v0 == center; '#' starts a comment.
void write_candidates(const std::string& path,
                      const std::vector<CandidateFace>& candidates);
std::vector<CandidateFace> read_candidates(const std::string& path);

}  // namespace quadrec
