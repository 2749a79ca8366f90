#pragma once

#include "quadrec/mesh.hpp"

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace quadrec {

/// Aggregate quality/fit report. Fields default to NaN until filled;
/// precision/recall stay NaN unless labels are supplied.
struct MetricsReport {
  double mean_scaled_jacobian = std::numeric_limits<double>::quiet_NaN();
  double mean_max_min_edge_ratio = std::numeric_limits<double>::quiet_NaN();
  double angle_distortion = std::numeric_limits<double>::quiet_NaN();  // RMSE, degrees
  double angle_distortion_mse = std::numeric_limits<double>::quiet_NaN();
  double watertightness = std::numeric_limits<double>::quiet_NaN();
  double manifoldness = std::numeric_limits<double>::quiet_NaN();
  double chamfer_distance = std::numeric_limits<double>::quiet_NaN();
  double precision = std::numeric_limits<double>::quiet_NaN();
  double recall = std::numeric_limits<double>::quiet_NaN();
  bool has_labels = false;
  std::vector<std::string> warnings;
};

/// Longest edge / shortest edge of one face (>= 1). Throws
/// std::domain_error on a zero-length edge.
double max_min_edge_ratio(const std::array<Vec3, 4>& face_points);
double mesh_mean_max_min_edge_ratio(const QuadMesh& mesh);

/// Interior-angle deviation from 90 degrees over all 4F corners. `rmse_deg`
/// is the reported angle distortion; `mse_deg2` is the raw mean-square
/// form. Degenerate corners are excluded and counted.
struct AngleDistortion {
  double rmse_deg = 0.0;
  double mse_deg2 = 0.0;
  int degenerate_corners = 0;
};
AngleDistortion angle_distortion(const QuadMesh& mesh);

/// Area-weighted surface samples: a face is drawn proportionally to its
/// area, the position bilinearly interpolated with uniform parameters.
std::vector<Vec3> sample_mesh_points(const QuadMesh& mesh, int n_samples,
                                     std::uint64_t seed);

/// Symmetric mean nearest-neighbor distance between two point sets.
double chamfer_between(const std::vector<Vec3>& a, const std::vector<Vec3>& b);

/// Chamfer distance between a target cloud and `n_samples` area-weighted
/// points sampled on the mesh. Empty mesh returns +infinity with a warning.
double chamfer_distance(const PointCloud& target, const QuadMesh& mesh,
                        int n_samples = 10000, std::uint64_t seed = 0);

/// (TP/(TP+FP), TP/(TP+FN)); a zero denominator yields 0 with a warning.
std::pair<double, double> precision_recall(const std::vector<int>& predicted,
                                           const std::vector<int>& truth);

/// Fills every applicable report field; individual metric failures become
/// per-field warnings instead of aborting the report.
MetricsReport evaluate(const QuadMesh& mesh, const PointCloud& target,
                       const std::vector<int>* predicted_labels = nullptr,
                       const std::vector<int>* true_labels = nullptr,
                       int chamfer_samples = 10000, std::uint64_t seed = 0);

std::string format_report_table(const MetricsReport& report);
std::string format_report_kv(const MetricsReport& report);
std::string format_report_json(const MetricsReport& report);

}  // namespace quadrec
