#include "quadrec/metrics.hpp"

#include "quadrec/face_features.hpp"
#include "quadrec/rng.hpp"
#include "quadrec/synth.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <iostream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace quadrec {

double max_min_edge_ratio(const std::array<Vec3, 4>& face_points) {
  double shortest = std::numeric_limits<double>::infinity();
  double longest = 0.0;
  for (int i = 0; i < 4; ++i) {
    const double len = (face_points[static_cast<std::size_t>((i + 1) % 4)] -
                        face_points[static_cast<std::size_t>(i)])
                           .norm();
    shortest = std::min(shortest, len);
    longest = std::max(longest, len);
  }
  if (!(shortest > 0.0)) {
    throw std::domain_error("max_min_edge_ratio: zero-length edge");
  }
  return longest / shortest;
}

double mesh_mean_max_min_edge_ratio(const QuadMesh& mesh) {
  if (mesh.faces.empty()) {
    throw std::invalid_argument("mesh_mean_max_min_edge_ratio: no faces");
  }
  double total = 0.0;
  for (int f = 0; f < mesh.face_count(); ++f) {
    total += max_min_edge_ratio(mesh.face_points(f));
  }
  return total / static_cast<double>(mesh.face_count());
}

AngleDistortion angle_distortion(const QuadMesh& mesh) {
  constexpr double kDegPerRad = 180.0 / std::numbers::pi;
  AngleDistortion result;
  double sum_sq = 0.0;
  long counted = 0;
  for (int f = 0; f < mesh.face_count(); ++f) {
    const auto pts = mesh.face_points(f);
    for (int i = 0; i < 4; ++i) {
      const Vec3 a = pts[static_cast<std::size_t>((i + 3) % 4)] -
                     pts[static_cast<std::size_t>(i)];
      const Vec3 b = pts[static_cast<std::size_t>((i + 1) % 4)] -
                     pts[static_cast<std::size_t>(i)];
      const double an = a.norm();
      const double bn = b.norm();
      if (!(an > 0.0) || !(bn > 0.0)) {
        ++result.degenerate_corners;
        continue;
      }
      const double theta = std::atan2(a.cross(b).norm(), a.dot(b)) * kDegPerRad;
      const double dev = theta - 90.0;
      sum_sq += dev * dev;
      ++counted;
    }
  }
  if (result.degenerate_corners > 0) {
    std::cerr << "warning: angle_distortion skipped "
              << result.degenerate_corners << " degenerate corners\n";
  }
  if (counted == 0) {
    throw std::invalid_argument("angle_distortion: no measurable corners");
  }
  result.mse_deg2 = sum_sq / static_cast<double>(counted);
  result.rmse_deg = std::sqrt(result.mse_deg2);
  return result;
}

std::vector<Vec3> sample_mesh_points(const QuadMesh& mesh, int n_samples,
                                     std::uint64_t seed) {
  if (mesh.faces.empty()) {
    throw std::invalid_argument("sample_mesh_points: mesh has no faces");
  }
  std::vector<double> cumulative(mesh.faces.size());
  double total = 0.0;
  for (int f = 0; f < mesh.face_count(); ++f) {
    total += quad_area(mesh.face_points(f));
    cumulative[static_cast<std::size_t>(f)] = total;
  }
  if (!(total > 0.0)) {
    throw std::invalid_argument("sample_mesh_points: zero total area");
  }
  Rng rng(seed);
  std::vector<Vec3> samples;
  samples.reserve(static_cast<std::size_t>(n_samples));
  for (int s = 0; s < n_samples; ++s) {
    const double pick = rng.uniform() * total;
    const auto it = std::lower_bound(cumulative.begin(), cumulative.end(), pick);
    const int f = static_cast<int>(std::min<std::ptrdiff_t>(
        it - cumulative.begin(),
        static_cast<std::ptrdiff_t>(cumulative.size()) - 1));
    const auto pts = mesh.face_points(f);
    const double u = rng.uniform();
    const double v = rng.uniform();
    samples.push_back((1.0 - u) * (1.0 - v) * pts[0] + u * (1.0 - v) * pts[1] +
                      u * v * pts[2] + (1.0 - u) * v * pts[3]);
  }
  return samples;
}

namespace {

double mean_nearest_distance(const std::vector<Vec3>& from,
                             const std::vector<Vec3>& to) {
  double total = 0.0;
  for (const Vec3& p : from) {
    double best = std::numeric_limits<double>::infinity();
    for (const Vec3& q : to) {
      best = std::min(best, (p - q).squaredNorm());
    }
    total += std::sqrt(best);
  }
  return total / static_cast<double>(from.size());
}

}  // namespace

double chamfer_between(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  if (a.empty() || b.empty()) {
    throw std::invalid_argument("chamfer_between: empty point set");
  }
  return mean_nearest_distance(a, b) + mean_nearest_distance(b, a);
}

double chamfer_distance(const PointCloud& target, const QuadMesh& mesh,
                        int n_samples, std::uint64_t seed) {
  if (target.points.empty()) {
    throw std::invalid_argument("chamfer_distance: empty target cloud");
  }
  if (mesh.faces.empty()) {
    std::cerr << "warning: chamfer_distance on empty mesh, reporting +inf\n";
    return std::numeric_limits<double>::infinity();
  }
  const std::vector<Vec3> samples = sample_mesh_points(mesh, n_samples, seed);
  return chamfer_between(samples, target.points);
}

std::pair<double, double> precision_recall(const std::vector<int>& predicted,
                                           const std::vector<int>& truth) {
  if (predicted.size() != truth.size()) {
    throw std::invalid_argument("precision_recall: length mismatch");
  }
  long tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const bool pred = predicted[i] != 0;
    const bool real = truth[i] != 0;
    if (pred && real) ++tp;
    if (pred && !real) ++fp;
    if (!pred && real) ++fn;
  }
  double precision = 0.0, recall = 0.0;
  if (tp + fp == 0) {
    std::cerr << "warning: precision undefined (no positive predictions)\n";
  } else {
    precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  }
  if (tp + fn == 0) {
    std::cerr << "warning: recall undefined (no positive labels)\n";
  } else {
    recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  }
  return {precision, recall};
}

MetricsReport evaluate(const QuadMesh& mesh, const PointCloud& target,
                       const std::vector<int>* predicted_labels,
                       const std::vector<int>* true_labels,
                       int chamfer_samples, std::uint64_t seed) {
  MetricsReport report;
  auto guard = [&report](const char* field, auto&& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      report.warnings.push_back(std::string(field) + ": " + e.what());
    }
  };

  guard("scaled_jacobian", [&] {
    if (mesh.faces.empty()) throw std::invalid_argument("no faces");
    double total = 0.0;
    for (int f = 0; f < mesh.face_count(); ++f) {
      total += scaled_jacobian(mesh.face_points(f));
    }
    report.mean_scaled_jacobian = total / static_cast<double>(mesh.face_count());
  });
  guard("max_min_edge_ratio", [&] {
    report.mean_max_min_edge_ratio = mesh_mean_max_min_edge_ratio(mesh);
  });
  guard("angle_distortion", [&] {
    const AngleDistortion ad = angle_distortion(mesh);
    report.angle_distortion = ad.rmse_deg;
    report.angle_distortion_mse = ad.mse_deg2;
  });
  guard("topology", [&] {
    const auto scores = manifold_watertight_scores(edge_stats(mesh));
    report.manifoldness = scores.manifoldness;
    report.watertightness = scores.watertightness;
  });
  guard("chamfer_distance", [&] {
    report.chamfer_distance = chamfer_distance(target, mesh, chamfer_samples, seed);
  });
  if (predicted_labels && true_labels) {
    guard("precision_recall", [&] {
      const auto [p, r] = precision_recall(*predicted_labels, *true_labels);
      report.precision = p;
      report.recall = r;
      report.has_labels = true;
    });
  }
  for (const std::string& w : report.warnings) {
    std::cerr << "warning: evaluate: " << w << "\n";
  }
  return report;
}

namespace {

struct Row {
  const char* name;
  double value;
  bool enabled;
};

std::vector<Row> report_rows(const MetricsReport& r) {
  return {
      {"scaled_jacobian", r.mean_scaled_jacobian, true},
      {"max_min_edge_ratio", r.mean_max_min_edge_ratio, true},
      {"angle_distortion", r.angle_distortion, true},
      {"angle_distortion_mse", r.angle_distortion_mse, true},
      {"watertightness", r.watertightness, true},
      {"manifoldness", r.manifoldness, true},
      {"chamfer_distance", r.chamfer_distance, true},
      {"precision", r.precision, r.has_labels},
      {"recall", r.recall, r.has_labels},
  };
}

}  // namespace

std::string format_report_table(const MetricsReport& report) {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(6);
  for (const Row& row : report_rows(report)) {
    if (!row.enabled) continue;
    out << row.name;
    for (std::size_t i = std::strlen(row.name); i < 22; ++i) out << ' ';
    out << row.value << "\n";
  }
  return out.str();
}

std::string format_report_kv(const MetricsReport& report) {
  std::ostringstream out;
  out.precision(17);
  for (const Row& row : report_rows(report)) {
    if (!row.enabled) continue;
    out << row.name << " = " << row.value << "\n";
  }
  return out.str();
}

std::string format_report_json(const MetricsReport& report) {
  nlohmann::json j;
  for (const Row& row : report_rows(report)) {
    if (!row.enabled) continue;
    if (std::isfinite(row.value)) {
      j[row.name] = row.value;
    } else {
      j[row.name] = nullptr;
    }
  }
  if (!report.warnings.empty()) j["warnings"] = report.warnings;
  return j.dump(2);
}

}  // namespace quadrec
