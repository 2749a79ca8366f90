#pragma once

#include "quadrec/candidates.hpp"
#include "quadrec/mesh.hpp"
#include "quadrec/synth.hpp"

#include <string>
#include <vector>

namespace quadrec {

/// One training/evaluation sample: a point cloud, its candidate faces,
/// per-candidate labels (1 = the candidate's unordered vertex set is a
/// reference face) and the reference mesh the labels came from.
struct LabeledSample {
  PointCloud cloud;
  std::vector<CandidateFace> candidates;
  std::vector<int> labels;
  QuadMesh reference;
};

/// Label 1 iff the candidate's unordered vertex set equals some reference
/// face's unordered vertex set. Candidates touching noise points (indices
/// beyond the reference vertex range) can never match and get 0.
std::vector<int> label_candidates(const std::vector<CandidateFace>& candidates,
                                  const QuadMesh& reference);

/// Cross-entropy class weight: multiplier * (#negatives / #positives).
/// Throws std::invalid_argument when there are no positive labels.
double class_weight(const std::vector<int>& labels, double multiplier = 1.1);

void write_labels(const std::string& path, const std::vector<int>& labels);
std::vector<int> read_labels(const std::string& path);

/// Key/value manifest stored as meta.json inside a sample bundle.
struct BundleMeta {
  std::string kind;
  int res_u = 0;
  int res_v = 0;
  double noise_ratio = 0.0;
  double noise_amplitude = 0.0;
  std::uint64_t seed = 0;
  int n_points = 0;
  int n_noise = 0;
  int k = 0;
  int max_per_point = 0;
  FilterThresholds thresholds;
  int n_candidates = 0;
  int n_positive = 0;
};

BundleMeta meta_for_spec(const ShapeSpec& spec);
void save_meta(const std::string& dir, const BundleMeta& meta);
BundleMeta load_meta(const std::string& dir);

/// Sample bundle directory layout: cloud.ply, reference.obj,
/// candidates.txt, labels.txt, meta.json. `save_bundle` writes whatever
/// parts are non-empty; `load_bundle` reads whatever parts exist (cloud
/// and reference are required).
void save_bundle(const std::string& dir, const LabeledSample& sample,
                 const BundleMeta& meta);
LabeledSample load_bundle(const std::string& dir);

/// Generates, labels and saves one synthetic bundle end to end.
LabeledSample make_sample(const ShapeSpec& spec, const CandidateConfig& config,
                          int k);

}  // namespace quadrec
