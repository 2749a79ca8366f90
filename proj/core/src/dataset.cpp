#include "quadrec/dataset.hpp"

#include "quadrec/mesh_io.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace quadrec {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<int> label_candidates(const std::vector<CandidateFace>& candidates,
                                  const QuadMesh& reference) {
  std::set<std::array<int, 4>> truth;
  for (const auto& face : reference.faces) {
    std::array<int, 4> key = face;
    std::sort(key.begin(), key.end());
    truth.insert(key);
  }
  std::vector<int> labels(candidates.size(), 0);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (truth.count(candidates[i].sorted_vertex_set())) labels[i] = 1;
  }
  return labels;
}

double class_weight(const std::vector<int>& labels, double multiplier) {
  long positives = 0;
  for (int label : labels) positives += label;
  if (positives == 0) {
    throw std::invalid_argument(
        "class_weight: sample has no positive labels; unusable for training");
  }
  const long negatives = static_cast<long>(labels.size()) - positives;
  return multiplier * static_cast<double>(negatives) /
         static_cast<double>(positives);
}

void write_labels(const std::string& path, const std::vector<int>& labels) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  for (int label : labels) out << label << "\n";
  if (!out) throw std::runtime_error("failed while writing " + path);
}

std::vector<int> read_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path + " for reading");
  std::vector<int> labels;
  int value;
  while (in >> value) {
    if (value != 0 && value != 1) {
      throw std::runtime_error(path + ": labels must be 0 or 1");
    }
    labels.push_back(value);
  }
  return labels;
}

BundleMeta meta_for_spec(const ShapeSpec& spec) {
  BundleMeta meta;
  meta.kind = shape_kind_name(spec.kind);
  meta.res_u = spec.res_u;
  meta.res_v = spec.res_v;
  meta.noise_ratio = spec.noise_ratio;
  meta.noise_amplitude = spec.noise_amplitude;
  meta.seed = spec.seed;
  return meta;
}

void save_meta(const std::string& dir, const BundleMeta& meta) {
  json j;
  j["kind"] = meta.kind;
  j["res_u"] = meta.res_u;
  j["res_v"] = meta.res_v;
  j["noise_ratio"] = meta.noise_ratio;
  j["noise_amplitude"] = meta.noise_amplitude;
  j["seed"] = meta.seed;
  j["n_points"] = meta.n_points;
  j["n_noise"] = meta.n_noise;
  j["k"] = meta.k;
  j["max_per_point"] = meta.max_per_point;
  j["min_edge_ratio"] = meta.thresholds.min_edge_ratio;
  j["min_sine"] = meta.thresholds.min_sine;
  j["min_normal_dot"] = meta.thresholds.min_normal_dot;
  j["n_candidates"] = meta.n_candidates;
  j["n_positive"] = meta.n_positive;
  std::ofstream out(fs::path(dir) / "meta.json");
  if (!out) throw std::runtime_error("cannot write meta.json in " + dir);
  out << j.dump(2) << "\n";
}

BundleMeta load_meta(const std::string& dir) {
  std::ifstream in(fs::path(dir) / "meta.json");
  if (!in) throw std::runtime_error("cannot read meta.json in " + dir);
  json j;
  in >> j;
  BundleMeta meta;
  meta.kind = j.value("kind", std::string());
  meta.res_u = j.value("res_u", 0);
  meta.res_v = j.value("res_v", 0);
  meta.noise_ratio = j.value("noise_ratio", 0.0);
  meta.noise_amplitude = j.value("noise_amplitude", 0.0);
  meta.seed = j.value("seed", std::uint64_t{0});
  meta.n_points = j.value("n_points", 0);
  meta.n_noise = j.value("n_noise", 0);
  meta.k = j.value("k", 0);
  meta.max_per_point = j.value("max_per_point", 0);
  meta.thresholds.min_edge_ratio = j.value("min_edge_ratio", 0.25);
  meta.thresholds.min_sine = j.value("min_sine", 0.3);
  meta.thresholds.min_normal_dot = j.value("min_normal_dot", 0.5);
  meta.n_candidates = j.value("n_candidates", 0);
  meta.n_positive = j.value("n_positive", 0);
  return meta;
}

void save_bundle(const std::string& dir, const LabeledSample& sample,
                 const BundleMeta& meta) {
  fs::create_directories(dir);
  write_ply((fs::path(dir) / "cloud.ply").string(), sample.cloud);
  write_obj((fs::path(dir) / "reference.obj").string(), sample.reference);
  if (!sample.candidates.empty()) {
    write_candidates((fs::path(dir) / "candidates.txt").string(),
                     sample.candidates);
  }
  if (!sample.labels.empty()) {
    write_labels((fs::path(dir) / "labels.txt").string(), sample.labels);
  }
  save_meta(dir, meta);
}

LabeledSample load_bundle(const std::string& dir) {
  LabeledSample sample;
  sample.cloud = read_ply((fs::path(dir) / "cloud.ply").string());
  sample.reference = read_obj((fs::path(dir) / "reference.obj").string());
  const fs::path cand_path = fs::path(dir) / "candidates.txt";
  if (fs::exists(cand_path)) sample.candidates = read_candidates(cand_path.string());
  const fs::path label_path = fs::path(dir) / "labels.txt";
  if (fs::exists(label_path)) sample.labels = read_labels(label_path.string());
  if (!sample.labels.empty() && sample.labels.size() != sample.candidates.size()) {
    std::ostringstream msg;
    msg << dir << ": " << sample.labels.size() << " labels for "
        << sample.candidates.size() << " candidates";
    throw std::runtime_error(msg.str());
  }
  return sample;
}

LabeledSample make_sample(const ShapeSpec& spec, const CandidateConfig& config,
                          int k) {
  LabeledSample sample;
  sample.reference = synth_quad_mesh(spec);
  sample.cloud = inject_noise(sample.reference, spec);
  const NeighborGraph graph = knn_graph(sample.cloud, k);
  sample.candidates = propose_candidates(sample.cloud, graph, config);
  sample.labels = label_candidates(sample.candidates, sample.reference);
  return sample;
}

}  // namespace quadrec
