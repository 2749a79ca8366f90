#pragma once

#include "quadrec/candidates.hpp"
#include "quadrec/postprocess.hpp"
#include "quadrec/train.hpp"

#include <cstdint>
#include <string>

namespace quadrec {

/// Every stage setting in one place, loadable from a `key = value` file
/// ('#' comments) and overridable by CLI flags. Defaults reproduce the
/// reference setup: k=12, filter thresholds (0.25, 0.3, 0.5), 12
/// candidates per point, 500 epochs, momentum 0.99, lr 1e-3.
struct PipelineConfig {
  int k = 12;
  CandidateConfig candidates;  // max_per_point=12, thresholds per defaults
  TrainConfig train;
  double inference_threshold = 0.5;
  PostprocessOptions post;
  int chamfer_samples = 10000;
  std::uint64_t seed = 0;
};

PipelineConfig load_config(const std::string& path);
void save_config(const std::string& path, const PipelineConfig& config);

}  // namespace quadrec
