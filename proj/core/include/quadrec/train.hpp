#pragma once

#include "quadrec/dataset.hpp"
#include "quadrec/model.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace quadrec {

struct TrainConfig {
  int epochs = 500;
  double momentum = 0.99;
  double initial_lr = 1e-3;
  int lr_decay_epochs = 150;  // learning rate divided by 10 every this many
  double w_multiplier = 1.1;
  double face_loss_sign = +1.0;  // -1 reproduces the verbatim loss form
  bool use_face_loss = true;
  std::uint64_t seed = 0;
};

double learning_rate_at(const TrainConfig& cfg, int epoch);

struct LossTerms {
  double classification = 0.0;
  double face = 0.0;
  double total() const { return classification + face; }
};

/// Summed weighted cross-entropy plus the exponential face term over all
/// candidates. Probabilities are clamped to [1e-12, 1-1e-12] inside the
/// logs.
LossTerms compound_loss_value(const Eigen::MatrixXd& probs,
                              const std::vector<int>& labels, double w,
                              double face_loss_sign = +1.0,
                              bool use_face_loss = true);

/// d(total loss)/d(logits), 2 x N_F.
Eigen::MatrixXd compound_loss_logit_grad(const Eigen::MatrixXd& probs,
                                         const std::vector<int>& labels,
                                         double w, double face_loss_sign = +1.0,
                                         bool use_face_loss = true);

/// Loss plus full analytic parameter gradients for one sample. Runs a
/// training-mode forward, so batch normalization uses batch statistics.
struct PipelineInputOwned {
  PointCloud cloud;
  NeighborGraph graph;
  LocalFrames frames;
  std::vector<CandidateFace> candidates;
  Eigen::MatrixXd face_info;
  std::vector<int> labels;
  double class_w = 1.0;

  PipelineInput view() const;
};
LossTerms compound_loss(const PipelineInputOwned& sample,
                        const ModelParams& params, const TrainConfig& cfg,
                        ModelParams* grad_out,
                        ForwardCache* cache_out = nullptr);

/// Precomputes graph, frames and the (drop-masked) descriptor matrix.
PipelineInputOwned prepare_sample(const LabeledSample& sample, int k,
                                  const ModelHyper& hyper,
                                  double w_multiplier);

struct EpochLog {
  int epoch = 0;
  double lr = 0.0;
  double loss_classification = 0.0;
  double loss_face = 0.0;
  double loss_total = 0.0;
};

struct TrainResult {
  ModelParams params;
  std::vector<EpochLog> log;
};

/// Momentum SGD over the samples, one full-batch step per sample per
/// epoch. The per-sample gradient is averaged over its candidates before
/// the momentum update. Deterministic given cfg.seed. Throws
/// std::runtime_error naming epoch and sample if the loss turns
/// non-finite.
TrainResult train(const std::vector<PipelineInputOwned>& samples,
                  const TrainConfig& cfg, const ModelHyper& hyper,
                  std::ostream* log_stream = nullptr);

}  // namespace quadrec
