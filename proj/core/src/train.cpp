#include "quadrec/train.hpp"

#include "quadrec/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace quadrec {

namespace {
constexpr double kProbEpsilon = 1e-12;
}

double learning_rate_at(const TrainConfig& cfg, int epoch) {
  return cfg.initial_lr *
         std::pow(10.0, -static_cast<double>(epoch) /
                            static_cast<double>(cfg.lr_decay_epochs));
}

LossTerms compound_loss_value(const Eigen::MatrixXd& probs,
                              const std::vector<int>& labels, double w,
                              double face_loss_sign, bool use_face_loss) {
  if (static_cast<std::size_t>(probs.cols()) != labels.size()) {
    throw std::invalid_argument("compound_loss: label count mismatch");
  }
  LossTerms terms;
  for (Eigen::Index i = 0; i < probs.cols(); ++i) {
    const double p1 =
        std::clamp(probs(1, i), kProbEpsilon, 1.0 - kProbEpsilon);
    const int y = labels[static_cast<std::size_t>(i)];
    terms.classification -=
        y ? w * std::log(p1) : std::log(1.0 - p1);
    if (use_face_loss) {
      terms.face += face_loss_sign *
                    (y ? std::exp(probs(0, i)) : std::exp(probs(1, i)));
    }
  }
  return terms;
}

Eigen::MatrixXd compound_loss_logit_grad(const Eigen::MatrixXd& probs,
                                         const std::vector<int>& labels,
                                         double w, double face_loss_sign,
                                         bool use_face_loss) {
  if (static_cast<std::size_t>(probs.cols()) != labels.size()) {
    throw std::invalid_argument("compound_loss: label count mismatch");
  }
  Eigen::MatrixXd dlogits(2, probs.cols());
  for (Eigen::Index i = 0; i < probs.cols(); ++i) {
    const double p0 = probs(0, i);
    const double p1 = probs(1, i);
    const int y = labels[static_cast<std::size_t>(i)];
    // Cross entropy through the two-way softmax.
    double dz1 = y ? -w * p0 : p1;
    if (use_face_loss) {
      const double dface_dp0 = y ? face_loss_sign * std::exp(p0) : 0.0;
      const double dface_dp1 = y ? 0.0 : face_loss_sign * std::exp(p1);
      dz1 += p0 * p1 * (dface_dp1 - dface_dp0);
    }
    dlogits(0, i) = -dz1;
    dlogits(1, i) = dz1;
  }
  return dlogits;
}

PipelineInput PipelineInputOwned::view() const {
  PipelineInput input;
  input.cloud = &cloud;
  input.graph = &graph;
  input.frames = &frames;
  input.candidates = &candidates;
  input.face_info = face_info;
  return input;
}

LossTerms compound_loss(const PipelineInputOwned& sample,
                        const ModelParams& params, const TrainConfig& cfg,
                        ModelParams* grad_out, ForwardCache* cache_out) {
  ForwardCache local_cache;
  ForwardCache& cache = cache_out ? *cache_out : local_cache;
  const PipelineInput input = sample.view();
  const Eigen::MatrixXd probs = forward_probs(input, params, true, &cache);
  const LossTerms terms =
      compound_loss_value(probs, sample.labels, sample.class_w,
                          cfg.face_loss_sign, cfg.use_face_loss);
  if (grad_out) {
    const Eigen::MatrixXd dlogits =
        compound_loss_logit_grad(probs, sample.labels, sample.class_w,
                                 cfg.face_loss_sign, cfg.use_face_loss);
    backward(input, params, cache, dlogits, *grad_out);
  }
  return terms;
}

PipelineInputOwned prepare_sample(const LabeledSample& sample, int k,
                                  const ModelHyper& hyper,
                                  double w_multiplier) {
  PipelineInputOwned out;
  out.cloud = sample.cloud;
  out.graph = knn_graph(out.cloud, k);
  out.frames = local_pca_frames(out.cloud, out.graph);
  out.candidates = sample.candidates;
  out.face_info = build_face_info(out.cloud, out.candidates);
  apply_finfo_drop(out.face_info, hyper.drop);
  out.labels = sample.labels;
  out.class_w = class_weight(sample.labels, w_multiplier);
  return out;
}

TrainResult train(const std::vector<PipelineInputOwned>& samples,
                  const TrainConfig& cfg, const ModelHyper& hyper,
                  std::ostream* log_stream) {
  if (samples.empty()) throw std::invalid_argument("train: no samples");
  for (const auto& s : samples) {
    if (s.candidates.empty()) {
      throw std::invalid_argument("train: sample with zero candidates");
    }
  }

  TrainResult result;
  result.params = init_params(hyper, cfg.seed);
  ModelParams velocity = zero_like(result.params);
  Rng order_rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = learning_rate_at(cfg, epoch);
    EpochLog log;
    log.epoch = epoch;
    log.lr = lr;

    // Seeded Fisher-Yates shuffle: decorrelates sample order across epochs
    // while keeping the whole run reproducible.
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[order_rng.uniform_index(i)]);
    }

    for (std::size_t s : order) {
      const PipelineInputOwned& sample = samples[s];
      ModelParams grad = zero_like(result.params);
      ForwardCache cache;
      const LossTerms terms =
          compound_loss(sample, result.params, cfg, &grad, &cache);
      if (!std::isfinite(terms.total())) {
        std::ostringstream msg;
        msg << "train: non-finite loss at epoch " << epoch << ", sample " << s
            << " (L_C=" << terms.classification << ", L_F=" << terms.face
            << ")";
        throw std::runtime_error(msg.str());
      }
      log.loss_classification += terms.classification;
      log.loss_face += terms.face;

      // Per-candidate mean gradient keeps the update scale independent of
      // sample size, matching the stated lr / momentum regime.
      const double scale =
          1.0 / static_cast<double>(sample.candidates.size());
      auto params_blocks = parameter_blocks(result.params);
      auto grad_blocks = parameter_blocks(grad);
      auto vel_blocks = parameter_blocks(velocity);
      for (std::size_t b = 0; b < params_blocks.size(); ++b) {
        if (!params_blocks[b].trainable) continue;
        const Eigen::Index size = params_blocks[b].rows * params_blocks[b].cols;
        Eigen::Map<Eigen::VectorXd> value(params_blocks[b].data, size);
        Eigen::Map<Eigen::VectorXd> g(grad_blocks[b].data, size);
        Eigen::Map<Eigen::VectorXd> v(vel_blocks[b].data, size);
        v = cfg.momentum * v + scale * g;
        value -= lr * v;
      }
      update_running_stats(result.params, cache);
    }

    log.loss_total = log.loss_classification + log.loss_face;
    if (log_stream) {
      (*log_stream) << "epoch " << log.epoch << " lr " << log.lr << " L_C "
                    << log.loss_classification << " L_F " << log.loss_face
                    << " total " << log.loss_total << "\n";
    }
    result.log.push_back(log);
  }
  return result;
}

}  // namespace quadrec
