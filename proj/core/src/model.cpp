#include "quadrec/model.hpp"

#include "quadrec/rng.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace quadrec {

namespace {

Eigen::MatrixXd leaky(const Eigen::MatrixXd& x, double slope) {
  return x.unaryExpr([slope](double v) { return v > 0.0 ? v : slope * v; });
}

Eigen::MatrixXd leaky_grad(const Eigen::MatrixXd& pre, double slope) {
  return pre.unaryExpr([slope](double v) { return v > 0.0 ? 1.0 : slope; });
}

void glorot_init(DenseLayer& layer, Eigen::Index out, Eigen::Index in, Rng& rng) {
  layer.weight.resize(out, in);
  const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
  for (Eigen::Index c = 0; c < in; ++c) {
    for (Eigen::Index r = 0; r < out; ++r) {
      layer.weight(r, c) = rng.uniform(-bound, bound);
    }
  }
  layer.bias = Eigen::VectorXd::Zero(out);
}

void identity_init(NormLayer& norm, Eigen::Index width) {
  norm.gamma = Eigen::VectorXd::Ones(width);
  norm.beta = Eigen::VectorXd::Zero(width);
  norm.running_mean = Eigen::VectorXd::Zero(width);
  norm.running_var = Eigen::VectorXd::Ones(width);
}

Eigen::MatrixXd dense_forward(const DenseLayer& layer, const Eigen::MatrixXd& x) {
  return (layer.weight * x).colwise() + layer.bias;
}

// Normalization forward. Training mode uses batch statistics and records
// them in the cache; inference applies the frozen running statistics.
Eigen::MatrixXd norm_forward(const NormLayer& norm, const Eigen::MatrixXd& x,
                             bool training, NormCache* cache) {
  const double n = static_cast<double>(x.cols());
  Eigen::VectorXd mean, var;
  if (training) {
    mean = x.rowwise().mean();
    var = (x.colwise() - mean).array().square().rowwise().sum() / n;
  } else {
    mean = norm.running_mean;
    var = norm.running_var;
  }
  const Eigen::VectorXd inv_std =
      (var.array() + kNormEpsilon).sqrt().inverse();
  Eigen::MatrixXd xhat =
      ((x.colwise() - mean).array().colwise() * inv_std.array()).matrix();
  Eigen::MatrixXd out =
      ((xhat.array().colwise() * norm.gamma.array()).colwise() +
       norm.beta.array())
          .matrix();
  if (cache) {
    cache->mean = std::move(mean);
    cache->var = std::move(var);
    cache->inv_std = inv_std;
    cache->xhat = std::move(xhat);
  }
  return out;
}

// Gradient through training-mode normalization (batch statistics).
Eigen::MatrixXd norm_backward(const NormLayer& norm, const NormCache& cache,
                              const Eigen::MatrixXd& dout,
                              Eigen::VectorXd& dgamma, Eigen::VectorXd& dbeta) {
  const double n = static_cast<double>(dout.cols());
  dgamma += (dout.array() * cache.xhat.array()).rowwise().sum().matrix();
  dbeta += dout.rowwise().sum();
  const Eigen::MatrixXd dxhat =
      (dout.array().colwise() * norm.gamma.array()).matrix();
  const Eigen::VectorXd mean_dxhat = dxhat.rowwise().sum() / n;
  const Eigen::VectorXd mean_dxhat_xhat =
      (dxhat.array() * cache.xhat.array()).rowwise().sum().matrix() / n;
  Eigen::MatrixXd dx =
      ((dxhat.colwise() - mean_dxhat).array() -
       (cache.xhat.array().colwise() * mean_dxhat_xhat.array()))
          .matrix();
  return (dx.array().colwise() * cache.inv_std.array()).matrix();
}

struct StageSpec {
  const DenseLayer* dense;
  const NormLayer* norm;
  double slope;
  bool residual;
};

Eigen::MatrixXd stage_forward(const StageSpec& spec, const Eigen::MatrixXd& x,
                              bool training, StageCache* cache) {
  Eigen::MatrixXd affine = dense_forward(*spec.dense, x);
  NormCache norm_cache;
  Eigen::MatrixXd preact = norm_forward(*spec.norm, affine, training,
                                        cache ? &norm_cache : nullptr);
  Eigen::MatrixXd out = leaky(preact, spec.slope);
  if (spec.residual) out += x;
  if (cache) {
    cache->input = x;
    cache->preact = std::move(preact);
    cache->norm = std::move(norm_cache);
    cache->output = out;
  }
  return out;
}

// Returns d(loss)/d(stage input); accumulates parameter gradients.
Eigen::MatrixXd stage_backward(const StageSpec& spec, const StageCache& cache,
                               const Eigen::MatrixXd& dout, DenseLayer& ddense,
                               Eigen::VectorXd& dgamma, Eigen::VectorXd& dbeta) {
  const Eigen::MatrixXd dpre =
      (dout.array() * leaky_grad(cache.preact, spec.slope).array()).matrix();
  const Eigen::MatrixXd daffine =
      norm_backward(*spec.norm, cache.norm, dpre, dgamma, dbeta);
  ddense.weight += daffine * cache.input.transpose();
  ddense.bias += daffine.rowwise().sum();
  Eigen::MatrixXd dx = spec.dense->weight.transpose() * daffine;
  if (spec.residual) dx += dout;
  return dx;
}

}  // namespace

std::array<int, kFaceStages + 1> face_stage_inputs(const ModelHyper& hyper) {
  (void)hyper;
  return {kFaceInfoWidth, 128, 128, 128, 256, 512};
}

std::array<int, kClassifierStages + 1> classifier_stage_inputs(
    const ModelHyper& hyper) {
  return {hyper.classifier_input(), 512, 256, 128, 64, 64};
}

ModelParams init_params(const ModelHyper& hyper, std::uint64_t seed) {
  Rng rng(seed);
  ModelParams p;
  p.hyper = hyper;

  glorot_init(p.nb_map, hyper.d_neighbor, 3, rng);
  glorot_init(p.point_l1, hyper.point_hidden, hyper.point_raw_width(), rng);
  glorot_init(p.point_l2, hyper.d_point, hyper.point_hidden, rng);

  const auto face_widths = face_stage_inputs(hyper);
  for (int s = 0; s < kFaceStages; ++s) {
    glorot_init(p.face_stage[static_cast<std::size_t>(s)],
                face_widths[static_cast<std::size_t>(s + 1)],
                face_widths[static_cast<std::size_t>(s)], rng);
    identity_init(p.face_norm[static_cast<std::size_t>(s)],
                  face_widths[static_cast<std::size_t>(s + 1)]);
  }
  glorot_init(p.face_out, hyper.d_face, face_widths[kFaceStages], rng);

  const auto cls_widths = classifier_stage_inputs(hyper);
  for (int s = 0; s < kClassifierStages; ++s) {
    glorot_init(p.cls_stage[static_cast<std::size_t>(s)],
                cls_widths[static_cast<std::size_t>(s + 1)],
                cls_widths[static_cast<std::size_t>(s)], rng);
    identity_init(p.cls_norm[static_cast<std::size_t>(s)],
                  cls_widths[static_cast<std::size_t>(s + 1)]);
  }
  glorot_init(p.cls_out, 2, cls_widths[kClassifierStages], rng);
  return p;
}

ModelParams zero_like(const ModelParams& other) {
  ModelParams z = other;
  std::vector<BlockRef> blocks = parameter_blocks(z);
  for (BlockRef& block : blocks) {
    Eigen::Map<Eigen::VectorXd>(block.data, block.rows * block.cols).setZero();
  }
  return z;
}

std::vector<BlockRef> parameter_blocks(ModelParams& p) {
  std::vector<BlockRef> blocks;
  auto add_dense = [&blocks](const std::string& name, DenseLayer& layer) {
    blocks.push_back({name + ".weight", layer.weight.data(),
                      layer.weight.rows(), layer.weight.cols(), true});
    blocks.push_back({name + ".bias", layer.bias.data(), layer.bias.size(), 1,
                      true});
  };
  auto add_norm = [&blocks](const std::string& name, NormLayer& norm) {
    blocks.push_back({name + ".gamma", norm.gamma.data(), norm.gamma.size(), 1,
                      true});
    blocks.push_back({name + ".beta", norm.beta.data(), norm.beta.size(), 1,
                      true});
    blocks.push_back({name + ".running_mean", norm.running_mean.data(),
                      norm.running_mean.size(), 1, false});
    blocks.push_back({name + ".running_var", norm.running_var.data(),
                      norm.running_var.size(), 1, false});
  };

  add_dense("nb_map", p.nb_map);
  add_dense("point_l1", p.point_l1);
  add_dense("point_l2", p.point_l2);
  for (int s = 0; s < kFaceStages; ++s) {
    const std::string stem = "face_stage" + std::to_string(s);
    add_dense(stem, p.face_stage[static_cast<std::size_t>(s)]);
    add_norm(stem, p.face_norm[static_cast<std::size_t>(s)]);
  }
  add_dense("face_out", p.face_out);
  for (int s = 0; s < kClassifierStages; ++s) {
    const std::string stem = "cls_stage" + std::to_string(s);
    add_dense(stem, p.cls_stage[static_cast<std::size_t>(s)]);
    add_norm(stem, p.cls_norm[static_cast<std::size_t>(s)]);
  }
  add_dense("cls_out", p.cls_out);
  return blocks;
}

Eigen::MatrixXd encode_points(const PointCloud& cloud,
                              const NeighborGraph& graph,
                              const LocalFrames& frames,
                              const ModelParams& params, PointCache* cache) {
  const int n = cloud.size();
  const int k = graph.k;
  const ModelHyper& hyper = params.hyper;
  const int raw_width = hyper.point_raw_width();

  Vec3 centroid = Vec3::Zero();
  for (const Vec3& p : cloud.points) centroid += p;
  if (n > 0) centroid /= static_cast<double>(n);

  Eigen::MatrixXd raw(raw_width, n);
  Eigen::MatrixXd winner_pre(hyper.d_neighbor, n);
  Eigen::MatrixXi argmax(hyper.d_neighbor, n);

  Eigen::MatrixXd offsets(3, k);
  for (int i = 0; i < n; ++i) {
    const Vec3& pi = cloud.points[static_cast<std::size_t>(i)];
    const auto& nbrs = graph.neighbors[static_cast<std::size_t>(i)];
    double spread = 0.0;
    for (int s = 0; s < k; ++s) {
      const Vec3 off =
          cloud.points[static_cast<std::size_t>(nbrs[static_cast<std::size_t>(s)])] - pi;
      offsets.col(s) = off;
      spread += off.squaredNorm();
    }
    if (!(spread > 0.0)) {
      std::ostringstream msg;
      msg << "encode_points: degenerate neighborhood at point " << i;
      throw std::domain_error(msg.str());
    }
    const Eigen::MatrixXd pre =
        (params.nb_map.weight * offsets).colwise() + params.nb_map.bias;
    for (int f = 0; f < hyper.d_neighbor; ++f) {
      int best = 0;
      double best_act = -std::numeric_limits<double>::infinity();
      for (int s = 0; s < k; ++s) {
        const double v = pre(f, s);
        const double act = v > 0.0 ? v : kLeakySlope * v;
        if (act > best_act) {
          best_act = act;
          best = s;
        }
      }
      winner_pre(f, i) = pre(f, best);
      argmax(f, i) = best;
      raw(8 + f, i) = best_act;
    }
    raw.block<3, 1>(0, i) = pi - centroid;
    raw.block<3, 1>(3, i) = frames.normals[static_cast<std::size_t>(i)];
    raw(6, i) = frames.ratio21[static_cast<std::size_t>(i)];
    raw(7, i) = frames.ratio31[static_cast<std::size_t>(i)];
  }

  Eigen::MatrixXd hidden_pre = dense_forward(params.point_l1, raw);
  Eigen::MatrixXd hidden = leaky(hidden_pre, kLeakySlope);
  Eigen::MatrixXd out = dense_forward(params.point_l2, hidden);

  if (cache) {
    cache->raw = std::move(raw);
    cache->nb_winner_pre = std::move(winner_pre);
    cache->nb_argmax = std::move(argmax);
    cache->hidden_pre = std::move(hidden_pre);
    cache->hidden = std::move(hidden);
    cache->out = out;
  }
  return out;
}

Eigen::MatrixXd gather_face_geometry(const Eigen::MatrixXd& point_features,
                                     const std::vector<CandidateFace>& candidates) {
  const Eigen::Index d = point_features.rows();
  Eigen::MatrixXd out(4 * d, static_cast<Eigen::Index>(candidates.size()));
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    for (int r = 0; r < 4; ++r) {
      out.block(r * d, static_cast<Eigen::Index>(i), d, 1) =
          point_features.col(candidates[i].ring[static_cast<std::size_t>(r)]);
    }
  }
  return out;
}

Eigen::MatrixXd encode_faces(const Eigen::MatrixXd& face_info,
                             const ModelParams& params, bool training,
                             std::vector<StageCache>* cache) {
  if (face_info.rows() != kFaceInfoWidth) {
    std::ostringstream msg;
    msg << "encode_faces: input width " << face_info.rows() << ", expected "
        << kFaceInfoWidth;
    throw std::invalid_argument(msg.str());
  }
  if (cache) cache->resize(kFaceStages);
  Eigen::MatrixXd x = face_info;
  for (int s = 0; s < kFaceStages; ++s) {
    const StageSpec spec{&params.face_stage[static_cast<std::size_t>(s)],
                         &params.face_norm[static_cast<std::size_t>(s)],
                         kLeakySlope, s == kFaceResidualStage};
    x = stage_forward(spec, x, training,
                      cache ? &(*cache)[static_cast<std::size_t>(s)] : nullptr);
  }
  return dense_forward(params.face_out, x);
}

namespace {

Eigen::MatrixXd softmax_columns(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd shifted =
      logits.rowwise() - logits.colwise().maxCoeff();
  Eigen::MatrixXd expd = shifted.array().exp().matrix();
  Eigen::RowVectorXd sums = expd.colwise().sum();
  return expd.array().rowwise() / sums.array();
}

}  // namespace

Eigen::MatrixXd classify(const Eigen::MatrixXd& face_geometry,
                         const Eigen::MatrixXd& face_features,
                         const ModelParams& params, bool training,
                         ForwardCache* cache) {
  if (face_geometry.cols() != face_features.cols()) {
    throw std::invalid_argument("classify: row counts differ between inputs");
  }
  const ModelHyper& hyper = params.hyper;
  if (face_geometry.rows() != 4 * hyper.d_point ||
      face_features.rows() != hyper.d_face) {
    throw std::invalid_argument("classify: input widths do not match hyper");
  }
  Eigen::MatrixXd x(hyper.classifier_input(), face_geometry.cols());
  x.topRows(4 * hyper.d_point) = face_geometry;
  x.bottomRows(hyper.d_face) = face_features;
  if (cache) {
    cache->concat = x;
    cache->cls_stages.resize(kClassifierStages);
  }
  for (int s = 0; s < kClassifierStages; ++s) {
    const StageSpec spec{&params.cls_stage[static_cast<std::size_t>(s)],
                         &params.cls_norm[static_cast<std::size_t>(s)], 0.0,
                         false};
    x = stage_forward(
        spec, x, training,
        cache ? &cache->cls_stages[static_cast<std::size_t>(s)] : nullptr);
  }
  Eigen::MatrixXd logits = dense_forward(params.cls_out, x);
  Eigen::MatrixXd probs = softmax_columns(logits);
  if (cache) {
    cache->logits = std::move(logits);
    cache->probs = probs;
  }
  return probs;
}

Eigen::MatrixXd forward_probs(const PipelineInput& input,
                              const ModelParams& params, bool training,
                              ForwardCache* cache) {
  const Eigen::MatrixXd z_points =
      encode_points(*input.cloud, *input.graph, *input.frames, params,
                    cache ? &cache->point : nullptr);
  Eigen::MatrixXd geometry = gather_face_geometry(z_points, *input.candidates);
  Eigen::MatrixXd features;
  if (params.hyper.use_face_encoder) {
    features = encode_faces(input.face_info, params, training,
                            cache ? &cache->face_stages : nullptr);
  } else {
    features = Eigen::MatrixXd::Zero(params.hyper.d_face, input.count());
  }
  if (cache) {
    cache->face_geometry = geometry;
    cache->face_features_out = features;
  }
  return classify(geometry, features, params, training, cache);
}

void backward(const PipelineInput& input, const ModelParams& params,
              const ForwardCache& cache, const Eigen::MatrixXd& dlogits,
              ModelParams& grad) {
  const ModelHyper& hyper = params.hyper;

  // Classifier head and stages.
  const StageCache& last_cls = cache.cls_stages.back();
  grad.cls_out.weight += dlogits * last_cls.output.transpose();
  grad.cls_out.bias += dlogits.rowwise().sum();
  Eigen::MatrixXd dx = params.cls_out.weight.transpose() * dlogits;
  for (int s = kClassifierStages - 1; s >= 0; --s) {
    const StageSpec spec{&params.cls_stage[static_cast<std::size_t>(s)],
                         &params.cls_norm[static_cast<std::size_t>(s)], 0.0,
                         false};
    dx = stage_backward(spec, cache.cls_stages[static_cast<std::size_t>(s)],
                        dx, grad.cls_stage[static_cast<std::size_t>(s)],
                        grad.cls_norm[static_cast<std::size_t>(s)].gamma,
                        grad.cls_norm[static_cast<std::size_t>(s)].beta);
  }

  Eigen::MatrixXd dgeometry = dx.topRows(4 * hyper.d_point);
  if (hyper.use_face_encoder) {
    Eigen::MatrixXd dfeat = dx.bottomRows(hyper.d_face);
    const StageCache& last_face = cache.face_stages.back();
    grad.face_out.weight += dfeat * last_face.output.transpose();
    grad.face_out.bias += dfeat.rowwise().sum();
    Eigen::MatrixXd dface = params.face_out.weight.transpose() * dfeat;
    for (int s = kFaceStages - 1; s >= 0; --s) {
      const StageSpec spec{&params.face_stage[static_cast<std::size_t>(s)],
                           &params.face_norm[static_cast<std::size_t>(s)],
                           kLeakySlope, s == kFaceResidualStage};
      dface = stage_backward(spec, cache.face_stages[static_cast<std::size_t>(s)],
                             dface, grad.face_stage[static_cast<std::size_t>(s)],
                             grad.face_norm[static_cast<std::size_t>(s)].gamma,
                             grad.face_norm[static_cast<std::size_t>(s)].beta);
    }
    // dface is d(loss)/d(face_info): descriptor entries are inputs, not
    // parameters, so the chain ends here.
  }

  // Gather: scatter candidate-slot gradients back onto point features.
  const Eigen::Index d = hyper.d_point;
  Eigen::MatrixXd dz_points =
      Eigen::MatrixXd::Zero(d, cache.point.out.cols());
  const auto& candidates = *input.candidates;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    for (int r = 0; r < 4; ++r) {
      dz_points.col(candidates[i].ring[static_cast<std::size_t>(r)]) +=
          dgeometry.block(r * d, static_cast<Eigen::Index>(i), d, 1);
    }
  }

  // Point encoder two-layer map.
  grad.point_l2.weight += dz_points * cache.point.hidden.transpose();
  grad.point_l2.bias += dz_points.rowwise().sum();
  Eigen::MatrixXd dhidden = params.point_l2.weight.transpose() * dz_points;
  dhidden =
      (dhidden.array() * leaky_grad(cache.point.hidden_pre, kLeakySlope).array())
          .matrix();
  grad.point_l1.weight += dhidden * cache.point.raw.transpose();
  grad.point_l1.bias += dhidden.rowwise().sum();
  const Eigen::MatrixXd draw = params.point_l1.weight.transpose() * dhidden;

  // Neighbor max-pool: the gradient of each pooled feature flows to the
  // winning neighbor's affine input.
  const PointCloud& cloud = *input.cloud;
  const NeighborGraph& graph = *input.graph;
  for (Eigen::Index i = 0; i < draw.cols(); ++i) {
    const auto& nbrs = graph.neighbors[static_cast<std::size_t>(i)];
    const Vec3& pi = cloud.points[static_cast<std::size_t>(i)];
    for (int f = 0; f < hyper.d_neighbor; ++f) {
      const double upstream = draw(8 + f, i);
      if (upstream == 0.0) continue;
      const double pre = cache.point.nb_winner_pre(f, i);
      const double local = upstream * (pre > 0.0 ? 1.0 : kLeakySlope);
      const int slot = cache.point.nb_argmax(f, i);
      const Vec3 off =
          cloud.points[static_cast<std::size_t>(nbrs[static_cast<std::size_t>(slot)])] - pi;
      grad.nb_map.weight.row(f) += local * off.transpose();
      grad.nb_map.bias(f) += local;
    }
  }
}

void update_running_stats(ModelParams& params, const ForwardCache& cache) {
  auto fold = [](NormLayer& norm, const NormCache& batch) {
    norm.running_mean = (1.0 - kRunningStatUpdate) * norm.running_mean +
                        kRunningStatUpdate * batch.mean;
    norm.running_var = (1.0 - kRunningStatUpdate) * norm.running_var +
                       kRunningStatUpdate * batch.var;
  };
  if (params.hyper.use_face_encoder) {
    for (int s = 0; s < kFaceStages; ++s) {
      fold(params.face_norm[static_cast<std::size_t>(s)],
           cache.face_stages[static_cast<std::size_t>(s)].norm);
    }
  }
  for (int s = 0; s < kClassifierStages; ++s) {
    fold(params.cls_norm[static_cast<std::size_t>(s)],
         cache.cls_stages[static_cast<std::size_t>(s)].norm);
  }
}

std::vector<int> hard_labels(const Eigen::MatrixXd& probs) {
  std::vector<int> labels(static_cast<std::size_t>(probs.cols()));
  for (Eigen::Index i = 0; i < probs.cols(); ++i) {
    labels[static_cast<std::size_t>(i)] = probs(1, i) > probs(0, i) ? 1 : 0;
  }
  return labels;
}

QuadMesh assemble_mesh(const PointCloud& cloud,
                       const std::vector<CandidateFace>& candidates,
                       const Eigen::VectorXd& prob_class1, double threshold) {
  if (static_cast<std::size_t>(prob_class1.size()) != candidates.size()) {
    throw std::invalid_argument("assemble_mesh: probability count mismatch");
  }
  std::vector<int> order;
  for (int i = 0; i < static_cast<int>(candidates.size()); ++i) {
    if (prob_class1[i] >= threshold) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return prob_class1[a] > prob_class1[b];
  });

  QuadMesh mesh;
  mesh.vertices = cloud.points;
  std::map<std::array<int, 4>, bool> taken;
  for (int i : order) {
    const CandidateFace& c = candidates[static_cast<std::size_t>(i)];
    auto [it, inserted] = taken.emplace(c.sorted_vertex_set(), true);
    (void)it;
    if (inserted) mesh.faces.push_back(c.ring);
  }
  if (mesh.faces.empty()) {
    std::cerr << "warning: assemble_mesh kept zero candidates at threshold "
              << threshold << "\n";
  }
  return mesh;
}

Eigen::VectorXd predict_prob1(const PointCloud& cloud,
                              const std::vector<CandidateFace>& candidates,
                              const ModelParams& params) {
  const NeighborGraph graph = knn_graph(cloud, params.hyper.k);
  const LocalFrames frames = local_pca_frames(cloud, graph);
  PipelineInput input;
  input.cloud = &cloud;
  input.graph = &graph;
  input.frames = &frames;
  input.candidates = &candidates;
  input.face_info = build_face_info(cloud, candidates);
  apply_finfo_drop(input.face_info, params.hyper.drop);
  const Eigen::MatrixXd probs = forward_probs(input, params, false, nullptr);
  return probs.row(1).transpose();
}

QuadMesh infer_mesh(const PointCloud& cloud,
                    const std::vector<CandidateFace>& candidates,
                    const ModelParams& params, double threshold) {
  if (candidates.empty()) {
    std::cerr << "warning: infer_mesh called with zero candidates\n";
    QuadMesh mesh;
    mesh.vertices = cloud.points;
    return mesh;
  }
  return assemble_mesh(cloud, candidates,
                       predict_prob1(cloud, candidates, params), threshold);
}

}  // namespace quadrec
