#pragma once

#include "quadrec/candidates.hpp"
#include "quadrec/face_features.hpp"
#include "quadrec/knn.hpp"
#include "quadrec/mesh.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace quadrec {

inline constexpr double kLeakySlope = 0.01;
inline constexpr double kNormEpsilon = 1e-5;
inline constexpr double kRunningStatUpdate = 0.01;

/// Widths and switches that determine every parameter shape. The
/// classifier consumes 4*d_point + d_face features per candidate.
struct ModelHyper {
  int d_point = 64;
  int d_face = 256;
  int d_neighbor = 64;    // width of the shared neighbor-offset map
  int point_hidden = 128; // hidden width of the point-feature map
  int k = 12;             // neighbors per point expected by the encoder
  bool use_face_encoder = true;
  FInfoDropMask drop;

  int point_raw_width() const { return 8 + d_neighbor; }
  int classifier_input() const { return 4 * d_point + d_face; }
};

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
};

/// Per-feature normalization: batch statistics during training, running
/// statistics frozen at inference.
struct NormLayer {
  Eigen::VectorXd gamma;
  Eigen::VectorXd beta;
  Eigen::VectorXd running_mean;
  Eigen::VectorXd running_var;
};

inline constexpr int kFaceStages = 5;
inline constexpr int kFaceResidualStage = 2;  // identity skip around this stage
inline constexpr int kClassifierStages = 5;

/// All trainable weights. Face encoder stages run
/// 29->128->128->(128 residual)->256->512 with a final affine to d_face;
/// classifier stages run 512->512->256->128->64->64 with a final affine to
/// 2 logits.
struct ModelParams {
  ModelHyper hyper;

  DenseLayer nb_map;              // 3 -> d_neighbor, shared per neighbor
  DenseLayer point_l1;            // raw width -> point_hidden
  DenseLayer point_l2;            // point_hidden -> d_point

  std::array<DenseLayer, kFaceStages> face_stage;
  std::array<NormLayer, kFaceStages> face_norm;
  DenseLayer face_out;            // 512 -> d_face

  std::array<DenseLayer, kClassifierStages> cls_stage;
  std::array<NormLayer, kClassifierStages> cls_norm;
  DenseLayer cls_out;             // 64 -> 2
};

std::array<int, kFaceStages + 1> face_stage_inputs(const ModelHyper& hyper);
std::array<int, kClassifierStages + 1> classifier_stage_inputs(
    const ModelHyper& hyper);

/// Glorot-uniform weights, zero biases, identity norm layers; seeded.
ModelParams init_params(const ModelHyper& hyper, std::uint64_t seed);

/// Same shapes as `other`, every value zero (gradient / momentum buffers).
ModelParams zero_like(const ModelParams& other);

/// Named view over every parameter array, in a fixed order shared by the
/// optimizer, the checkpoint format and the gradient checker.
struct BlockRef {
  std::string name;
  double* data;
  Eigen::Index rows;
  Eigen::Index cols;
  bool trainable;  // running statistics are visited but not trained
};
std::vector<BlockRef> parameter_blocks(ModelParams& params);

// ---------------------------------------------------------------------
// Forward / backward
// ---------------------------------------------------------------------

struct NormCache {
  Eigen::VectorXd mean;
  Eigen::VectorXd var;
  Eigen::VectorXd inv_std;
  Eigen::MatrixXd xhat;
};

struct StageCache {
  Eigen::MatrixXd input;
  Eigen::MatrixXd preact;  // gamma * xhat + beta
  NormCache norm;
  Eigen::MatrixXd output;
};

struct PointCache {
  Eigen::MatrixXd raw;            // raw width x N_P
  Eigen::MatrixXd nb_winner_pre;  // d_neighbor x N_P
  Eigen::MatrixXi nb_argmax;      // d_neighbor x N_P, winning neighbor slot
  Eigen::MatrixXd hidden_pre;
  Eigen::MatrixXd hidden;
  Eigen::MatrixXd out;            // d_point x N_P
};

struct ForwardCache {
  PointCache point;
  Eigen::MatrixXd face_geometry;  // 4*d_point x N_F
  std::vector<StageCache> face_stages;
  Eigen::MatrixXd face_features_out;  // d_face x N_F
  Eigen::MatrixXd concat;             // classifier input x N_F
  std::vector<StageCache> cls_stages;
  Eigen::MatrixXd logits;  // 2 x N_F
  Eigen::MatrixXd probs;   // 2 x N_F
};

/// Per-point features (d_point x N_P): centered coordinates, PCA normal,
/// eigenvalue ratios and a max-pooled learned map of the k neighbor
/// offsets, pushed through a two-layer map. Throws std::domain_error on a
/// degenerate neighborhood.
Eigen::MatrixXd encode_points(const PointCloud& cloud,
                              const NeighborGraph& graph,
                              const LocalFrames& frames,
                              const ModelParams& params,
                              PointCache* cache = nullptr);

/// Row-block concatenation of the 4 ring vertices' point features
/// (4*d_point x N_F).
Eigen::MatrixXd gather_face_geometry(const Eigen::MatrixXd& point_features,
                                     const std::vector<CandidateFace>& candidates);

/// Face-descriptor encoder (d_face x N_F). Input width must be 29.
Eigen::MatrixXd encode_faces(const Eigen::MatrixXd& face_info,
                             const ModelParams& params, bool training,
                             std::vector<StageCache>* cache = nullptr);

/// Fused classifier: concatenated features through the shared stages to a
/// per-candidate probability pair (columns sum to 1).
Eigen::MatrixXd classify(const Eigen::MatrixXd& face_geometry,
                         const Eigen::MatrixXd& face_features,
                         const ModelParams& params, bool training,
                         ForwardCache* cache = nullptr);

/// Everything a forward/backward pass needs, precomputed once per sample.
struct PipelineInput {
  const PointCloud* cloud = nullptr;
  const NeighborGraph* graph = nullptr;
  const LocalFrames* frames = nullptr;
  const std::vector<CandidateFace>* candidates = nullptr;
  Eigen::MatrixXd face_info;  // 29 x N_F, drop mask already applied

  Eigen::Index count() const { return face_info.cols(); }
};

Eigen::MatrixXd forward_probs(const PipelineInput& input,
                              const ModelParams& params, bool training,
                              ForwardCache* cache = nullptr);

/// Accumulates d(loss)/d(parameter) into `grad` for the whole pipeline
/// given d(loss)/d(logits). Requires the cache of a training-mode forward.
void backward(const PipelineInput& input, const ModelParams& params,
              const ForwardCache& cache, const Eigen::MatrixXd& dlogits,
              ModelParams& grad);

/// Folds the batch statistics captured in `cache` into the running
/// statistics (called once per training step).
void update_running_stats(ModelParams& params, const ForwardCache& cache);

std::vector<int> hard_labels(const Eigen::MatrixXd& probs);

/// Keeps candidates with class-1 probability >= threshold, sorts them by
/// probability descending (ties: earlier candidate first), deduplicates by
/// unordered vertex set keeping the most probable ring, and emits the mesh
/// over the cloud's points. Zero survivors yield an empty mesh + warning.
QuadMesh assemble_mesh(const PointCloud& cloud,
                       const std::vector<CandidateFace>& candidates,
                       const Eigen::VectorXd& prob_class1, double threshold);

/// Full inference: builds the k-NN graph and descriptors with the
/// hyperparameters stored in `params` and assembles the predicted mesh.
QuadMesh infer_mesh(const PointCloud& cloud,
                    const std::vector<CandidateFace>& candidates,
                    const ModelParams& params, double threshold = 0.5);

/// Class-1 probability per candidate at inference settings.
Eigen::VectorXd predict_prob1(const PointCloud& cloud,
                              const std::vector<CandidateFace>& candidates,
                              const ModelParams& params);

}  // namespace quadrec
