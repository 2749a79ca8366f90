#include "quadrec/model.hpp"

#include "quadrec/checkpoint.hpp"
#include "quadrec/dataset.hpp"
#include "quadrec/synth.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <filesystem>
#include <set>

using namespace quadrec;
using namespace quadrec::testing;

namespace {

struct Fixture {
  PointCloud cloud;
  NeighborGraph graph;
  LocalFrames frames;
  std::vector<CandidateFace> candidates;
  ModelParams params;

  explicit Fixture(int nu = 8, int nv = 8, int k = 12, std::uint64_t seed = 5) {
    Rng rng(seed);
    cloud = random_surface_cloud(nu, nv, rng);
    graph = knn_graph(cloud, k);
    frames = local_pca_frames(cloud, graph);
    CandidateConfig config;
    candidates = propose_candidates(cloud, graph, config);
    ModelHyper hyper;
    hyper.k = k;
    params = init_params(hyper, seed);
  }

  PipelineInput input() const {
    PipelineInput in;
    in.cloud = &cloud;
    in.graph = &graph;
    in.frames = &frames;
    in.candidates = &candidates;
    in.face_info = build_face_info(cloud, candidates);
    return in;
  }
};

}  // namespace

TEST_CASE("encode_points: output shape and translation invariance") {
  Fixture fx;
  const Eigen::MatrixXd z = encode_points(fx.cloud, fx.graph, fx.frames, fx.params);
  CHECK(z.rows() == 64);
  CHECK(z.cols() == fx.cloud.size());
  CHECK(z.allFinite());

  PointCloud moved = fx.cloud;
  for (Vec3& p : moved.points) p += Vec3(117.5, -42.25, 3.75);
  const NeighborGraph graph2 = knn_graph(moved, fx.graph.k);
  const LocalFrames frames2 = local_pca_frames(moved, graph2);
  const Eigen::MatrixXd z2 = encode_points(moved, graph2, frames2, fx.params);
  CHECK((z2 - z).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("encode_points: rotated neighborhoods with rotation-aligned weights") {
  Fixture fx;
  const Eigen::MatrixXd base =
      encode_points(fx.cloud, fx.graph, fx.frames, fx.params);

  // Rotate the cloud about z and right-multiply every 3-vector input block
  // of the first layers by R^T; the outputs must coincide.
  const double angle = 0.7;
  Eigen::Matrix3d rot;
  rot = Eigen::AngleAxisd(angle, Vec3::UnitZ());
  PointCloud rotated = fx.cloud;
  for (Vec3& p : rotated.points) p = rot * p;
  const NeighborGraph graph2 = knn_graph(rotated, fx.graph.k);
  const LocalFrames frames2 = local_pca_frames(rotated, graph2);

  ModelParams aligned = fx.params;
  aligned.nb_map.weight = fx.params.nb_map.weight * rot.transpose();
  aligned.point_l1.weight.middleCols(0, 3) =
      fx.params.point_l1.weight.middleCols(0, 3) * rot.transpose();
  aligned.point_l1.weight.middleCols(3, 3) =
      fx.params.point_l1.weight.middleCols(3, 3) * rot.transpose();

  const Eigen::MatrixXd z2 = encode_points(rotated, graph2, frames2, aligned);
  REQUIRE(z2.cols() == base.cols());
  for (Eigen::Index i = 0; i < base.cols(); ++i) {
    CHECK(std::abs(z2.col(i).norm() - base.col(i).norm()) < 1e-8);
  }
  CHECK((z2 - base).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("encode_points: degenerate neighborhood raises") {
  PointCloud cloud;
  for (int i = 0; i < 5; ++i) cloud.points.emplace_back(0, 0, 0);
  cloud.points.emplace_back(1, 0, 0);
  const NeighborGraph graph = knn_graph(cloud, 3);
  LocalFrames frames;
  frames.normals.assign(6, Vec3(0, 0, 1));
  frames.ratio21.assign(6, 0.5);
  frames.ratio31.assign(6, 0.0);
  ModelHyper hyper;
  hyper.k = 3;
  const ModelParams params = init_params(hyper, 1);
  CHECK_THROWS_AS(encode_points(cloud, graph, frames, params),
                  std::domain_error);
}

TEST_CASE("gather_face_geometry: width, permutation, manual concat") {
  Fixture fx;
  const Eigen::MatrixXd z = encode_points(fx.cloud, fx.graph, fx.frames, fx.params);
  const Eigen::MatrixXd geom = gather_face_geometry(z, fx.candidates);
  CHECK(geom.rows() == 4 * 64);
  CHECK(geom.cols() == static_cast<Eigen::Index>(fx.candidates.size()));

  // Single-candidate check against manual concatenation.
  const CandidateFace& c = fx.candidates[3];
  for (int r = 0; r < 4; ++r) {
    CHECK(geom.block(r * 64, 3, 64, 1) ==
          z.col(c.ring[static_cast<std::size_t>(r)]));
  }

  // Permuting candidates permutes columns identically.
  std::vector<CandidateFace> reversed(fx.candidates.rbegin(), fx.candidates.rend());
  const Eigen::MatrixXd geom_rev = gather_face_geometry(z, reversed);
  CHECK(geom_rev.col(0) == geom.col(geom.cols() - 1));
}

TEST_CASE("encode_faces: shape, zero input behavior, width checks") {
  Fixture fx;
  const Eigen::MatrixXd info = build_face_info(fx.cloud, fx.candidates);
  const Eigen::MatrixXd features = encode_faces(info, fx.params, false);
  CHECK(features.rows() == 256);
  CHECK(features.cols() == info.cols());
  CHECK(features.allFinite());

  Eigen::MatrixXd wrong(28, 3);
  CHECK_THROWS_AS(encode_faces(wrong, fx.params, false), std::invalid_argument);
}

TEST_CASE("classify: probabilities normalized, shared weights") {
  Fixture fx;
  const PipelineInput input = fx.input();
  const Eigen::MatrixXd probs = forward_probs(input, fx.params, false);
  CHECK(probs.rows() == 2);
  CHECK(probs.cols() == static_cast<Eigen::Index>(fx.candidates.size()));
  for (Eigen::Index i = 0; i < probs.cols(); ++i) {
    CHECK(std::abs(probs(0, i) + probs(1, i) - 1.0) < 1e-9);
    CHECK(probs(0, i) > 0.0);
    CHECK(probs(1, i) < 1.0);
  }

  // Identical input rows produce identical outputs.
  Eigen::MatrixXd geometry(4 * 64, 2);
  Eigen::MatrixXd features(256, 2);
  geometry.col(0).setConstant(0.3);
  geometry.col(1).setConstant(0.3);
  features.col(0).setConstant(-0.2);
  features.col(1).setConstant(-0.2);
  const Eigen::MatrixXd pair = classify(geometry, features, fx.params, false);
  CHECK(pair.col(0) == pair.col(1));

  Eigen::MatrixXd bad_geometry(3, 2);
  Eigen::MatrixXd bad_features(256, 2);
  CHECK_THROWS_AS(classify(bad_geometry, bad_features, fx.params, false),
                  std::invalid_argument);
}

TEST_CASE("forward: translation invariance of predictions") {
  Fixture fx;
  const PipelineInput input = fx.input();
  const Eigen::MatrixXd probs = forward_probs(input, fx.params, false);

  PointCloud moved = fx.cloud;
  for (Vec3& p : moved.points) p += Vec3(-31.0, 8.5, 77.0);
  const NeighborGraph graph2 = knn_graph(moved, fx.graph.k);
  const LocalFrames frames2 = local_pca_frames(moved, graph2);
  PipelineInput input2;
  input2.cloud = &moved;
  input2.graph = &graph2;
  input2.frames = &frames2;
  input2.candidates = &fx.candidates;
  input2.face_info = build_face_info(moved, fx.candidates);
  const Eigen::MatrixXd probs2 = forward_probs(input2, fx.params, false);
  CHECK((probs2 - probs).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("no-face-encoder ablation zeroes the face block but still works") {
  Fixture fx;
  ModelHyper hyper = fx.params.hyper;
  hyper.use_face_encoder = false;
  const ModelParams ablated = init_params(hyper, 5);
  PipelineInput input = fx.input();
  ForwardCache cache;
  const Eigen::MatrixXd probs = forward_probs(input, ablated, false, &cache);
  CHECK(probs.allFinite());
  CHECK(cache.face_features_out.isZero());
}

TEST_CASE("hard_labels and assemble_mesh") {
  PointCloud cloud;
  cloud.points = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0), Vec3(0, 1, 0),
                  Vec3(2, 0, 0), Vec3(2, 1, 0)};
  std::vector<CandidateFace> candidates;
  CandidateFace a;
  a.center = 0;
  a.ring = {0, 1, 2, 3};
  CandidateFace b = a;  // duplicate of the same quad from another center
  b.center = 1;
  b.ring = {1, 2, 3, 0};
  CandidateFace c;
  c.center = 1;
  c.ring = {1, 4, 5, 2};
  candidates = {a, b, c};

  Eigen::VectorXd prob(3);
  prob << 0.7, 0.9, 0.4;
  const QuadMesh mesh = assemble_mesh(cloud, candidates, prob, 0.5);
  REQUIRE(mesh.face_count() == 1);  // c below threshold, a/b deduplicated
  CHECK(mesh.faces[0] == b.ring);   // the more probable ring is kept
  CHECK(mesh.vertex_count() == cloud.size());

  const QuadMesh empty = assemble_mesh(cloud, candidates, prob, 1.0 + 1e-9);
  CHECK(empty.face_count() == 0);
  CHECK(empty.vertex_count() == cloud.size());
}

TEST_CASE("label oracle through assemble_mesh reproduces the grid") {
  ShapeSpec spec;
  spec.kind = ShapeKind::kPlaneGrid;
  spec.res_u = 6;
  spec.res_v = 6;
  spec.noise_ratio = 0.0;
  const LabeledSample sample = make_sample(spec, {}, 12);
  Eigen::VectorXd prob(static_cast<Eigen::Index>(sample.labels.size()));
  for (std::size_t i = 0; i < sample.labels.size(); ++i) {
    prob[static_cast<Eigen::Index>(i)] = sample.labels[i];
  }
  const QuadMesh mesh = assemble_mesh(sample.cloud, sample.candidates, prob, 0.5);
  std::set<std::array<int, 4>> got, want;
  for (auto f : mesh.faces) {
    std::sort(f.begin(), f.end());
    got.insert(f);
  }
  for (auto f : sample.reference.faces) {
    std::sort(f.begin(), f.end());
    want.insert(f);
  }
  CHECK(got == want);
}

TEST_CASE("checkpoint: bit-exact round trip and error paths") {
  ModelHyper hyper;
  hyper.drop.sines = true;
  hyper.use_face_encoder = true;
  ModelParams params = init_params(hyper, 99);
  // Touch running stats so non-default values round-trip too.
  params.cls_norm[0].running_mean.setConstant(0.25);
  params.face_norm[2].running_var.setConstant(3.5);

  const std::string path =
      (std::filesystem::temp_directory_path() / "quadrec_ckpt.bin").string();
  save_checkpoint(path, params);
  ModelParams back = load_checkpoint(path);
  CHECK(back.hyper.drop.sines);
  CHECK(back.hyper.d_point == hyper.d_point);
  CHECK(back.hyper.k == hyper.k);

  auto blocks_a = parameter_blocks(params);
  auto blocks_b = parameter_blocks(back);
  REQUIRE(blocks_a.size() == blocks_b.size());
  for (std::size_t i = 0; i < blocks_a.size(); ++i) {
    CHECK(blocks_a[i].name == blocks_b[i].name);
    const Eigen::Index n = blocks_a[i].rows * blocks_a[i].cols;
    CHECK(Eigen::Map<Eigen::VectorXd>(blocks_a[i].data, n) ==
          Eigen::Map<Eigen::VectorXd>(blocks_b[i].data, n));
  }
  std::filesystem::remove(path);

  CHECK_THROWS_AS(load_checkpoint("/nonexistent/model.ckpt"),
                  std::runtime_error);
}

TEST_CASE("predict and infer_mesh run end to end on random params") {
  Fixture fx(7, 7);
  const Eigen::VectorXd prob = predict_prob1(fx.cloud, fx.candidates, fx.params);
  CHECK(prob.size() == static_cast<Eigen::Index>(fx.candidates.size()));
  CHECK(prob.minCoeff() >= 0.0);
  CHECK(prob.maxCoeff() <= 1.0);
  const QuadMesh mesh = infer_mesh(fx.cloud, fx.candidates, fx.params, 0.5);
  CHECK(mesh.vertex_count() == fx.cloud.size());
}
