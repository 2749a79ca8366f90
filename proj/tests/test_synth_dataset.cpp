#include "quadrec/dataset.hpp"

#include "quadrec/mesh_io.hpp"
#include "quadrec/synth.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <map>
#include <set>

using namespace quadrec;
using namespace quadrec::testing;

TEST_CASE("synth: 5x5 plane grid counts") {
  ShapeSpec spec;
  spec.kind = ShapeKind::kPlaneGrid;
  spec.res_u = 5;
  spec.res_v = 5;
  const QuadMesh mesh = synth_quad_mesh(spec);
  CHECK(mesh.vertex_count() == 25);
  CHECK(mesh.face_count() == 16);
  const EdgeStats stats = edge_stats(mesh);
  CHECK(stats.e1 == 16);
  CHECK(stats.e_all == 40);
}

TEST_CASE("synth: torus 8x8 is closed") {
  ShapeSpec spec;
  spec.kind = ShapeKind::kTorus;
  spec.res_u = 8;
  spec.res_v = 8;
  const QuadMesh mesh = synth_quad_mesh(spec);
  CHECK(mesh.vertex_count() == 64);
  CHECK(mesh.face_count() == 64);
  validate_mesh(mesh);
  const auto scores = manifold_watertight_scores(edge_stats(mesh));
  CHECK(scores.watertightness == doctest::Approx(1.0));
  CHECK(scores.manifoldness == doctest::Approx(1.0));
}

TEST_CASE("synth: cube shell satisfies the Euler check") {
  ShapeSpec spec;
  spec.kind = ShapeKind::kCubeShell;
  spec.res_u = 3;
  const QuadMesh mesh = synth_quad_mesh(spec);
  validate_mesh(mesh);
  const EdgeStats stats = edge_stats(mesh);
  const long euler = mesh.vertex_count() - stats.e_all + mesh.face_count();
  CHECK(euler == 2);
  const auto scores = manifold_watertight_scores(stats);
  CHECK(scores.watertightness == doctest::Approx(1.0));
}

TEST_CASE("synth: cylinder is a tube with two open rims") {
  ShapeSpec spec;
  spec.kind = ShapeKind::kCylinder;
  spec.res_u = 10;
  spec.res_v = 4;
  const QuadMesh mesh = synth_quad_mesh(spec);
  CHECK(mesh.vertex_count() == 40);
  CHECK(mesh.face_count() == 30);
  const EdgeStats stats = edge_stats(mesh);
  CHECK(stats.e1 == 20);  // two rims of 10 edges
  const auto scores = manifold_watertight_scores(stats);
  CHECK(scores.manifoldness == doctest::Approx(1.0));
  CHECK(scores.watertightness < 1.0);
}

TEST_CASE("synth: meshes are rescaled to unit mean edge length") {
  for (ShapeKind kind : {ShapeKind::kPlaneGrid, ShapeKind::kCylinder,
                         ShapeKind::kTorus, ShapeKind::kCubeShell,
                         ShapeKind::kWavyGrid}) {
    ShapeSpec spec;
    spec.kind = kind;
    spec.res_u = kind == ShapeKind::kCubeShell ? 4 : 12;
    spec.res_v = 8;
    const QuadMesh mesh = synth_quad_mesh(spec);
    CHECK(mean_edge_length(mesh) == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("synth: invalid resolutions are rejected") {
  ShapeSpec spec;
  spec.kind = ShapeKind::kTorus;
  spec.res_u = 2;
  spec.res_v = 2;
  CHECK_THROWS_AS(synth_quad_mesh(spec), std::invalid_argument);
  spec.kind = ShapeKind::kPlaneGrid;
  spec.res_u = 1;
  CHECK_THROWS_AS(synth_quad_mesh(spec), std::invalid_argument);
}

TEST_CASE("shape kind names round trip") {
  for (ShapeKind kind : {ShapeKind::kPlaneGrid, ShapeKind::kCylinder,
                         ShapeKind::kTorus, ShapeKind::kCubeShell,
                         ShapeKind::kWavyGrid}) {
    CHECK(parse_shape_kind(shape_kind_name(kind)) == kind);
  }
  CHECK_THROWS_AS(parse_shape_kind("dodecahedron"), std::invalid_argument);
}

TEST_CASE("inject_noise: zero ratio returns exactly the vertex set") {
  ShapeSpec spec;
  spec.kind = ShapeKind::kPlaneGrid;
  spec.res_u = 6;
  spec.res_v = 6;
  spec.noise_ratio = 0.0;
  const QuadMesh mesh = synth_quad_mesh(spec);
  const PointCloud cloud = inject_noise(mesh, spec);
  REQUIRE(cloud.size() == mesh.vertex_count());
  for (int i = 0; i < cloud.size(); ++i) {
    CHECK(cloud.points[static_cast<std::size_t>(i)] ==
          mesh.vertices[static_cast<std::size_t>(i)]);
    CHECK_FALSE(cloud.is_noise(i));
  }
}

TEST_CASE("inject_noise: 10 percent of 100 vertices means 10 flagged points") {
  ShapeSpec spec;
  spec.kind = ShapeKind::kPlaneGrid;
  spec.res_u = 10;
  spec.res_v = 10;
  spec.noise_ratio = 0.10;
  spec.seed = 4;
  const QuadMesh mesh = synth_quad_mesh(spec);
  REQUIRE(mesh.vertex_count() == 100);
  const PointCloud cloud = inject_noise(mesh, spec);
  CHECK(cloud.size() == 110);
  int flagged = 0;
  for (int i = 0; i < cloud.size(); ++i) flagged += cloud.is_noise(i) ? 1 : 0;
  CHECK(flagged == 10);
}

TEST_CASE("inject_noise: flat grid offsets stay within the amplitude") {
  ShapeSpec spec;
  spec.kind = ShapeKind::kPlaneGrid;
  spec.res_u = 8;
  spec.res_v = 8;
  spec.noise_ratio = 0.2;
  spec.noise_amplitude = 0.3;
  spec.seed = 9;
  const QuadMesh mesh = synth_quad_mesh(spec);
  const double amplitude = spec.noise_amplitude * mean_edge_length(mesh);
  const PointCloud cloud = inject_noise(mesh, spec);
  int noise_seen = 0;
  for (int i = 0; i < cloud.size(); ++i) {
    if (!cloud.is_noise(i)) continue;
    ++noise_seen;
    // The grid lies in z = 0, so the normal offset is the z coordinate.
    CHECK(std::abs(cloud.points[static_cast<std::size_t>(i)].z()) <=
          amplitude + 1e-12);
  }
  CHECK(noise_seen > 0);
}

TEST_CASE("inject_noise: deterministic given the seed") {
  ShapeSpec spec;
  spec.kind = ShapeKind::kWavyGrid;
  spec.res_u = 9;
  spec.res_v = 9;
  spec.seed = 123;
  const QuadMesh mesh = synth_quad_mesh(spec);
  const PointCloud a = inject_noise(mesh, spec);
  const PointCloud b = inject_noise(mesh, spec);
  REQUIRE(a.size() == b.size());
  for (int i = 0; i < a.size(); ++i) {
    CHECK(a.points[static_cast<std::size_t>(i)] ==
          b.points[static_cast<std::size_t>(i)]);
  }
}

TEST_CASE("label_candidates: unordered-set semantics") {
  const QuadMesh grid = grid_mesh(3, 3);
  std::vector<CandidateFace> candidates;
  CandidateFace rotated;  // reference face {0,1,4,3} with ring rotated by 2
  rotated.center = 4;
  rotated.ring = {4, 3, 0, 1};
  candidates.push_back(rotated);
  CandidateFace three_of_four;
  three_of_four.center = 0;
  three_of_four.ring = {0, 1, 4, 6};
  candidates.push_back(three_of_four);
  const auto labels = label_candidates(candidates, grid);
  CHECK(labels == std::vector<int>{1, 0});
}

TEST_CASE("label_candidates: grid positives match the incidence oracle") {
  ShapeSpec spec;
  spec.kind = ShapeKind::kPlaneGrid;
  spec.res_u = 7;
  spec.res_v = 7;
  spec.noise_ratio = 0.0;
  const QuadMesh mesh = synth_quad_mesh(spec);
  const PointCloud cloud = inject_noise(mesh, spec);
  const NeighborGraph graph = knn_graph(cloud, 12);
  const auto candidates = propose_candidates(cloud, graph, {});
  const auto labels = label_candidates(candidates, mesh);

  std::map<int, int> positives_per_center;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (labels[i]) ++positives_per_center[candidates[i].center];
  }
  std::map<int, int> incident;
  for (const auto& face : mesh.faces) {
    for (int v : face) ++incident[v];
  }
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    CHECK(positives_per_center[v] == incident[v]);
  }
}

TEST_CASE("label_candidates: noise points never appear in positives") {
  ShapeSpec spec;
  spec.kind = ShapeKind::kWavyGrid;
  spec.res_u = 9;
  spec.res_v = 9;
  spec.noise_ratio = 0.15;
  spec.seed = 77;
  const QuadMesh mesh = synth_quad_mesh(spec);
  const PointCloud cloud = inject_noise(mesh, spec);
  const NeighborGraph graph = knn_graph(cloud, 12);
  const auto candidates = propose_candidates(cloud, graph, {});
  const auto labels = label_candidates(candidates, mesh);
  int positives = 0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (!labels[i]) continue;
    ++positives;
    for (int v : candidates[i].ring) {
      CHECK_FALSE(cloud.is_noise(v));
    }
  }
  CHECK(positives > 0);
}

TEST_CASE("class_weight") {
  std::vector<int> labels(100, 0);
  for (int i = 0; i < 10; ++i) labels[static_cast<std::size_t>(i)] = 1;
  CHECK(class_weight(labels) == doctest::Approx(9.9));
  std::vector<int> balanced(10, 0);
  for (int i = 0; i < 5; ++i) balanced[static_cast<std::size_t>(i)] = 1;
  CHECK(class_weight(balanced) == doctest::Approx(1.1));
  CHECK(class_weight(balanced, 2.0) == doctest::Approx(2.0));
  const std::vector<int> empty_pos(10, 0);
  CHECK_THROWS_AS(class_weight(empty_pos), std::invalid_argument);
}

TEST_CASE("bundle save/load round trip is identity") {
  ShapeSpec spec;
  spec.kind = ShapeKind::kCylinder;
  spec.res_u = 10;
  spec.res_v = 5;
  spec.noise_ratio = 0.1;
  spec.seed = 31;
  const LabeledSample sample = make_sample(spec, {}, 12);
  REQUIRE(!sample.candidates.empty());

  BundleMeta meta = meta_for_spec(spec);
  meta.n_points = sample.cloud.size();
  meta.k = 12;
  meta.n_candidates = static_cast<int>(sample.candidates.size());

  const std::string dir =
      (std::filesystem::temp_directory_path() / "quadrec_bundle").string();
  save_bundle(dir, sample, meta);
  const LabeledSample back = load_bundle(dir);
  const BundleMeta meta_back = load_meta(dir);

  REQUIRE(back.cloud.size() == sample.cloud.size());
  for (int i = 0; i < back.cloud.size(); ++i) {
    CHECK(back.cloud.points[static_cast<std::size_t>(i)] ==
          sample.cloud.points[static_cast<std::size_t>(i)]);
    CHECK(back.cloud.is_noise(i) == sample.cloud.is_noise(i));
  }
  CHECK(back.reference.faces == sample.reference.faces);
  CHECK(back.labels == sample.labels);
  REQUIRE(back.candidates.size() == sample.candidates.size());
  for (std::size_t i = 0; i < back.candidates.size(); ++i) {
    CHECK(back.candidates[i].ring == sample.candidates[i].ring);
    CHECK(back.candidates[i].quality == sample.candidates[i].quality);
  }
  CHECK(meta_back.kind == meta.kind);
  CHECK(meta_back.seed == meta.seed);
  CHECK(meta_back.n_candidates == meta.n_candidates);
  std::filesystem::remove_all(dir);
}
