#pragma once

#include "quadrec/mesh.hpp"

#include <cstdint>
#include <string>

namespace quadrec {

enum class ShapeKind {
  kPlaneGrid,
  kCylinder,
  kTorus,
  kCubeShell,
  kWavyGrid,
};

ShapeKind parse_shape_kind(const std::string& name);
const char* shape_kind_name(ShapeKind kind);

/// Recipe for one synthetic sample. Resolution semantics per kind:
/// plane-grid / wavy-grid: vertices per side (res_u x res_v grid);
/// cylinder: res_u segments around, res_v rings along the axis (open rims);
/// torus: res_u major segments, res_v minor segments (closed);
/// cube-shell: res_u quads per cube edge (res_v ignored).
/// Meshes are rescaled to unit mean edge length so shapes of every kind
/// share one sampling density.
struct ShapeSpec {
  ShapeKind kind = ShapeKind::kPlaneGrid;
  int res_u = 8;
  int res_v = 8;
  double noise_ratio = 0.10;
  double noise_amplitude = 0.3;  // fraction of mean edge length
  std::uint64_t seed = 0;
};

/// Deterministic structured quad mesh for the spec'd kind. Throws
/// std::invalid_argument for resolutions below the kind's minimum.
QuadMesh synth_quad_mesh(const ShapeSpec& spec);

/// Mesh vertices (noise_flag false) plus round(noise_ratio * V) noise
/// points appended after them: a face is drawn with probability
/// proportional to its area, a point bilinearly interpolated inside it,
/// then offset along the face normal by a uniform scalar in [-A, +A] with
/// A = noise_amplitude * mean edge length. Deterministic given spec.seed.
PointCloud inject_noise(const QuadMesh& mesh, const ShapeSpec& spec);

/// Area of a quad face as the mean of its two triangulations (exact for
/// planar quads).
double quad_area(const std::array<Vec3, 4>& pts);

double mean_edge_length(const QuadMesh& mesh);

}  // namespace quadrec
