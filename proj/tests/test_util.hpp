#pragma once

#include "quadrec/mesh.hpp"
#include "quadrec/rng.hpp"

#include <Eigen/Geometry>

#include <array>
#include <cmath>
#include <vector>

namespace quadrec::testing {

inline std::array<Vec3, 4> unit_square() {
  return {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0), Vec3(0, 1, 0)};
}

inline QuadMesh single_quad() {
  QuadMesh mesh;
  mesh.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0), Vec3(0, 1, 0)};
  mesh.faces = {{0, 1, 2, 3}};
  return mesh;
}

/// Axis-aligned unit cube as 6 quads over 8 vertices, outward CCW.
inline QuadMesh cube_mesh() {
  QuadMesh mesh;
  mesh.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0), Vec3(0, 1, 0),
                   Vec3(0, 0, 1), Vec3(1, 0, 1), Vec3(1, 1, 1), Vec3(0, 1, 1)};
  mesh.faces = {
      {0, 3, 2, 1},  // bottom
      {4, 5, 6, 7},  // top
      {0, 1, 5, 4},  // front
      {1, 2, 6, 5},  // right
      {2, 3, 7, 6},  // back
      {3, 0, 4, 7},  // left
  };
  return mesh;
}

/// nu x nv vertex grid in the z=0 plane, unit spacing.
inline QuadMesh grid_mesh(int nu, int nv) {
  QuadMesh mesh;
  for (int j = 0; j < nv; ++j) {
    for (int i = 0; i < nu; ++i) {
      mesh.vertices.emplace_back(i, j, 0.0);
    }
  }
  auto vid = [nu](int i, int j) { return j * nu + i; };
  for (int j = 0; j + 1 < nv; ++j) {
    for (int i = 0; i + 1 < nu; ++i) {
      mesh.faces.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)});
    }
  }
  return mesh;
}

inline Eigen::Matrix3d random_rotation(Rng& rng) {
  const Eigen::Quaterniond q(rng.uniform(-1, 1), rng.uniform(-1, 1),
                             rng.uniform(-1, 1), rng.uniform(-1, 1));
  return q.normalized().toRotationMatrix();
}

inline std::array<Vec3, 4> transformed(const std::array<Vec3, 4>& pts,
                                       const Eigen::Matrix3d& rot,
                                       const Vec3& shift) {
  std::array<Vec3, 4> out;
  for (int i = 0; i < 4; ++i) {
    out[static_cast<std::size_t>(i)] = rot * pts[static_cast<std::size_t>(i)] + shift;
  }
  return out;
}

inline PointCloud random_cloud(int n, Rng& rng, double extent = 10.0) {
  PointCloud cloud;
  for (int i = 0; i < n; ++i) {
    cloud.points.emplace_back(rng.uniform(0, extent), rng.uniform(0, extent),
                              rng.uniform(0, extent));
  }
  return cloud;
}

/// Jittered height-field sample: roughly surface-like so PCA normals and
/// candidate generation behave, but with no exact symmetries.
inline PointCloud random_surface_cloud(int nu, int nv, Rng& rng,
                                       double jitter = 0.15) {
  PointCloud cloud;
  for (int j = 0; j < nv; ++j) {
    for (int i = 0; i < nu; ++i) {
      const double x = i + rng.uniform(-jitter, jitter);
      const double y = j + rng.uniform(-jitter, jitter);
      const double z = 0.3 * std::sin(0.4 * x) * std::cos(0.5 * y) +
                       rng.uniform(-jitter, jitter) * 0.2;
      cloud.points.emplace_back(x, y, z);
    }
  }
  return cloud;
}

}  // namespace quadrec::testing
