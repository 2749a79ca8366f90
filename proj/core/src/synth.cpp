#include "quadrec/synth.hpp"

#include "quadrec/rng.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace quadrec {

namespace {

constexpr double kTau = 2.0 * std::numbers::pi;

[[noreturn]] void bad_resolution(const ShapeSpec& spec, const char* need) {
  std::ostringstream msg;
  msg << "synth_quad_mesh: " << shape_kind_name(spec.kind) << " needs "
      << need << " (got " << spec.res_u << "x" << spec.res_v << ")";
  throw std::invalid_argument(msg.str());
}

QuadMesh make_grid(int nu, int nv, double (*height)(double, double)) {
  QuadMesh mesh;
  mesh.vertices.reserve(static_cast<std::size_t>(nu * nv));
  for (int j = 0; j < nv; ++j) {
    for (int i = 0; i < nu; ++i) {
      const double u = static_cast<double>(i) / static_cast<double>(nu - 1);
      const double v = static_cast<double>(j) / static_cast<double>(nv - 1);
      mesh.vertices.emplace_back(static_cast<double>(i), static_cast<double>(j),
                                 height ? height(u, v) * (nu - 1) : 0.0);
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

double wavy_height(double u, double v) {
  return 0.10 * std::sin(kTau * u) * std::cos(kTau * v);
}

QuadMesh make_cylinder(int segments, int rings) {
  const double radius = static_cast<double>(segments) / kTau;
  QuadMesh mesh;
  for (int j = 0; j < rings; ++j) {
    for (int i = 0; i < segments; ++i) {
      const double theta = kTau * static_cast<double>(i) / segments;
      mesh.vertices.emplace_back(radius * std::cos(theta),
                                 radius * std::sin(theta),
                                 static_cast<double>(j));
    }
  }
  auto vid = [segments](int i, int j) { return j * segments + i % segments; };
  for (int j = 0; j + 1 < rings; ++j) {
    for (int i = 0; i < segments; ++i) {
      mesh.faces.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)});
    }
  }
  return mesh;
}

QuadMesh make_torus(int major, int minor) {
  const double r = static_cast<double>(minor) / kTau;
  const double big_r = 2.0 * r;
  QuadMesh mesh;
  for (int j = 0; j < minor; ++j) {
    for (int i = 0; i < major; ++i) {
      const double theta = kTau * static_cast<double>(i) / major;
      const double phi = kTau * static_cast<double>(j) / minor;
      const double ring = big_r + r * std::cos(phi);
      mesh.vertices.emplace_back(ring * std::cos(theta), ring * std::sin(theta),
                                 r * std::sin(phi));
    }
  }
  auto vid = [major, minor](int i, int j) {
    return (j % minor) * major + i % major;
  };
  for (int j = 0; j < minor; ++j) {
    for (int i = 0; i < major; ++i) {
      mesh.faces.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)});
    }
  }
  return mesh;
}

QuadMesh make_cube_shell(int n) {
  QuadMesh mesh;
  std::map<std::array<int, 3>, int> lattice;
  auto vid = [&](int i, int j, int k) {
    const std::array<int, 3> key{i, j, k};
    auto it = lattice.find(key);
    if (it != lattice.end()) return it->second;
    const int id = static_cast<int>(mesh.vertices.size());
    const double half = static_cast<double>(n) / 2.0;
    mesh.vertices.emplace_back(i - half, j - half, k - half);
    lattice.emplace(key, id);
    return id;
  };
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      // +z / -z
      mesh.faces.push_back({vid(a, b, n), vid(a + 1, b, n), vid(a + 1, b + 1, n), vid(a, b + 1, n)});
      mesh.faces.push_back({vid(a, b, 0), vid(a, b + 1, 0), vid(a + 1, b + 1, 0), vid(a + 1, b, 0)});
      // +x / -x
      mesh.faces.push_back({vid(n, a, b), vid(n, a + 1, b), vid(n, a + 1, b + 1), vid(n, a, b + 1)});
      mesh.faces.push_back({vid(0, a, b), vid(0, a, b + 1), vid(0, a + 1, b + 1), vid(0, a + 1, b)});
      // +y / -y
      mesh.faces.push_back({vid(a, n, b), vid(a, n, b + 1), vid(a + 1, n, b + 1), vid(a + 1, n, b)});
      mesh.faces.push_back({vid(a, 0, b), vid(a + 1, 0, b), vid(a + 1, 0, b + 1), vid(a, 0, b + 1)});
    }
  }
  return mesh;
}

void rescale_to_unit_mean_edge(QuadMesh& mesh) {
  const double mean = mean_edge_length(mesh);
  if (!(mean > 0.0)) return;
  const double s = 1.0 / mean;
  for (Vec3& v : mesh.vertices) v *= s;
}

}  // namespace

ShapeKind parse_shape_kind(const std::string& name) {
  if (name == "plane-grid") return ShapeKind::kPlaneGrid;
  if (name == "cylinder") return ShapeKind::kCylinder;
  if (name == "torus") return ShapeKind::kTorus;
  if (name == "cube-shell") return ShapeKind::kCubeShell;
  if (name == "wavy-grid") return ShapeKind::kWavyGrid;
  throw std::invalid_argument("unknown shape kind '" + name + "'");
}

const char* shape_kind_name(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::kPlaneGrid: return "plane-grid";
    case ShapeKind::kCylinder: return "cylinder";
    case ShapeKind::kTorus: return "torus";
    case ShapeKind::kCubeShell: return "cube-shell";
    case ShapeKind::kWavyGrid: return "wavy-grid";
  }
  return "unknown";
}

double quad_area(const std::array<Vec3, 4>& pts) {
  auto tri = [](const Vec3& a, const Vec3& b, const Vec3& c) {
    return 0.5 * (b - a).cross(c - a).norm();
  };
  const double split02 = tri(pts[0], pts[1], pts[2]) + tri(pts[0], pts[2], pts[3]);
  const double split13 = tri(pts[1], pts[2], pts[3]) + tri(pts[1], pts[3], pts[0]);
  return 0.5 * (split02 + split13);
}

double mean_edge_length(const QuadMesh& mesh) {
  const EdgeStats stats = edge_stats(mesh);
  if (stats.incidence.empty()) return 0.0;
  double total = 0.0;
  for (const auto& [edge, count] : stats.incidence) {
    (void)count;
    total += (mesh.vertices[static_cast<std::size_t>(edge.first)] -
              mesh.vertices[static_cast<std::size_t>(edge.second)])
                 .norm();
  }
  return total / static_cast<double>(stats.incidence.size());
}

QuadMesh synth_quad_mesh(const ShapeSpec& spec) {
  QuadMesh mesh;
  switch (spec.kind) {
    case ShapeKind::kPlaneGrid:
      if (spec.res_u < 2 || spec.res_v < 2) bad_resolution(spec, "res >= 2");
      mesh = make_grid(spec.res_u, spec.res_v, nullptr);
      break;
    case ShapeKind::kWavyGrid:
      if (spec.res_u < 2 || spec.res_v < 2) bad_resolution(spec, "res >= 2");
      mesh = make_grid(spec.res_u, spec.res_v, wavy_height);
      break;
    case ShapeKind::kCylinder:
      if (spec.res_u < 3 || spec.res_v < 2) {
        bad_resolution(spec, "res_u >= 3 and res_v >= 2");
      }
      mesh = make_cylinder(spec.res_u, spec.res_v);
      break;
    case ShapeKind::kTorus:
      if (spec.res_u < 3 || spec.res_v < 3) bad_resolution(spec, "res >= 3");
      mesh = make_torus(spec.res_u, spec.res_v);
      break;
    case ShapeKind::kCubeShell:
      if (spec.res_u < 1) bad_resolution(spec, "res_u >= 1");
      mesh = make_cube_shell(spec.res_u);
      break;
  }
  rescale_to_unit_mean_edge(mesh);
  return mesh;
}

PointCloud inject_noise(const QuadMesh& mesh, const ShapeSpec& spec) {
  if (mesh.vertices.empty()) {
    throw std::invalid_argument("inject_noise: empty mesh");
  }
  PointCloud cloud;
  cloud.points = mesh.vertices;
  cloud.noise_flag.assign(mesh.vertices.size(), false);

  const long n_noise = std::lround(spec.noise_ratio *
                                   static_cast<double>(mesh.vertices.size()));
  if (n_noise <= 0 || mesh.faces.empty()) return cloud;

  std::vector<double> cumulative(mesh.faces.size());
  double total = 0.0;
  for (int f = 0; f < mesh.face_count(); ++f) {
    total += quad_area(mesh.face_points(f));
    cumulative[static_cast<std::size_t>(f)] = total;
  }
  const double amplitude = spec.noise_amplitude * mean_edge_length(mesh);

  Rng rng(spec.seed);
  for (long s = 0; s < n_noise; ++s) {
    const double pick = rng.uniform() * total;
    const auto it = std::lower_bound(cumulative.begin(), cumulative.end(), pick);
    const int f = static_cast<int>(std::min<std::ptrdiff_t>(
        it - cumulative.begin(),
        static_cast<std::ptrdiff_t>(cumulative.size()) - 1));
    const auto pts = mesh.face_points(f);
    const double u = rng.uniform();
    const double v = rng.uniform();
    const Vec3 base = (1.0 - u) * (1.0 - v) * pts[0] + u * (1.0 - v) * pts[1] +
                      u * v * pts[2] + (1.0 - u) * v * pts[3];
    Vec3 normal = Vec3::Zero();
    for (int i = 0; i < 4; ++i) {
      normal += pts[static_cast<std::size_t>(i)].cross(
          pts[static_cast<std::size_t>((i + 1) % 4)]);
    }
    const double norm = normal.norm();
    if (norm > 0.0) normal /= norm;
    const double offset = rng.uniform(-amplitude, amplitude);
    cloud.points.push_back(base + offset * normal);
    cloud.noise_flag.push_back(true);
  }
  return cloud;
}

}  // namespace quadrec
