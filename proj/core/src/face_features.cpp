#include "quadrec/face_features.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace quadrec {

namespace {

struct CornerGeometry {
  std::array<Vec3, 4> edges;
  std::array<double, 4> lengths;
  std::array<Vec3, 4> crosses;  // incoming x outgoing at each corner
};

CornerGeometry corner_geometry(const std::array<Vec3, 4>& pts) {
  CornerGeometry g;
  for (int i = 0; i < 4; ++i) {
    g.edges[static_cast<std::size_t>(i)] =
        pts[static_cast<std::size_t>((i + 1) % 4)] - pts[static_cast<std::size_t>(i)];
    g.lengths[static_cast<std::size_t>(i)] = g.edges[static_cast<std::size_t>(i)].norm();
    if (!(g.lengths[static_cast<std::size_t>(i)] > 0.0)) {
      throw std::domain_error("degenerate face: zero-length edge");
    }
  }
  for (int i = 0; i < 4; ++i) {
    g.crosses[static_cast<std::size_t>(i)] =
        g.edges[static_cast<std::size_t>((i + 3) % 4)].cross(
            g.edges[static_cast<std::size_t>(i)]);
  }
  return g;
}

// Orientation-bearing polygon normal (Newell); translation invariant for
// closed rings.
Vec3 ring_normal(const std::array<Vec3, 4>& pts) {
  Vec3 n = Vec3::Zero();
  for (int i = 0; i < 4; ++i) {
    n += pts[static_cast<std::size_t>(i)].cross(
        pts[static_cast<std::size_t>((i + 1) % 4)]);
  }
  return n;
}

// Unit best-fit-plane normal, sign-aligned with the ring's traversal.
Vec3 best_fit_normal(const std::array<Vec3, 4>& pts) {
  Vec3 centroid = Vec3::Zero();
  for (const Vec3& p : pts) centroid += p;
  centroid *= 0.25;
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const Vec3& p : pts) {
    const Vec3 d = p - centroid;
    cov += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
  Vec3 n = solver.eigenvectors().col(0);
  const Vec3 oriented = ring_normal(pts);
  const double agreement = n.dot(oriented);
  if (agreement < 0.0) n = -n;
  if (agreement == 0.0 && oriented.norm() > 0.0) n = oriented.normalized();
  return n;
}

}  // namespace

double scaled_jacobian(const std::array<Vec3, 4>& face_points) {
  const CornerGeometry g = corner_geometry(face_points);
  const Vec3 n = best_fit_normal(face_points);
  double min_value = 2.0;
  for (int i = 0; i < 4; ++i) {
    const Vec3& cross = g.crosses[static_cast<std::size_t>(i)];
    const double area = cross.norm();
    const double signed_area = cross.dot(n) < 0.0 ? -area : area;
    const double denom = g.lengths[static_cast<std::size_t>((i + 3) % 4)] *
                         g.lengths[static_cast<std::size_t>(i)];
    min_value = std::min(min_value, signed_area / denom);
  }
  return std::clamp(min_value, -1.0, 1.0);
}

std::array<double, 4> corner_sines(const std::array<Vec3, 4>& face_points) {
  const CornerGeometry g = corner_geometry(face_points);
  std::array<double, 4> sines{};
  for (int i = 0; i < 4; ++i) {
    const double denom = g.lengths[static_cast<std::size_t>((i + 3) % 4)] *
                         g.lengths[static_cast<std::size_t>(i)];
    sines[static_cast<std::size_t>(i)] =
        std::min(1.0, g.crosses[static_cast<std::size_t>(i)].norm() / denom);
  }
  return sines;
}

Vec3 cloud_centroid(const PointCloud& cloud) {
  if (cloud.points.empty()) return Vec3::Zero();
  Vec3 c = Vec3::Zero();
  for (const Vec3& p : cloud.points) c += p;
  return c / static_cast<double>(cloud.points.size());
}

namespace {

FaceInfo face_info_row_centered(const PointCloud& cloud,
                                const CandidateFace& face,
                                const Vec3& centroid) {
  std::array<Vec3, 4> pts;
  for (int i = 0; i < 4; ++i) {
    pts[static_cast<std::size_t>(i)] =
        cloud.points[static_cast<std::size_t>(face.ring[static_cast<std::size_t>(i)])];
  }
  FaceInfo row{};
  for (int i = 0; i < 4; ++i) {
    const Vec3 centered = pts[static_cast<std::size_t>(i)] - centroid;
    row[static_cast<std::size_t>(kFInfoCoordsOffset + 3 * i + 0)] = centered.x();
    row[static_cast<std::size_t>(kFInfoCoordsOffset + 3 * i + 1)] = centered.y();
    row[static_cast<std::size_t>(kFInfoCoordsOffset + 3 * i + 2)] = centered.z();
  }
  row[kFInfoJacobianOffset] = scaled_jacobian(pts);
  const auto sines = corner_sines(pts);
  for (int i = 0; i < 4; ++i) {
    row[static_cast<std::size_t>(kFInfoSinesOffset + i)] = sines[static_cast<std::size_t>(i)];
  }
  for (int i = 0; i < 4; ++i) {
    const Vec3 n = corner_normal(pts, i);
    row[static_cast<std::size_t>(kFInfoNormalsOffset + 3 * i + 0)] = n.x();
    row[static_cast<std::size_t>(kFInfoNormalsOffset + 3 * i + 1)] = n.y();
    row[static_cast<std::size_t>(kFInfoNormalsOffset + 3 * i + 2)] = n.z();
  }
  return row;
}

}  // namespace

FaceInfo face_info_row(const PointCloud& cloud, const CandidateFace& face) {
  return face_info_row_centered(cloud, face, cloud_centroid(cloud));
}

Eigen::MatrixXd build_face_info(const PointCloud& cloud,
                                const std::vector<CandidateFace>& candidates) {
  const Vec3 centroid = cloud_centroid(cloud);
  Eigen::MatrixXd m(kFaceInfoWidth, static_cast<Eigen::Index>(candidates.size()));
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const FaceInfo row = face_info_row_centered(cloud, candidates[i], centroid);
    for (int j = 0; j < kFaceInfoWidth; ++j) {
      m(j, static_cast<Eigen::Index>(i)) = row[static_cast<std::size_t>(j)];
    }
  }
  return m;
}

void apply_finfo_drop(Eigen::MatrixXd& face_info, const FInfoDropMask& mask) {
  if (face_info.rows() != kFaceInfoWidth) {
    throw std::invalid_argument("apply_finfo_drop: matrix width is not 29");
  }
  if (mask.coords) face_info.middleRows(kFInfoCoordsOffset, 12).setZero();
  if (mask.jacobian) face_info.middleRows(kFInfoJacobianOffset, 1).setZero();
  if (mask.sines) face_info.middleRows(kFInfoSinesOffset, 4).setZero();
  if (mask.normals) face_info.middleRows(kFInfoNormalsOffset, 12).setZero();
}

namespace {
constexpr char kFaceInfoMagic[8] = {'Q', 'R', 'F', 'I', 'N', 'F', 'O', '1'};
}

void write_face_info(const std::string& path, const Eigen::MatrixXd& face_info) {
  if (face_info.rows() != kFaceInfoWidth) {
    throw std::invalid_argument("write_face_info: matrix width is not 29");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.write(kFaceInfoMagic, sizeof(kFaceInfoMagic));
  const std::uint64_t rows = static_cast<std::uint64_t>(face_info.cols());
  const std::uint64_t width = kFaceInfoWidth;
  out.write(reinterpret_cast<const char*>(&rows), sizeof(rows));
  out.write(reinterpret_cast<const char*>(&width), sizeof(width));
  for (Eigen::Index i = 0; i < face_info.cols(); ++i) {
    for (int j = 0; j < kFaceInfoWidth; ++j) {
      const double v = face_info(j, i);
      out.write(reinterpret_cast<const char*>(&v), sizeof(v));
    }
  }
  if (!out) throw std::runtime_error("failed while writing " + path);
}

Eigen::MatrixXd read_face_info(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path + " for reading");
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kFaceInfoMagic, sizeof(magic)) != 0) {
    throw std::runtime_error(path + ": bad face-info magic");
  }
  std::uint64_t rows = 0, width = 0;
  in.read(reinterpret_cast<char*>(&rows), sizeof(rows));
  in.read(reinterpret_cast<char*>(&width), sizeof(width));
  if (!in || width != kFaceInfoWidth) {
    throw std::runtime_error(path + ": unexpected face-info width");
  }
  Eigen::MatrixXd m(kFaceInfoWidth, static_cast<Eigen::Index>(rows));
  for (std::uint64_t i = 0; i < rows; ++i) {
    for (int j = 0; j < kFaceInfoWidth; ++j) {
      double v;
      in.read(reinterpret_cast<char*>(&v), sizeof(v));
      if (!in) throw std::runtime_error(path + ": truncated face-info data");
      m(j, static_cast<Eigen::Index>(i)) = v;
    }
  }
  return m;
}

}  // namespace quadrec
