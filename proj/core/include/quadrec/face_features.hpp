#pragma once

#include "quadrec/candidates.hpp"
#include "quadrec/mesh.hpp"

#include <Eigen/Core>

#include <array>
#include <string>
#include <vector>

namespace quadrec {

inline constexpr int kFaceInfoWidth = 29;

/// One descriptor row: 12 vertex coordinates (ring order, centered by the
/// cloud centroid), the scaled Jacobian, 4 corner sines, and 12 components
/// of the 4 unit corner normals.
using FaceInfo = std::array<double, kFaceInfoWidth>;

inline constexpr int kFInfoCoordsOffset = 0;
inline constexpr int kFInfoJacobianOffset = 12;
inline constexpr int kFInfoSinesOffset = 13;
inline constexpr int kFInfoNormalsOffset = 17;

/// Minimum over corners of the signed parallelogram area of the two
/// adjacent edges divided by the product of their lengths; the sign is
/// taken against the face's best-fit-plane normal (oriented to agree with
/// the ring's traversal). Result clamped to [-1, 1]. Throws
/// std::domain_error on a zero-length edge.
double scaled_jacobian(const std::array<Vec3, 4>& face_points);

/// Sine of the angle between the two adjacent edge vectors at each corner,
/// each in [0, 1]. Throws std::domain_error on a zero-length edge.
std::array<double, 4> corner_sines(const std::array<Vec3, 4>& face_points);

Vec3 cloud_centroid(const PointCloud& cloud);

FaceInfo face_info_row(const PointCloud& cloud, const CandidateFace& face);

/// Descriptor matrix for a candidate set, stored feature-major
/// (kFaceInfoWidth x N_F): column i is candidate i's FaceInfo.
Eigen::MatrixXd build_face_info(const PointCloud& cloud,
                                const std::vector<CandidateFace>& candidates);

/// Ablation switch: zeroes the selected component rows of a face-info
/// matrix in place, keeping the 29-wide layout (and therefore checkpoint
/// shapes) intact.
struct FInfoDropMask {
  bool coords = false;
  bool jacobian = false;
  bool sines = false;
  bool normals = false;

  bool any() const { return coords || jacobian || sines || normals; }
};
void apply_finfo_drop(Eigen::MatrixXd& face_info, const FInfoDropMask& mask);

/// Binary matrix file: 8-byte magic "QRFINFO1", uint64 row count (N_F),
/// uint64 width (29), then N_F records of 29 little-endian float64 values.
void write_face_info(const std::string& path, const Eigen::MatrixXd& face_info);
Eigen::MatrixXd read_face_info(const std::string& path);

}  // namespace quadrec
