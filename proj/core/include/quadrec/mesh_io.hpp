#pragma once

#include "quadrec/mesh.hpp"

#include <string>

namespace quadrec {

/// OBJ with `v x y z` and quad-only `f a b c d` lines (1-based indices).
/// Faces with other vertex counts are rejected with a descriptive error.
QuadMesh read_obj(const std::string& path);
void write_obj(const std::string& path, const QuadMesh& mesh);

/// ASCII PLY point cloud: vertex elements with x,y,z properties and an
/// optional `noise` uchar property carrying the synthetic-point flag.
PointCloud read_ply(const std::string& path);
void write_ply(const std::string& path, const PointCloud& cloud);

}  // namespace quadrec
