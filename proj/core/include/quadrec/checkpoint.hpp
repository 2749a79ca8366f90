#pragma once

#include "quadrec/model.hpp"

#include <string>

namespace quadrec {

/// Binary model checkpoint, round-trip exact. Layout: 8-byte magic
/// "QRCKPT01", uint32 version, hyperparameters (five int32: d_point,
/// d_face, d_neighbor, point_hidden, k; five uint8 flags: use_face_encoder
/// and the four descriptor drop flags), uint32 block count, then per block
/// a uint32 name length, the name bytes, uint64 rows, uint64 cols and
/// rows*cols little-endian float64 values in column-major order.
void save_checkpoint(const std::string& path, const ModelParams& params);
ModelParams load_checkpoint(const std::string& path);

}  // namespace quadrec
