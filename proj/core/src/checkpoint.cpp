#include "quadrec/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace quadrec {

namespace {

constexpr char kMagic[8] = {'Q', 'R', 'C', 'K', 'P', 'T', '0', '1'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ofstream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::ifstream& in, const std::string& path) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw std::runtime_error(path + ": truncated checkpoint");
  return value;
}

}  // namespace

void save_checkpoint(const std::string& path, const ModelParams& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.write(kMagic, sizeof(kMagic));
  put(out, kVersion);
  const ModelHyper& h = params.hyper;
  put(out, static_cast<std::int32_t>(h.d_point));
  put(out, static_cast<std::int32_t>(h.d_face));
  put(out, static_cast<std::int32_t>(h.d_neighbor));
  put(out, static_cast<std::int32_t>(h.point_hidden));
  put(out, static_cast<std::int32_t>(h.k));
  put(out, static_cast<std::uint8_t>(h.use_face_encoder));
  put(out, static_cast<std::uint8_t>(h.drop.coords));
  put(out, static_cast<std::uint8_t>(h.drop.jacobian));
  put(out, static_cast<std::uint8_t>(h.drop.sines));
  put(out, static_cast<std::uint8_t>(h.drop.normals));

  auto blocks = parameter_blocks(const_cast<ModelParams&>(params));
  put(out, static_cast<std::uint32_t>(blocks.size()));
  for (const BlockRef& block : blocks) {
    put(out, static_cast<std::uint32_t>(block.name.size()));
    out.write(block.name.data(), static_cast<std::streamsize>(block.name.size()));
    put(out, static_cast<std::uint64_t>(block.rows));
    put(out, static_cast<std::uint64_t>(block.cols));
    out.write(reinterpret_cast<const char*>(block.data),
              static_cast<std::streamsize>(block.rows * block.cols *
                                           static_cast<Eigen::Index>(sizeof(double))));
  }
  if (!out) throw std::runtime_error("failed while writing " + path);
}

ModelParams load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(magic)) != 0) {
    throw std::runtime_error(path + ": not a model checkpoint (bad magic)");
  }
  const auto version = get<std::uint32_t>(in, path);
  if (version != kVersion) {
    throw std::runtime_error(path + ": unsupported checkpoint version");
  }
  ModelHyper hyper;
  hyper.d_point = get<std::int32_t>(in, path);
  hyper.d_face = get<std::int32_t>(in, path);
  hyper.d_neighbor = get<std::int32_t>(in, path);
  hyper.point_hidden = get<std::int32_t>(in, path);
  hyper.k = get<std::int32_t>(in, path);
  hyper.use_face_encoder = get<std::uint8_t>(in, path) != 0;
  hyper.drop.coords = get<std::uint8_t>(in, path) != 0;
  hyper.drop.jacobian = get<std::uint8_t>(in, path) != 0;
  hyper.drop.sines = get<std::uint8_t>(in, path) != 0;
  hyper.drop.normals = get<std::uint8_t>(in, path) != 0;

  ModelParams params = init_params(hyper, 0);
  auto blocks = parameter_blocks(params);
  const auto block_count = get<std::uint32_t>(in, path);
  if (block_count != blocks.size()) {
    throw std::runtime_error(path + ": checkpoint block count mismatch");
  }
  for (BlockRef& block : blocks) {
    const auto name_len = get<std::uint32_t>(in, path);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    if (!in || name != block.name) {
      throw std::runtime_error(path + ": unexpected block '" + name +
                               "' (wanted '" + block.name + "')");
    }
    const auto rows = get<std::uint64_t>(in, path);
    const auto cols = get<std::uint64_t>(in, path);
    if (rows != static_cast<std::uint64_t>(block.rows) ||
        cols != static_cast<std::uint64_t>(block.cols)) {
      throw std::runtime_error(path + ": shape mismatch in block " + name);
    }
    in.read(reinterpret_cast<char*>(block.data),
            static_cast<std::streamsize>(rows * cols * sizeof(double)));
    if (!in) throw std::runtime_error(path + ": truncated checkpoint");
  }
  return params;
}

}  // namespace quadrec
