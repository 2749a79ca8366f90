#include "quadrec/mesh_io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace quadrec {

namespace {

[[noreturn]] void fail(const std::string& path, int line,
                       const std::string& what) {
  std::ostringstream msg;
  msg << path << ":" << line << ": " << what;
  throw std::runtime_error(msg.str());
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path + " for reading");
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  return out;
}

// OBJ face token may carry texture/normal refs ("3/1/2"); the vertex index
// is the part before the first slash.
int parse_obj_index(const std::string& token, const std::string& path,
                    int line) {
  const std::size_t slash = token.find('/');
  const std::string head =
      slash == std::string::npos ? token : token.substr(0, slash);
  try {
    return std::stoi(head);
  } catch (const std::exception&) {
    fail(path, line, "bad face index '" + token + "'");
  }
}

}  // namespace

QuadMesh read_obj(const std::string& path) {
  std::ifstream in = open_input(path);
  QuadMesh mesh;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag)) continue;
    if (tag == "v") {
      Vec3 p;
      if (!(ss >> p.x() >> p.y() >> p.z())) {
        fail(path, lineno, "malformed vertex line");
      }
      if (!p.allFinite()) fail(path, lineno, "non-finite vertex coordinate");
      mesh.vertices.push_back(p);
    } else if (tag == "f") {
      std::vector<int> idx;
      std::string token;
      while (ss >> token) idx.push_back(parse_obj_index(token, path, lineno));
      if (idx.size() != 4) {
        std::ostringstream what;
        what << "face with " << idx.size()
             << " vertices; only quads are supported";
        fail(path, lineno, what.str());
      }
      std::array<int, 4> face{};
      for (int i = 0; i < 4; ++i) {
        int v = idx[static_cast<std::size_t>(i)];
        if (v < 0) v = static_cast<int>(mesh.vertices.size()) + v + 1;
        if (v < 1 || v > static_cast<int>(mesh.vertices.size())) {
          fail(path, lineno, "face index out of range");
        }
        face[static_cast<std::size_t>(i)] = v - 1;
      }
      mesh.faces.push_back(face);
    }
  }
  return mesh;
}

void write_obj(const std::string& path, const QuadMesh& mesh) {
  std::ofstream out = open_output(path);
  out << std::setprecision(17);
  for (const Vec3& p : mesh.vertices) {
    out << "v " << p.x() << " " << p.y() << " " << p.z() << "\n";
  }
  for (const auto& f : mesh.faces) {
    out << "f " << f[0] + 1 << " " << f[1] + 1 << " " << f[2] + 1 << " "
        << f[3] + 1 << "\n";
  }
  if (!out) throw std::runtime_error("failed while writing " + path);
}

PointCloud read_ply(const std::string& path) {
  std::ifstream in = open_input(path);
  std::string line;
  int lineno = 0;

  auto next_line = [&]() -> std::string {
    if (!std::getline(in, line)) fail(path, lineno, "unexpected end of file");
    ++lineno;
    return line;
  };

  if (next_line() != "ply") fail(path, lineno, "missing 'ply' magic");

  long vertex_count = -1;
  std::vector<std::string> vertex_props;
  bool in_vertex_element = false;
  bool saw_format = false;
  while (true) {
    std::istringstream ss(next_line());
    std::string tag;
    ss >> tag;
    if (tag == "format") {
      std::string fmt;
      ss >> fmt;
      if (fmt != "ascii") fail(path, lineno, "only ascii PLY is supported");
      saw_format = true;
    } else if (tag == "element") {
      std::string name;
      long count = 0;
      ss >> name >> count;
      if (name == "vertex") {
        vertex_count = count;
        in_vertex_element = true;
      } else {
        if (count != 0) {
          fail(path, lineno, "unsupported non-empty element '" + name + "'");
        }
        in_vertex_element = false;
      }
    } else if (tag == "property") {
      if (in_vertex_element) {
        std::string type, name;
        ss >> type >> name;
        vertex_props.push_back(name);
      }
    } else if (tag == "comment") {
      continue;
    } else if (tag == "end_header") {
      break;
    } else {
      fail(path, lineno, "unrecognized header line '" + tag + "'");
    }
  }
  if (!saw_format) fail(path, lineno, "missing format line");
  if (vertex_count < 0) fail(path, lineno, "missing vertex element");

  int ix = -1, iy = -1, iz = -1, inoise = -1;
  for (std::size_t i = 0; i < vertex_props.size(); ++i) {
    if (vertex_props[i] == "x") ix = static_cast<int>(i);
    if (vertex_props[i] == "y") iy = static_cast<int>(i);
    if (vertex_props[i] == "z") iz = static_cast<int>(i);
    if (vertex_props[i] == "noise") inoise = static_cast<int>(i);
  }
  if (ix < 0 || iy < 0 || iz < 0) {
    fail(path, lineno, "vertex element lacks x/y/z properties");
  }

  PointCloud cloud;
  cloud.points.reserve(static_cast<std::size_t>(vertex_count));
  if (inoise >= 0) cloud.noise_flag.reserve(static_cast<std::size_t>(vertex_count));
  for (long v = 0; v < vertex_count; ++v) {
    std::istringstream ss(next_line());
    std::vector<double> values(vertex_props.size());
    for (double& val : values) {
      if (!(ss >> val)) fail(path, lineno, "short vertex row");
    }
    Vec3 p(values[static_cast<std::size_t>(ix)],
           values[static_cast<std::size_t>(iy)],
           values[static_cast<std::size_t>(iz)]);
    if (!p.allFinite()) fail(path, lineno, "non-finite coordinate");
    cloud.points.push_back(p);
    if (inoise >= 0) {
      cloud.noise_flag.push_back(values[static_cast<std::size_t>(inoise)] != 0.0);
    }
  }
  return cloud;
}

void write_ply(const std::string& path, const PointCloud& cloud) {
  std::ofstream out = open_output(path);
  const bool has_noise = !cloud.noise_flag.empty();
  out << "ply\nformat ascii 1.0\n";
  out << "element vertex " << cloud.points.size() << "\n";
  out << "property double x\nproperty double y\nproperty double z\n";
  if (has_noise) out << "property uchar noise\n";
  out << "end_header\n";
  out << std::setprecision(17);
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const Vec3& p = cloud.points[i];
    out << p.x() << " " << p.y() << " " << p.z();
    if (has_noise) out << " " << (cloud.noise_flag[i] ? 1 : 0);
    out << "\n";
  }
  if (!out) throw std::runtime_error("failed while writing " + path);
}

}  // namespace quadrec
