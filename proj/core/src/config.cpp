#include "quadrec/config.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace quadrec {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  PipelineConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::string text = trim(line);
    if (text.empty()) continue;
    const std::size_t eq = text.find('=');
    if (eq == std::string::npos) {
      std::ostringstream msg;
      msg << path << ":" << lineno << ": expected 'key = value'";
      throw std::runtime_error(msg.str());
    }
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    std::istringstream vs(value);
    auto parse = [&](auto& target) {
      if (!(vs >> target)) {
        std::ostringstream msg;
        msg << path << ":" << lineno << ": bad value for " << key;
        throw std::runtime_error(msg.str());
      }
    };
    if (key == "k") parse(cfg.k);
    else if (key == "max_per_point") parse(cfg.candidates.max_per_point);
    else if (key == "min_edge_ratio") parse(cfg.candidates.thresholds.min_edge_ratio);
    else if (key == "min_sine") parse(cfg.candidates.thresholds.min_sine);
    else if (key == "min_normal_dot") parse(cfg.candidates.thresholds.min_normal_dot);
    else if (key == "epochs") parse(cfg.train.epochs);
    else if (key == "momentum") parse(cfg.train.momentum);
    else if (key == "initial_lr") parse(cfg.train.initial_lr);
    else if (key == "lr_decay_epochs") parse(cfg.train.lr_decay_epochs);
    else if (key == "w_multiplier") parse(cfg.train.w_multiplier);
    else if (key == "face_loss_sign") parse(cfg.train.face_loss_sign);
    else if (key == "use_face_loss") parse(cfg.train.use_face_loss);
    else if (key == "threshold") parse(cfg.inference_threshold);
    else if (key == "angle_tol") parse(cfg.post.angle_tol_deg);
    else if (key == "max_passes") parse(cfg.post.max_passes);
    else if (key == "chamfer_samples") parse(cfg.chamfer_samples);
    else if (key == "seed") parse(cfg.seed);
    else {
      std::ostringstream msg;
      msg << path << ":" << lineno << ": unknown config key '" << key << "'";
      throw std::runtime_error(msg.str());
    }
  }
  return cfg;
}

void save_config(const std::string& path, const PipelineConfig& cfg) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << std::setprecision(17);
  out << "k = " << cfg.k << "\n";
  out << "max_per_point = " << cfg.candidates.max_per_point << "\n";
  out << "min_edge_ratio = " << cfg.candidates.thresholds.min_edge_ratio << "\n";
  out << "min_sine = " << cfg.candidates.thresholds.min_sine << "\n";
  out << "min_normal_dot = " << cfg.candidates.thresholds.min_normal_dot << "\n";
  out << "epochs = " << cfg.train.epochs << "\n";
  out << "momentum = " << cfg.train.momentum << "\n";
  out << "initial_lr = " << cfg.train.initial_lr << "\n";
  out << "lr_decay_epochs = " << cfg.train.lr_decay_epochs << "\n";
  out << "w_multiplier = " << cfg.train.w_multiplier << "\n";
  out << "face_loss_sign = " << cfg.train.face_loss_sign << "\n";
  out << "use_face_loss = " << cfg.train.use_face_loss << "\n";
  out << "threshold = " << cfg.inference_threshold << "\n";
  out << "angle_tol = " << cfg.post.angle_tol_deg << "\n";
  out << "max_passes = " << cfg.post.max_passes << "\n";
  out << "chamfer_samples = " << cfg.chamfer_samples << "\n";
  out << "seed = " << cfg.seed << "\n";
  if (!out) throw std::runtime_error("failed while writing " + path);
}

}  // namespace quadrec
