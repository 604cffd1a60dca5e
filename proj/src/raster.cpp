#include <algorithm>
#include <cmath>
#include <cstdio>

#include "spatent/io.hpp"

namespace spatent {

std::string format_layer_csv(const GridSpec& grid, const Eigen::VectorXd& layer) {
  if (layer.size() != grid.size()) throw std::invalid_argument("layer size does not match grid");
  std::string out;
  char buf[32];
  for (int r = 0; r < grid.rows(); ++r) {
    for (int c = 0; c < grid.cols(); ++c) {
      if (c > 0) out.push_back(',');
      std::snprintf(buf, sizeof buf, "%.17g", layer[grid.index(r, c)]);
      out += buf;
    }
    out.push_back('\n');
  }
  return out;
}

std::string encode_pgm(const GridSpec& grid, const Eigen::VectorXd& layer, double full_scale,
                       std::string_view label) {
  if (layer.size() != grid.size()) throw std::invalid_argument("layer size does not match grid");
  if (!(full_scale > 0.0)) throw std::invalid_argument("PGM full scale must be positive");
  char scale[64];
  std::snprintf(scale, sizeof scale, "%.17g", full_scale);
  std::string out = "P5\n# " + std::string(label) + " value = sample / 65535 * " + scale + "\n" +
                    std::to_string(grid.cols()) + " " + std::to_string(grid.rows()) + "\n65535\n";
  out.reserve(out.size() + static_cast<std::size_t>(grid.size()) * 2);
  for (int u = 0; u < grid.size(); ++u) {
    const double v = std::clamp(layer[u] / full_scale, 0.0, 1.0);
    const auto sample = static_cast<std::uint16_t>(std::lround(v * 65535.0));
    out.push_back(static_cast<char>(sample >> 8));
    out.push_back(static_cast<char>(sample & 0xFF));
  }
  return out;
}

}  // namespace spatent
