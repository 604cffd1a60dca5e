#include "spatent/random.hpp"

namespace spatent {

Rng make_stream(std::uint64_t master_seed, std::uint64_t stream_id, std::uint64_t substream) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                    static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(stream_id),
                    static_cast<std::uint32_t>(stream_id >> 32),
                    static_cast<std::uint32_t>(substream),
                    static_cast<std::uint32_t>(substream >> 32),
                    0x5eed5u};
  return Rng(seq);
}

double standard_normal(Rng& rng) {
  std::normal_distribution<double> normal;
  return normal(rng);
}

double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

Eigen::VectorXd standard_normals(int n, Rng& rng) {
  std::normal_distribution<double> normal;
  Eigen::VectorXd z(n);
  for (int i = 0; i < n; ++i) z[i] = normal(rng);
  return z;
}

}  // namespace spatent
