#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace spatent {

using Rng = std::mt19937_64;

// Independent stream for (master seed, stream id, substream id); the same
// triple always yields the same stream regardless of call order.
Rng make_stream(std::uint64_t master_seed, std::uint64_t stream_id, std::uint64_t substream = 0);

Eigen::VectorXd standard_normals(int n, Rng& rng);
double standard_normal(Rng& rng);
double uniform01(Rng& rng);

}  // namespace spatent
