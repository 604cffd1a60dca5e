#include "spatent/spectrum.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>

#include <Eigen/Eigenvalues>

namespace spatent {

double NormalizedSpectrum::log_det_factor(double rho) const {
  double acc = 0.0;
  for (double lambda : eigenvalues_) acc += std::log1p(-rho * lambda);
  return acc;
}

double NormalizedSpectrum::log_det_factor_derivative(double rho) const {
  double acc = 0.0;
  for (double lambda : eigenvalues_) acc -= lambda / (1.0 - rho * lambda);
  return acc;
}

NormalizedSpectrum compute_normalized_spectrum(const AdjacencyMatrix& adjacency) {
  const int n = adjacency.size();
  Eigen::VectorXd inv_sqrt_d(n);
  for (int u = 0; u < n; ++u) inv_sqrt_d[u] = 1.0 / std::sqrt(adjacency.degree(u));
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (int u = 0; u < n; ++u)
    for (int v : adjacency.neighbours(u)) m(u, v) = inv_sqrt_d[u] * inv_sqrt_d[v];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("eigenvalue decomposition of the normalized adjacency failed");
  }
  return NormalizedSpectrum(solver.eigenvalues());
}

const NormalizedSpectrum& normalized_spectrum(const AdjacencyMatrix& adjacency) {
  using Key = std::tuple<int, int, Scheme>;
  static std::mutex mutex;
  static std::map<Key, std::unique_ptr<NormalizedSpectrum>> cache;

  const Key key{adjacency.grid().rows(), adjacency.grid().cols(), adjacency.scheme()};
  std::lock_guard lock(mutex);
  auto it = cache.find(key);
  if (it == cache.end()) {
    it = cache.emplace(key, std::make_unique<NormalizedSpectrum>(
                                compute_normalized_spectrum(adjacency)))
             .first;
  }
  return *it->second;
}

}  // namespace spatent
