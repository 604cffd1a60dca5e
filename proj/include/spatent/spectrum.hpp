#pragma once

#include <Eigen/Core>

#include "spatent/lattice.hpp"

namespace spatent {

// Eigenvalues of D^-1/2 A D^-1/2 for one lattice. With them,
// log det(D - rho A) = sum log d + sum_k log(1 - rho lambda_k).
class NormalizedSpectrum {
 public:
  explicit NormalizedSpectrum(Eigen::VectorXd eigenvalues) : eigenvalues_(std::move(eigenvalues)) {}

  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  // sum_k log(1 - rho lambda_k)
  double log_det_factor(double rho) const;
  // d/drho of log_det_factor
  double log_det_factor_derivative(double rho) const;

 private:
  Eigen::VectorXd eigenvalues_;
};

NormalizedSpectrum compute_normalized_spectrum(const AdjacencyMatrix& adjacency);

// Process-wide cache keyed by (rows, cols, scheme); thread-safe.
const NormalizedSpectrum& normalized_spectrum(const AdjacencyMatrix& adjacency);

}  // namespace spatent
