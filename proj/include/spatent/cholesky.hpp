#pragma once

#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "spatent/lattice.hpp"

namespace spatent {

class NotPositiveDefinite : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Symmetric matrix held as its lower band: row i stores columns i-bandwidth..i.
class BandMatrix {
 public:
  BandMatrix(int size, int bandwidth);

  int size() const { return size_; }
  int bandwidth() const { return bandwidth_; }

  double& operator()(int i, int j) { return values_[slot(i, j)]; }
  double operator()(int i, int j) const { return values_[slot(i, j)]; }
  bool in_band(int i, int j) const { return j <= i && i - j <= bandwidth_; }

  double* row(int i) { return values_.data() + static_cast<std::size_t>(i) * (bandwidth_ + 1); }
  const double* row(int i) const {
    return values_.data() + static_cast<std::size_t>(i) * (bandwidth_ + 1);
  }

 private:
  std::size_t slot(int i, int j) const {
    return static_cast<std::size_t>(i) * (bandwidth_ + 1) + (j - i + bandwidth_);
  }

  int size_;
  int bandwidth_;
  std::vector<double> values_;
};

// Position <-> cell maps of a bandwidth-reducing ordering for a lattice.
struct BandLayout {
  std::vector<int> order;     // order[position] = cell
  std::vector<int> position;  // position[cell]
  int bandwidth = 0;
};

// Row-major when cols <= rows, column-major otherwise, so the band spans the
// shorter side of the grid.
BandLayout band_layout(const AdjacencyMatrix& adjacency);

// Band of the principal submatrix on positions [begin, end) of
// diag(cell) on the diagonal and `offdiag` at every adjacency entry.
BandMatrix assemble_band(const AdjacencyMatrix& adjacency, const BandLayout& layout, int begin,
                         int end, const Eigen::VectorXd& diag, double offdiag);

// L L' = P Q P' with L lower triangular and banded.
class CholeskyFactor {
 public:
  // `cells[k]` is the original index of row k of `matrix`; factorizes in place.
  static CholeskyFactor factorize(BandMatrix matrix, std::vector<int> cells);

  int size() const { return factor_.size(); }
  int bandwidth() const { return factor_.bandwidth(); }
  const std::vector<int>& cells() const { return cells_; }
  double diagonal(int k) const { return factor_(k, k); }
  double log_det() const;

  // Vectors below are in the factor's own (permuted) ordering.
  void solve_lower_in_place(Eigen::VectorXd& v) const;  // v <- L^-1 v
  void solve_upper_in_place(Eigen::VectorXd& v) const;  // v <- L^-T v
  Eigen::VectorXd multiply_upper(const Eigen::VectorXd& v) const;  // L' v

  // Vectors below are in cell ordering restricted to cells().
  Eigen::VectorXd gather(const Eigen::VectorXd& by_cell) const;
  void scatter(const Eigen::VectorXd& permuted, Eigen::VectorXd& by_cell) const;

  // Q^-1 b, with b and the result indexed by cell (full-size factors only).
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  // P' L^-T z: maps standard normals to a draw with covariance Q^-1.
  Eigen::VectorXd correlate(const Eigen::VectorXd& z) const;
  // L' P x: inverse of correlate().
  Eigen::VectorXd whiten(const Eigen::VectorXd& x) const;

  Eigen::MatrixXd dense_factor() const;
  // max |L L' - P Q P'| / max |Q|
  double reconstruction_error(const SparseMatrix& q) const;

 private:
  CholeskyFactor(BandMatrix factor, std::vector<int> cells)
      : factor_(std::move(factor)), cells_(std::move(cells)) {}

  BandMatrix factor_;
  std::vector<int> cells_;
};

CholeskyFactor sparse_cholesky(const PrecisionMatrix& precision);
// Generic entry point: `order[k]` gives the cell placed at position k.
CholeskyFactor sparse_cholesky(const SparseMatrix& q, const std::vector<int>& order);

}  // namespace spatent
