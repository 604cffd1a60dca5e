#include "spatent/cholesky.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace spatent {

namespace {

std::vector<int> grid_order(const GridSpec& grid) {
  std::vector<int> order(grid.size());
  if (grid.cols() <= grid.rows()) {
    std::iota(order.begin(), order.end(), 0);
  } else {
    int k = 0;
    for (int c = 0; c < grid.cols(); ++c)
      for (int r = 0; r < grid.rows(); ++r) order[k++] = grid.index(r, c);
  }
  return order;
}

std::vector<int> invert(const std::vector<int>& order) {
  std::vector<int> position(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) position[order[k]] = static_cast<int>(k);
  return position;
}

}  // namespace

BandMatrix::BandMatrix(int size, int bandwidth)
    : size_(size), bandwidth_(bandwidth),
      values_(static_cast<std::size_t>(size) * (bandwidth + 1), 0.0) {
  if (size < 0 || bandwidth < 0) throw std::invalid_argument("invalid band matrix shape");
}

BandLayout band_layout(const AdjacencyMatrix& adjacency) {
  BandLayout layout;
  layout.order = grid_order(adjacency.grid());
  layout.position = invert(layout.order);
  for (int u = 0; u < adjacency.size(); ++u)
    for (int v : adjacency.neighbours(u))
      layout.bandwidth = std::max(layout.bandwidth, std::abs(layout.position[u] - layout.position[v]));
  return layout;
}

BandMatrix assemble_band(const AdjacencyMatrix& adjacency, const BandLayout& layout, int begin,
                         int end, const Eigen::VectorXd& diag, double offdiag) {
  const int m = end - begin;
  BandMatrix band(m, std::min(layout.bandwidth, std::max(m - 1, 0)));
  for (int i = 0; i < m; ++i) {
    const int cell = layout.order[begin + i];
    band(i, i) = diag[cell];
    if (offdiag == 0.0) continue;
    for (int v : adjacency.neighbours(cell)) {
      const int j = layout.position[v] - begin;
      if (j >= 0 && j < i) band(i, j) = offdiag;
    }
  }
  return band;
}

CholeskyFactor CholeskyFactor::factorize(BandMatrix a, std::vector<int> cells) {
  const int n = a.size();
  const int bw = a.bandwidth();
  if (static_cast<int>(cells.size()) != n) throw std::invalid_argument("cell map size mismatch");
  for (int i = 0; i < n; ++i) {
    double* row_i = a.row(i);
    const int lo_i = std::max(0, i - bw);
    for (int j = lo_i; j <= i; ++j) {
      const double* row_j = a.row(j);
      const int lo = std::max(lo_i, j - bw);
      // row_i[k - i + bw] = L(i,k), row_j[k - j + bw] = L(j,k)
      const double* li = row_i + (lo - i + bw);
      const double* lj = row_j + (lo - j + bw);
      double s = row_i[j - i + bw];
      for (int k = 0; k < j - lo; ++k) s -= li[k] * lj[k];
      if (j < i) {
        row_i[j - i + bw] = s / row_j[bw];
      } else {
        if (!(s > 0.0)) {
          throw NotPositiveDefinite("matrix is not positive definite (pivot " + std::to_string(i) +
                                    " = " + std::to_string(s) + ")");
        }
        row_i[bw] = std::sqrt(s);
      }
    }
  }
  return CholeskyFactor(std::move(a), std::move(cells));
}

double CholeskyFactor::log_det() const {
  double acc = 0.0;
  for (int k = 0; k < size(); ++k) acc += std::log(factor_(k, k));
  return 2.0 * acc;
}

void CholeskyFactor::solve_lower_in_place(Eigen::VectorXd& v) const {
  const int n = size();
  const int bw = bandwidth();
  for (int i = 0; i < n; ++i) {
    const double* row = factor_.row(i);
    const int lo = std::max(0, i - bw);
    double s = v[i];
    for (int k = lo; k < i; ++k) s -= row[k - i + bw] * v[k];
    v[i] = s / row[bw];
  }
}

void CholeskyFactor::solve_upper_in_place(Eigen::VectorXd& v) const {
  const int bw = bandwidth();
  for (int i = size() - 1; i >= 0; --i) {
    const double* row = factor_.row(i);
    const double xi = v[i] / row[bw];
    v[i] = xi;
    const int lo = std::max(0, i - bw);
    for (int k = lo; k < i; ++k) v[k] -= row[k - i + bw] * xi;
  }
}

Eigen::VectorXd CholeskyFactor::multiply_upper(const Eigen::VectorXd& v) const {
  const int bw = bandwidth();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(size());
  for (int i = 0; i < size(); ++i) {
    const double* row = factor_.row(i);
    const int lo = std::max(0, i - bw);
    for (int k = lo; k <= i; ++k) out[k] += row[k - i + bw] * v[i];
  }
  return out;
}

Eigen::VectorXd CholeskyFactor::gather(const Eigen::VectorXd& by_cell) const {
  Eigen::VectorXd out(size());
  for (int k = 0; k < size(); ++k) out[k] = by_cell[cells_[k]];
  return out;
}

void CholeskyFactor::scatter(const Eigen::VectorXd& permuted, Eigen::VectorXd& by_cell) const {
  for (int k = 0; k < size(); ++k) by_cell[cells_[k]] = permuted[k];
}

Eigen::VectorXd CholeskyFactor::solve(const Eigen::VectorXd& b) const {
  Eigen::VectorXd v = gather(b);
  solve_lower_in_place(v);
  solve_upper_in_place(v);
  Eigen::VectorXd out(b.size());
  scatter(v, out);
  return out;
}

Eigen::VectorXd CholeskyFactor::correlate(const Eigen::VectorXd& z) const {
  Eigen::VectorXd v = z;
  solve_upper_in_place(v);
  Eigen::VectorXd out(size());
  scatter(v, out);
  return out;
}

Eigen::VectorXd CholeskyFactor::whiten(const Eigen::VectorXd& x) const {
  return multiply_upper(gather(x));
}

Eigen::MatrixXd CholeskyFactor::dense_factor() const {
  const int n = size();
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = std::max(0, i - bandwidth()); j <= i; ++j) l(i, j) = factor_(i, j);
  return l;
}

double CholeskyFactor::reconstruction_error(const SparseMatrix& q) const {
  const Eigen::MatrixXd l = dense_factor();
  const Eigen::MatrixXd llt = l * l.transpose();
  const Eigen::MatrixXd dense_q = Eigen::MatrixXd(q);
  Eigen::MatrixXd pqp(size(), size());
  for (int i = 0; i < size(); ++i)
    for (int j = 0; j < size(); ++j) pqp(i, j) = dense_q(cells_[i], cells_[j]);
  const double scale = std::max(dense_q.cwiseAbs().maxCoeff(), 1e-300);
  return (llt - pqp).cwiseAbs().maxCoeff() / scale;
}

CholeskyFactor sparse_cholesky(const SparseMatrix& q, const std::vector<int>& order) {
  const int n = static_cast<int>(q.rows());
  if (q.cols() != n || static_cast<int>(order.size()) != n) {
    throw std::invalid_argument("sparse_cholesky: dimension mismatch");
  }
  const std::vector<int> position = invert(order);
  int bw = 0;
  for (int col = 0; col < q.outerSize(); ++col)
    for (SparseMatrix::InnerIterator it(q, col); it; ++it)
      if (it.value() != 0.0)
        bw = std::max(bw, std::abs(position[it.row()] - position[it.col()]));
  BandMatrix band(n, bw);
  for (int col = 0; col < q.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(q, col); it; ++it) {
      const int i = position[it.row()];
      const int j = position[it.col()];
      if (j <= i) band(i, j) = it.value();
    }
  }
  return CholeskyFactor::factorize(std::move(band), order);
}

CholeskyFactor sparse_cholesky(const PrecisionMatrix& precision) {
  return sparse_cholesky(precision.q, grid_order(precision.grid));
}

}  // namespace spatent
