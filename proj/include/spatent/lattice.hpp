#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace spatent {

using SparseMatrix = Eigen::SparseMatrix<double>;

// Rectangular lattice, cells indexed row-major from 0.
class GridSpec {
 public:
  GridSpec() = default;
  GridSpec(int rows, int cols);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int size() const { return rows_ * cols_; }

  int index(int row, int col) const { return row * cols_ + col; }
  std::pair<int, int> coords(int cell) const { return {cell / cols_, cell % cols_}; }
  bool contains(int row, int col) const {
    return row >= 0 && row < rows_ && col >= 0 && col < cols_;
  }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
};

enum class Scheme { FourNearest, TwelveNearest };

std::string_view to_string(Scheme scheme);
// Accepts "4nn" / "12nn" (and the long enum names).
Scheme parse_scheme(std::string_view text);

// (drow, dcol) offsets defining the neighbourhood, including both signs.
std::span<const std::pair<int, int>> neighbour_offsets(Scheme scheme);

// Symmetric 0/1 neighbour graph stored as compressed rows.
class AdjacencyMatrix {
 public:
  AdjacencyMatrix() = default;
  AdjacencyMatrix(GridSpec grid, Scheme scheme, std::vector<int> offsets,
                  std::vector<int> neighbours);

  const GridSpec& grid() const { return grid_; }
  Scheme scheme() const { return scheme_; }
  int size() const { return grid_.size(); }

  std::span<const int> neighbours(int cell) const {
    return {neighbours_.data() + offsets_[cell],
            static_cast<std::size_t>(offsets_[cell + 1] - offsets_[cell])};
  }
  int degree(int cell) const { return offsets_[cell + 1] - offsets_[cell]; }
  bool adjacent(int a, int b) const;
  std::size_t edge_count() const { return neighbours_.size() / 2; }

  // y = A x
  Eigen::VectorXd multiply(const Eigen::VectorXd& x) const;
  // x' A x
  double quadratic_form(const Eigen::VectorXd& x) const;

  SparseMatrix to_sparse() const;
  // Undirected edges (u < v), 0-based.
  std::vector<std::pair<int, int>> edges() const;

 private:
  GridSpec grid_;
  Scheme scheme_ = Scheme::FourNearest;
  std::vector<int> offsets_;
  std::vector<int> neighbours_;
};

struct DegreeMatrix {
  Eigen::VectorXd d;

  int size() const { return static_cast<int>(d.size()); }
  double sum_log() const { return d.array().log().sum(); }
};

// Q = tau (D - rho A).
struct PrecisionMatrix {
  GridSpec grid;
  double tau = 1.0;
  double rho = 0.0;
  SparseMatrix q;
};

AdjacencyMatrix build_adjacency(const GridSpec& grid, Scheme scheme);
DegreeMatrix degree_matrix(const AdjacencyMatrix& adjacency);

// Throws std::invalid_argument for tau <= 0 or |rho| >= 1.
void check_car_parameters(double tau, double rho);
PrecisionMatrix build_precision(const AdjacencyMatrix& adjacency, const DegreeMatrix& degrees,
                                double tau, double rho);

// log det[tau (D - rho A)] via the cached spectrum of D^-1/2 A D^-1/2.
double log_det_precision(const DegreeMatrix& degrees, const AdjacencyMatrix& adjacency,
                         double tau, double rho);

// Edge list "u v" per line, 1-based, each undirected edge once.
void write_adjacency(const AdjacencyMatrix& adjacency, const std::string& path);

}  // namespace spatent
