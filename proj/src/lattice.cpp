#include "spatent/lattice.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "spatent/spectrum.hpp"

namespace spatent {

namespace {

constexpr std::array<std::pair<int, int>, 4> kFourNearest{{{-1, 0}, {0, -1}, {0, 1}, {1, 0}}};

constexpr std::array<std::pair<int, int>, 12> kTwelveNearest{{
    {-2, 0},
    {-1, -1}, {-1, 0}, {-1, 1},
    {0, -2}, {0, -1}, {0, 1}, {0, 2},
    {1, -1}, {1, 0}, {1, 1},
    {2, 0},
}};

}  // namespace

GridSpec::GridSpec(int rows, int cols) : rows_(rows), cols_(cols) {
  if (rows < 2 || cols < 2) {
    throw std::invalid_argument("grid must be at least 2x2, got " + std::to_string(rows) + "x" +
                                std::to_string(cols));
  }
}

std::string_view to_string(Scheme scheme) {
  return scheme == Scheme::FourNearest ? "4nn" : "12nn";
}

Scheme parse_scheme(std::string_view text) {
  if (text == "4nn" || text == "FourNearest") return Scheme::FourNearest;
  if (text == "12nn" || text == "TwelveNearest") return Scheme::TwelveNearest;
  throw std::invalid_argument("unknown neighbourhood scheme '" + std::string(text) +
                              "' (expected 4nn or 12nn)");
}

std::span<const std::pair<int, int>> neighbour_offsets(Scheme scheme) {
  if (scheme == Scheme::FourNearest) return kFourNearest;
  return kTwelveNearest;
}

AdjacencyMatrix::AdjacencyMatrix(GridSpec grid, Scheme scheme, std::vector<int> offsets,
                                 std::vector<int> neighbours)
    : grid_(grid), scheme_(scheme), offsets_(std::move(offsets)),
      neighbours_(std::move(neighbours)) {}

bool AdjacencyMatrix::adjacent(int a, int b) const {
  auto nb = neighbours(a);
  return std::binary_search(nb.begin(), nb.end(), b);
}

Eigen::VectorXd AdjacencyMatrix::multiply(const Eigen::VectorXd& x) const {
  Eigen::VectorXd y(size());
  for (int u = 0; u < size(); ++u) {
    double acc = 0.0;
    for (int v : neighbours(u)) acc += x[v];
    y[u] = acc;
  }
  return y;
}

double AdjacencyMatrix::quadratic_form(const Eigen::VectorXd& x) const {
  double acc = 0.0;
  for (int u = 0; u < size(); ++u) {
    double row = 0.0;
    for (int v : neighbours(u)) row += x[v];
    acc += x[u] * row;
  }
  return acc;
}

SparseMatrix AdjacencyMatrix::to_sparse() const {
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(neighbours_.size());
  for (int u = 0; u < size(); ++u)
    for (int v : neighbours(u)) triplets.emplace_back(u, v, 1.0);
  SparseMatrix a(size(), size());
  a.setFromTriplets(triplets.begin(), triplets.end());
  return a;
}

std::vector<std::pair<int, int>> AdjacencyMatrix::edges() const {
  std::vector<std::pair<int, int>> out;
  out.reserve(edge_count());
  for (int u = 0; u < size(); ++u)
    for (int v : neighbours(u))
      if (u < v) out.emplace_back(u, v);
  return out;
}

AdjacencyMatrix build_adjacency(const GridSpec& grid, Scheme scheme) {
  if (grid.size() == 0) throw std::invalid_argument("empty grid");
  std::vector<int> offsets{0};
  std::vector<int> neighbours;
  offsets.reserve(grid.size() + 1);
  for (int u = 0; u < grid.size(); ++u) {
    auto [r, c] = grid.coords(u);
    const auto start = neighbours.size();
    for (auto [dr, dc] : neighbour_offsets(scheme)) {
      if (grid.contains(r + dr, c + dc)) neighbours.push_back(grid.index(r + dr, c + dc));
    }
    std::sort(neighbours.begin() + static_cast<std::ptrdiff_t>(start), neighbours.end());
    offsets.push_back(static_cast<int>(neighbours.size()));
  }
  return AdjacencyMatrix(grid, scheme, std::move(offsets), std::move(neighbours));
}

DegreeMatrix degree_matrix(const AdjacencyMatrix& adjacency) {
  DegreeMatrix out{Eigen::VectorXd(adjacency.size())};
  for (int u = 0; u < adjacency.size(); ++u) out.d[u] = adjacency.degree(u);
  return out;
}

void check_car_parameters(double tau, double rho) {
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw std::invalid_argument("precision tau must be positive and finite");
  }
  if (!(std::abs(rho) < 1.0)) {
    throw std::invalid_argument("singular or indefinite precision: rho must lie in (-1, 1)");
  }
}

PrecisionMatrix build_precision(const AdjacencyMatrix& adjacency, const DegreeMatrix& degrees,
                                double tau, double rho) {
  check_car_parameters(tau, rho);
  const int n = adjacency.size();
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(n) + 2 * adjacency.edge_count());
  for (int u = 0; u < n; ++u) {
    triplets.emplace_back(u, u, tau * degrees.d[u]);
    if (rho != 0.0)
      for (int v : adjacency.neighbours(u)) triplets.emplace_back(u, v, -tau * rho);
  }
  PrecisionMatrix out{adjacency.grid(), tau, rho, SparseMatrix(n, n)};
  out.q.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

double log_det_precision(const DegreeMatrix& degrees, const AdjacencyMatrix& adjacency,
                         double tau, double rho) {
  check_car_parameters(tau, rho);
  const auto& spectrum = normalized_spectrum(adjacency);
  return adjacency.size() * std::log(tau) + degrees.sum_log() + spectrum.log_det_factor(rho);
}

void write_adjacency(const AdjacencyMatrix& adjacency, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (auto [u, v] : adjacency.edges()) out << (u + 1) << ' ' << (v + 1) << '\n';
  if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace spatent
