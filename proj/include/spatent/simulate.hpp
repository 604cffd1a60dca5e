#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "spatent/cholesky.hpp"
#include "spatent/lattice.hpp"
#include "spatent/random.hpp"

namespace spatent {

// Binary outcomes on a lattice. 1 is "success" (category 2 in the
// {1,2} labelling), 0 is category 1.
struct BinaryField {
  GridSpec grid;
  std::vector<std::uint8_t> x;

  int size() const { return static_cast<int>(x.size()); }
  int successes() const;
};

struct AutologisticParams {
  double beta0 = 0.0;
  double eta = 0.0;
  GridSpec grid;
  Scheme scheme = Scheme::FourNearest;
};

inline constexpr int kGibbsBurnInFloor = 1000;

// phi = P' L^-T z for a fresh standard normal z.
Eigen::VectorXd sample_gmrf(const CholeskyFactor& chol, Rng& rng);

BinaryField bernoulli_field(double beta0, const Eigen::VectorXd& phi, const GridSpec& grid,
                            Rng& rng);

// Systematic-scan Gibbs sampler for the centered autologistic model with one
// shared dependence parameter:
//   logit P(x_u = 1 | rest) = beta0 + eta * sum_{i in N(u)} (x_i - expit(beta0)).
class AutologisticSampler {
 public:
  AutologisticSampler(const AutologisticParams& params, Rng& rng);

  void sweep(Rng& rng);
  const BinaryField& state() const { return field_; }
  // Conditional success probability of one cell given the current state.
  double conditional(int cell) const;

 private:
  AutologisticParams params_;
  AdjacencyMatrix adjacency_;
  double mu_;
  BinaryField field_;
};

// Throws std::invalid_argument when sweeps < kGibbsBurnInFloor.
BinaryField gibbs_autologistic(const AutologisticParams& params, int sweeps, Rng& rng);

struct ScenarioConfig {
  std::string name = "clustered";
  GridSpec grid{40, 40};
  Scheme scheme = Scheme::TwelveNearest;
  double tau = 0.1;
  double rho = 0.99;
  std::vector<double> beta0_schedule;  // one intercept per replicate
  std::uint64_t seed = 20190101;
  // Distinguishes scenarios sharing a master seed.
  std::uint64_t stream = 0;

  int replicates() const { return static_cast<int>(beta0_schedule.size()); }
};

// `count` intercepts with expit(beta0) evenly spaced on [p_min, p_max].
std::vector<double> beta0_schedule(int count, double p_min = 0.1, double p_max = 0.9);

struct TruthRecord {
  int replicate = 0;
  double beta0 = 0.0;
  double tau = 0.0;
  double rho = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  Eigen::VectorXd phi;
  Eigen::VectorXd p;  // expit(beta0 + phi)
};

struct Replicate {
  BinaryField field;
  TruthRecord truth;
};

// Replicate r only depends on (seed, stream, r).
Replicate simulate_replicate(const ScenarioConfig& config, const CholeskyFactor& chol, int r);
std::vector<Replicate> simulate_scenario(const ScenarioConfig& config);

// Counts of neighbouring pairs with equal values (each undirected edge once).
int like_join_count(const BinaryField& field, const AdjacencyMatrix& adjacency);
// Moran's I of a cell-level vector under the binary weights A.
double morans_i(const Eigen::VectorXd& values, const AdjacencyMatrix& adjacency);
// Fraction of each cell's neighbours sharing the cell's value.
Eigen::VectorXd neighbourhood_homogeneity(const BinaryField& field,
                                          const AdjacencyMatrix& adjacency);

}  // namespace spatent
