#include "spatent/simulate.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "spatent/numeric.hpp"

namespace spatent {

int BinaryField::successes() const {
  return static_cast<int>(std::count(x.begin(), x.end(), std::uint8_t{1}));
}

Eigen::VectorXd sample_gmrf(const CholeskyFactor& chol, Rng& rng) {
  return chol.correlate(standard_normals(chol.size(), rng));
}

BinaryField bernoulli_field(double beta0, const Eigen::VectorXd& phi, const GridSpec& grid,
                            Rng& rng) {
  if (phi.size() != grid.size()) throw std::invalid_argument("phi length does not match grid");
  BinaryField field{grid, std::vector<std::uint8_t>(grid.size())};
  for (int u = 0; u < grid.size(); ++u) {
    field.x[u] = uniform01(rng) < expit(beta0 + phi[u]) ? 1 : 0;
  }
  return field;
}

AutologisticSampler::AutologisticSampler(const AutologisticParams& params, Rng& rng)
    : params_(params), adjacency_(build_adjacency(params.grid, params.scheme)),
      mu_(expit(params.beta0)) {
  field_.grid = params.grid;
  field_.x.resize(params.grid.size());
  for (auto& v : field_.x) v = uniform01(rng) < mu_ ? 1 : 0;
}

double AutologisticSampler::conditional(int cell) const {
  double centered = 0.0;
  for (int v : adjacency_.neighbours(cell)) centered += field_.x[v] - mu_;
  return expit(params_.beta0 + params_.eta * centered);
}

void AutologisticSampler::sweep(Rng& rng) {
  for (int u = 0; u < field_.size(); ++u) {
    field_.x[u] = uniform01(rng) < conditional(u) ? 1 : 0;
  }
}

BinaryField gibbs_autologistic(const AutologisticParams& params, int sweeps, Rng& rng) {
  if (sweeps < kGibbsBurnInFloor) {
    throw std::invalid_argument("autologistic Gibbs needs at least " +
                                std::to_string(kGibbsBurnInFloor) + " sweeps");
  }
  AutologisticSampler sampler(params, rng);
  for (int s = 0; s < sweeps; ++s) sampler.sweep(rng);
  return sampler.state();
}

std::vector<double> beta0_schedule(int count, double p_min, double p_max) {
  if (count < 1) throw std::invalid_argument("schedule needs at least one replicate");
  if (!(p_min > 0.0 && p_max < 1.0 && p_min <= p_max)) {
    throw std::invalid_argument("schedule probabilities must satisfy 0 < p_min <= p_max < 1");
  }
  std::vector<double> out(count);
  for (int r = 0; r < count; ++r) {
    const double p = count == 1 ? 0.5 * (p_min + p_max)
                                : p_min + (p_max - p_min) * r / static_cast<double>(count - 1);
    out[r] = logit(p);
  }
  return out;
}

Replicate simulate_replicate(const ScenarioConfig& config, const CholeskyFactor& chol, int r) {
  Rng rng = make_stream(config.seed, config.stream, static_cast<std::uint64_t>(r));
  Replicate rep;
  rep.truth.replicate = r;
  rep.truth.beta0 = config.beta0_schedule.at(r);
  rep.truth.tau = config.tau;
  rep.truth.rho = config.rho;
  rep.truth.seed = config.seed;
  rep.truth.stream = config.stream;
  rep.truth.phi = sample_gmrf(chol, rng);
  rep.truth.p = rep.truth.phi.unaryExpr([&](double f) { return expit(rep.truth.beta0 + f); });
  rep.field = bernoulli_field(rep.truth.beta0, rep.truth.phi, config.grid, rng);
  return rep;
}

std::vector<Replicate> simulate_scenario(const ScenarioConfig& config) {
  const auto adjacency = build_adjacency(config.grid, config.scheme);
  const auto chol =
      sparse_cholesky(build_precision(adjacency, degree_matrix(adjacency), config.tau, config.rho));
  std::vector<Replicate> out;
  out.reserve(config.replicates());
  for (int r = 0; r < config.replicates(); ++r) out.push_back(simulate_replicate(config, chol, r));
  return out;
}

int like_join_count(const BinaryField& field, const AdjacencyMatrix& adjacency) {
  int count = 0;
  for (auto [u, v] : adjacency.edges()) count += field.x[u] == field.x[v];
  return count;
}

double morans_i(const Eigen::VectorXd& values, const AdjacencyMatrix& adjacency) {
  const Eigen::VectorXd centered = values.array() - values.mean();
  const double denom = centered.squaredNorm();
  if (denom == 0.0) return 0.0;
  const double weight_sum = 2.0 * static_cast<double>(adjacency.edge_count());
  return values.size() / weight_sum * adjacency.quadratic_form(centered) / denom;
}

Eigen::VectorXd neighbourhood_homogeneity(const BinaryField& field,
                                          const AdjacencyMatrix& adjacency) {
  Eigen::VectorXd out(field.size());
  for (int u = 0; u < field.size(); ++u) {
    int same = 0;
    for (int v : adjacency.neighbours(u)) same += field.x[v] == field.x[u];
    out[u] = static_cast<double>(same) / adjacency.degree(u);
  }
  return out;
}

}  // namespace spatent
