#include <cmath>
#include <limits>
#include <numbers>

#include "spatent/infer.hpp"
#include "spatent/numeric.hpp"

namespace spatent {

namespace {

double log_normal(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return -0.5 * z * z - std::log(sd) - 0.5 * std::log(2.0 * std::numbers::pi);
}

}  // namespace

void Priors::validate() const {
  if (!(beta0_sd > 0.0 && tau_shape > 0.0 && tau_rate > 0.0 && rho_tilde_sd > 0.0)) {
    throw std::invalid_argument("prior scale, shape and rate parameters must be positive");
  }
}

double Priors::log_beta0(double beta0) const { return log_normal(beta0, beta0_mean, beta0_sd); }

double Priors::log_tau(double tau) const {
  if (!(tau > 0.0)) return -std::numeric_limits<double>::infinity();
  return tau_shape * std::log(tau_rate) - std::lgamma(tau_shape) +
         (tau_shape - 1.0) * std::log(tau) - tau_rate * tau;
}

double Priors::log_rho_tilde(double rho_tilde) const {
  return log_normal(rho_tilde, 0.0, rho_tilde_sd);
}

double Priors::log_rho(double rho) const {
  if (!(std::abs(rho) < 1.0)) return -std::numeric_limits<double>::infinity();
  return log_rho_tilde(std::atanh(rho)) - std::log1p(-rho * rho);
}

double bernoulli_loglik(const BinaryField& data, double beta0, const Eigen::VectorXd& phi) {
  double acc = 0.0;
  for (int u = 0; u < data.size(); ++u) acc += bernoulli_logit_loglik(data.x[u], beta0 + phi[u]);
  return acc;
}

double log_posterior(const CarState& state, const BinaryField& data,
                     const AdjacencyMatrix& adjacency, const DegreeMatrix& degrees,
                     const Priors& priors) {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  if (!(state.tau > 0.0) || !(std::abs(state.rho) < 1.0) || !std::isfinite(state.tau)) {
    return kNegInf;
  }
  if (state.phi.size() != data.size() || adjacency.size() != data.size()) {
    throw std::invalid_argument("log_posterior: state, data and lattice sizes differ");
  }
  const double quad = (degrees.d.array() * state.phi.array().square()).sum() -
                      state.rho * adjacency.quadratic_form(state.phi);
  const double value = bernoulli_loglik(data, state.beta0, state.phi) +
                       0.5 * log_det_precision(degrees, adjacency, state.tau, state.rho) -
                       0.5 * state.tau * quad + priors.log_beta0(state.beta0) +
                       priors.log_tau(state.tau) + priors.log_rho(state.rho);
  return std::isfinite(value) ? value : kNegInf;
}

std::vector<std::string> draw_columns(int cells) {
  std::vector<std::string> names{"beta0", "tau", "rho"};
  names.reserve(kHyperColumns + cells);
  for (int u = 1; u <= cells; ++u) names.push_back("phi_" + std::to_string(u));
  return names;
}

PosteriorSamples make_samples(const GridSpec& grid, Eigen::MatrixXd draws, std::vector<int> chain) {
  if (draws.cols() != kHyperColumns + grid.size()) {
    throw std::invalid_argument("draw table width does not match grid");
  }
  if (static_cast<Eigen::Index>(chain.size()) != draws.rows()) {
    throw std::invalid_argument("chain labels do not match draw count");
  }
  PosteriorSamples out;
  out.grid = grid;
  out.columns = draw_columns(grid.size());
  out.draws = std::move(draws);
  out.chain = std::move(chain);
  int max_chain = -1;
  for (int c : out.chain) max_chain = std::max(max_chain, c);
  out.chains = max_chain + 1;
  return out;
}

std::vector<double> PosteriorSamples::chain_column(int col, int chain_index) const {
  std::vector<double> out;
  for (int r = 0; r < rows(); ++r)
    if (chain[r] == chain_index) out.push_back(draws(r, col));
  return out;
}

CarState initial_state(const BinaryField& data) {
  const double frac = static_cast<double>(data.successes()) / data.size();
  double beta0 = 4.0;
  if (frac <= 0.0) {
    beta0 = -4.0;
  } else if (frac < 1.0) {
    beta0 = std::clamp(logit(frac), -4.0, 4.0);
  }
  return CarState{beta0, 1.0, 0.0, Eigen::VectorXd::Zero(data.size())};
}

}  // namespace spatent
