#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "spatent/lattice.hpp"
#include "spatent/simulate.hpp"

namespace spatent {

// beta0 ~ N(mean, sd^2); tau ~ Gamma(shape, rate); atanh(rho) ~ N(0, rho_tilde_sd^2).
struct Priors {
  double beta0_mean = 0.0;
  double beta0_sd = 10.0;
  double tau_shape = 1.0;
  double tau_rate = 0.01;
  double rho_tilde_sd = 2.0;

  void validate() const;
  // Log densities on the natural scale (rho density includes 1/(1-rho^2)).
  double log_beta0(double beta0) const;
  double log_tau(double tau) const;
  double log_rho(double rho) const;
  // Log density of atanh(rho) itself.
  double log_rho_tilde(double rho_tilde) const;
};

struct CarState {
  double beta0 = 0.0;
  double tau = 1.0;
  double rho = 0.0;
  Eigen::VectorXd phi;
};

// Unnormalized log posterior of (beta0, tau, rho, phi) on the natural scale;
// -infinity outside the support.
double log_posterior(const CarState& state, const BinaryField& data,
                     const AdjacencyMatrix& adjacency, const DegreeMatrix& degrees,
                     const Priors& priors);

// Logistic log-likelihood sum_u [x_u eta_u - log(1 + exp eta_u)], eta = beta0 + phi.
double bernoulli_loglik(const BinaryField& data, double beta0, const Eigen::VectorXd& phi);

struct FitConfig {
  int chains = 4;
  int iterations = 20000;
  int burn_in = 10000;
  int thin = 10;
  // Lines of cells (along the band ordering) per latent-field block; 0 updates
  // the whole field jointly.
  int block_lines = 0;
  // Robbins-Monro step sizes decay as (t + 1)^-adapt_decay during burn-in.
  double adapt_decay = 0.6;
  double field_step = 0.5;   // in (0, 1]
  double beta0_step = 0.1;
  double shift_step = 0.2;
  double hyper_step = 0.1;   // initial sd for (log tau, atanh rho) moves
  // Newton steps behind the Gaussian approximation used by the theta move.
  int laplace_steps = 3;
  std::uint64_t seed = 1;
  int workers = 0;  // 0 = SPATENT_WORKERS or hardware concurrency
  bool fail_on_divergence = true;
  std::optional<CarState> initial_state;

  void validate() const;
};

class SamplerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct MoveStats {
  std::string name;
  long long proposed = 0;  // after burn-in
  long long accepted = 0;
  double final_scale = 0.0;
  bool at_scale_cap = false;

  double rate() const { return proposed > 0 ? static_cast<double>(accepted) / proposed : 0.0; }
};

struct ChainReport {
  int chain = 0;
  std::vector<MoveStats> moves;
  bool diverged = false;
  std::string divergence;
};

inline constexpr int kHyperColumns = 3;  // beta0, tau, rho

struct PosteriorSamples {
  GridSpec grid;
  std::vector<std::string> columns;  // beta0, tau, rho, phi_1 .. phi_n
  Eigen::MatrixXd draws;             // one row per retained draw
  std::vector<int> chain;            // chain label per row
  int chains = 0;
  std::vector<ChainReport> reports;
  std::uint64_t seed = 0;

  int rows() const { return static_cast<int>(draws.rows()); }
  int cells() const { return static_cast<int>(draws.cols()) - kHyperColumns; }
  // Column values for one chain, in draw order.
  std::vector<double> chain_column(int col, int chain_index) const;
};

std::vector<std::string> draw_columns(int cells);
// Assembles a sample table from explicit rows (used by tests and I/O).
PosteriorSamples make_samples(const GridSpec& grid, Eigen::MatrixXd draws, std::vector<int> chain);

CarState initial_state(const BinaryField& data);

PosteriorSamples fit_mcmc(const BinaryField& data, const AdjacencyMatrix& adjacency,
                          const DegreeMatrix& degrees, const Priors& priors,
                          const FitConfig& config);

struct IntervalSummary {
  double mean = 0.0;
  double sd = 0.0;
  double lower = 0.0;  // 2.5%
  double upper = 0.0;  // 97.5%

  bool covers(double value) const { return lower <= value && value <= upper; }
};

struct PosteriorSummary {
  GridSpec grid;
  Eigen::VectorXd p_mean, p_sd, p_lower, p_upper;
  IntervalSummary beta0, tau, rho;
};

// Type-7 (linear interpolation) sample quantile; `values` need not be sorted.
double quantile(std::vector<double> values, double prob);
IntervalSummary summarize(const std::vector<double>& values);

PosteriorSummary posterior_summary(const PosteriorSamples& samples);

struct ParameterDiagnostic {
  std::string name;
  double rhat = 0.0;  // NaN when degenerate
  double ess = 0.0;
  bool degenerate = false;
  bool flagged = false;  // rhat > kRhatThreshold or degenerate
};

inline constexpr double kRhatThreshold = 1.05;

struct DiagnosticsReport {
  std::vector<ParameterDiagnostic> parameters;

  bool converged() const;
  double max_rhat() const;
};

// Split R-hat over chains of equal length; NaN when all within-chain variances vanish.
double split_rhat(const std::vector<std::vector<double>>& chains);
// Multi-chain effective sample size (Geyer initial monotone sequence).
double effective_sample_size(const std::vector<std::vector<double>>& chains);

// beta0, tau, rho and 10 latent cells drawn with `seed`.
DiagnosticsReport diagnostics(const PosteriorSamples& samples, std::uint64_t seed = 0);

}  // namespace spatent
