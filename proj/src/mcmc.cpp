// Metropolis-within-Gibbs sampler for the CAR-logit model
//   x_u ~ Bernoulli(expit(beta0 + phi_u)),  phi ~ N(0, [tau (D - rho A)]^-1).
//
// Hyperparameters live on theta = (log tau, atanh rho). One iteration runs:
//   1. theta and phi jointly: random walk on theta, phi moved autoregressively
//      in the whitened coordinates of a Gaussian approximation of phi | theta;
//   2. phi, block by block, with a Crank-Nicolson Langevin proposal
//      preconditioned by G = Q + diag(p (1 - p));
//   3. beta0 random walk;
//   4. joint shift (beta0 + c, phi - c).
// Every scale adapts by Robbins-Monro during burn-in and is frozen afterwards.
// Without step 1, tau mixes very slowly at rho near 1: given phi it is pinned
// down by roughly n/2 degrees of freedom.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include <Eigen/Cholesky>

#include "spatent/cholesky.hpp"
#include "spatent/infer.hpp"
#include "spatent/numeric.hpp"
#include "spatent/parallel.hpp"
#include "spatent/random.hpp"
#include "spatent/spectrum.hpp"

namespace spatent {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Problem {
  const BinaryField& data;
  const AdjacencyMatrix& adjacency;
  const NormalizedSpectrum& spectrum;
  Priors priors;
  Eigen::VectorXd degree;
  double sum_log_degree = 0.0;
  double sum_degree = 0.0;
  BandLayout layout;
  std::vector<std::pair<int, int>> blocks;  // position ranges
  int n = 0;
};

class Adapter {
 public:
  Adapter(double scale, double target, double max_log_scale)
      : log_scale_(std::log(scale)), target_(target), max_log_scale_(max_log_scale) {}

  double scale() const { return std::exp(log_scale_); }
  bool at_cap() const { return log_scale_ >= max_log_scale_ - 1e-9; }
  void update(double accept_prob, double gamma) {
    log_scale_ = std::clamp(log_scale_ + gamma * (accept_prob - target_), -30.0, max_log_scale_);
  }

 private:
  double log_scale_;
  double target_;
  double max_log_scale_;
};

// Running mean/covariance of the random-walk coordinates, used to shape proposals.
template <int Dim>
class RunningCovariance {
 public:
  using Vector = Eigen::Matrix<double, Dim, 1>;
  using Matrix = Eigen::Matrix<double, Dim, Dim>;

  void add(const Vector& x) {
    ++count_;
    const Vector delta = x - mean_;
    mean_ += delta / static_cast<double>(count_);
    m2_ += delta * (x - mean_).transpose();
  }

  // Lower Cholesky factor of the proposal shape; `fallback` until enough history.
  Matrix shape(const Vector& fallback_sd) const {
    Matrix cov = fallback_sd.array().square().matrix().asDiagonal();
    if (count_ >= 100) cov = m2_ / static_cast<double>(count_ - 1) + Matrix::Identity() * 1e-8;
    Eigen::LLT<Matrix> llt(cov);
    if (llt.info() != Eigen::Success) return fallback_sd.asDiagonal();
    return llt.matrixL();
  }

 private:
  long long count_ = 0;
  Vector mean_ = Vector::Zero();
  Matrix m2_ = Matrix::Zero();
};

struct Counter {
  long long proposed = 0;
  long long accepted = 0;
};

bool accept(double log_alpha, Rng& rng) {
  return std::isfinite(log_alpha) && (log_alpha >= 0.0 || std::log(uniform01(rng)) < log_alpha);
}

double accept_prob(double log_alpha) {
  if (!std::isfinite(log_alpha)) return log_alpha > 0 ? 1.0 : 0.0;
  return std::min(1.0, std::exp(log_alpha));
}

class Chain {
 public:
  Chain(const Problem& problem, const FitConfig& config, int index)
      : pb_(problem), cfg_(config), index_(index), rng_(make_stream(config.seed, 0xC4A1u, index)),
        field_adapter_(config.field_step, 0.5, 0.0),
        beta0_adapter_(config.beta0_step, 0.44, 5.0),
        shift_adapter_(config.shift_step, 0.44, 5.0),
        theta_adapter_(1.0, 0.3, 5.0),
        diag_(Eigen::VectorXd::Zero(problem.n)) {
    const CarState init = config.initial_state ? *config.initial_state : initial_state(pb_.data);
    if (init.phi.size() != pb_.n) throw std::invalid_argument("initial phi has the wrong length");
    beta0_ = init.beta0;
    log_tau_ = std::log(init.tau);
    rho_tilde_ = std::atanh(init.rho);
    phi_ = init.phi;
    refresh();
    const double lp = log_target(beta0_, log_tau_, rho_tilde_, loglik_, sum_d_, sum_a_);
    if (!std::isfinite(lp)) {
      throw SamplerError("non-finite posterior at initialization (chain " +
                         std::to_string(index) + ")");
    }
  }

  // Fills rows [first, first + retained) of `out`.
  ChainReport run(Eigen::MatrixXd& out, int first) {
    const int retained = (cfg_.iterations - cfg_.burn_in) / cfg_.thin;
    int row = first;
    for (int t = 0; t < cfg_.iterations; ++t) {
      adapting_ = t < cfg_.burn_in;
      gamma_ = std::pow(t + 1.0, -cfg_.adapt_decay);
      theta_move();
      for (auto [begin, end] : pb_.blocks) field_move(begin, end);
      beta0_move();
      shift_move();
      if (adapting_ && t >= cfg_.burn_in / 10) theta_cov_.add(Eigen::Vector2d(log_tau_, rho_tilde_));
      if (!adapting_ && (t - cfg_.burn_in + 1) % cfg_.thin == 0 && row < first + retained) {
        out(row, 0) = beta0_;
        out(row, 1) = std::exp(log_tau_);
        out(row, 2) = std::tanh(rho_tilde_);
        out.row(row).tail(pb_.n) = phi_.transpose();
        ++row;
      }
    }
    return report();
  }

 private:
  double tau() const { return std::exp(log_tau_); }
  double rho() const { return std::tanh(rho_tilde_); }

  void refresh() {
    loglik_ = loglik(beta0_, phi_);
    sum_d_ = (pb_.degree.array() * phi_.array().square()).sum();
    sum_a_ = pb_.adjacency.quadratic_form(phi_);
  }

  double loglik(double beta0, const Eigen::VectorXd& phi) const {
    double acc = 0.0;
    for (int u = 0; u < pb_.n; ++u) acc += bernoulli_logit_loglik(pb_.data.x[u], beta0 + phi[u]);
    return acc;
  }

  // log p(theta) + log|Jacobian| on the (log tau, atanh rho) scale.
  double hyper_prior(double log_tau, double rho_tilde) const {
    return pb_.priors.log_tau(std::exp(log_tau)) + log_tau + pb_.priors.log_rho_tilde(rho_tilde);
  }

  void record(Counter& counter, Adapter& adapter, double log_alpha, bool accepted) {
    if (adapting_) {
      adapter.update(accept_prob(log_alpha), gamma_);
    } else {
      ++counter.proposed;
      counter.accepted += accepted;
    }
  }

  struct Laplace {
    Eigen::VectorXd mean;
    CholeskyFactor factor;
  };

  // Gaussian approximation of phi | beta0, theta, x: a fixed number of Newton
  // steps from phi = 0, so it is a deterministic function of its arguments.
  // The precision is Q + diag(p (1 - p)) at the last linearization point.
  std::optional<Laplace> laplace(double beta0, double log_tau, double rho_tilde) {
    const double t = std::exp(log_tau);
    const double r = std::tanh(rho_tilde);
    if (!(std::abs(r) < 1.0) || !std::isfinite(t) || t <= 0.0) return std::nullopt;
    Eigen::VectorXd phi = Eigen::VectorXd::Zero(pb_.n);
    Eigen::VectorXd rhs(pb_.n);
    std::optional<CholeskyFactor> factor;
    try {
      for (int k = 0; k < cfg_.laplace_steps; ++k) {
        for (int u = 0; u < pb_.n; ++u) {
          const double p = expit(beta0 + phi[u]);
          const double w = p * (1.0 - p);
          diag_[u] = t * pb_.degree[u] + w;
          rhs[u] = w * phi[u] + pb_.data.x[u] - p;
        }
        factor = CholeskyFactor::factorize(
            assemble_band(pb_.adjacency, pb_.layout, 0, pb_.n, diag_, -t * r), pb_.layout.order);
        phi = factor->solve(rhs);
      }
    } catch (const NotPositiveDefinite&) {
      return std::nullopt;
    }
    return Laplace{std::move(phi), std::move(*factor)};
  }

  static double log_q(const Laplace& approx, const Eigen::VectorXd& phi) {
    return 0.5 * approx.factor.log_det() - 0.5 * approx.factor.whiten(phi - approx.mean).squaredNorm();
  }

  // Log posterior on the sampling scale, up to a constant.
  double log_target(double beta0, double log_tau, double rho_tilde, double loglik, double sum_d,
                    double sum_a) const {
    const double t = std::exp(log_tau);
    const double r = std::tanh(rho_tilde);
    if (!(std::abs(r) < 1.0) || !std::isfinite(t)) return kNegInf;
    const double field = 0.5 * (pb_.n * log_tau + pb_.spectrum.log_det_factor(r)) -
                         0.5 * t * (sum_d - r * sum_a);
    return loglik + field + pb_.priors.log_beta0(beta0) + hyper_prior(log_tau, rho_tilde);
  }

  void theta_move() {
    if (!cached_laplace_) cached_laplace_ = laplace(beta0_, log_tau_, rho_tilde_);
    const Eigen::Vector2d z(standard_normal(rng_), standard_normal(rng_));
    const Eigen::Vector2d proposal =
        Eigen::Vector2d(log_tau_, rho_tilde_) +
        theta_adapter_.scale() * (theta_cov_.shape(Eigen::Vector2d::Constant(cfg_.hyper_step)) * z);
    auto approx = laplace(beta0_, proposal[0], proposal[1]);
    double log_alpha = kNegInf;
    Eigen::VectorXd phi_new;
    double loglik_new = 0.0, sum_d_new = 0.0, sum_a_new = 0.0;
    if (approx && cached_laplace_) {
      // u -> sqrt(1 - s^2) u + s xi leaves N(0, I) invariant, so the move is exact
      // for a Gaussian posterior and the ratio below only corrects the approximation.
      const double s = field_adapter_.scale();
      const Eigen::VectorXd u = cached_laplace_->factor.whiten(phi_ - cached_laplace_->mean);
      const Eigen::VectorXd u_new = std::sqrt(1.0 - s * s) * u + s * standard_normals(pb_.n, rng_);
      phi_new = approx->mean + approx->factor.correlate(u_new);
      loglik_new = loglik(beta0_, phi_new);
      sum_d_new = (pb_.degree.array() * phi_new.array().square()).sum();
      sum_a_new = pb_.adjacency.quadratic_form(phi_new);
      log_alpha = log_target(beta0_, proposal[0], proposal[1], loglik_new, sum_d_new, sum_a_new) -
                  log_target(beta0_, log_tau_, rho_tilde_, loglik_, sum_d_, sum_a_) +
                  log_q(*cached_laplace_, phi_) - log_q(*approx, phi_new);
    }
    const bool ok = accept(log_alpha, rng_);
    if (ok) {
      log_tau_ = proposal[0];
      rho_tilde_ = proposal[1];
      phi_ = std::move(phi_new);
      loglik_ = loglik_new;
      sum_d_ = sum_d_new;
      sum_a_ = sum_a_new;
      cached_laplace_ = std::move(approx);
    }
    record(theta_count_, theta_adapter_, log_alpha, ok);
  }

  // Gradient of the log posterior in phi restricted to the block, plus the
  // preconditioner diagonal written into diag_.
  void block_gradient(int begin, int end, Eigen::VectorXd& grad) {
    const double t = tau();
    const double r = rho();
    for (int i = 0; i < end - begin; ++i) {
      const int u = pb_.layout.order[begin + i];
      double neighbour_sum = 0.0;
      for (int v : pb_.adjacency.neighbours(u)) neighbour_sum += phi_[v];
      const double p = expit(beta0_ + phi_[u]);
      grad[i] = pb_.data.x[u] - p - t * (pb_.degree[u] * phi_[u] - r * neighbour_sum);
      diag_[u] = t * pb_.degree[u] + p * (1.0 - p);
    }
  }

  void field_move(int begin, int end) {
    const int m = end - begin;
    const double t = tau();
    const double r = rho();
    const double s = field_adapter_.scale();
    const double a = 1.0 - std::sqrt(std::max(0.0, 1.0 - s * s));
    const std::vector<int> cells(pb_.layout.order.begin() + begin, pb_.layout.order.begin() + end);

    Eigen::VectorXd grad(m);
    block_gradient(begin, end, grad);
    const auto g = CholeskyFactor::factorize(
        assemble_band(pb_.adjacency, pb_.layout, begin, end, diag_, -t * r), cells);
    const Eigen::VectorXd phi_old = g.gather(phi_);
    Eigen::VectorXd drift = grad;
    g.solve_lower_in_place(drift);
    g.solve_upper_in_place(drift);
    const Eigen::VectorXd xi = standard_normals(m, rng_);
    Eigen::VectorXd noise = xi;
    g.solve_upper_in_place(noise);
    const Eigen::VectorXd phi_new = phi_old + a * drift + s * noise;
    const double log_q_forward = -0.5 * xi.squaredNorm() + 0.5 * g.log_det();

    double loglik_delta = 0.0;
    for (int i = 0; i < m; ++i) {
      const int u = cells[i];
      loglik_delta += bernoulli_logit_loglik(pb_.data.x[u], beta0_ + phi_new[i]) -
                      bernoulli_logit_loglik(pb_.data.x[u], beta0_ + phi_old[i]);
    }
    g.scatter(phi_new, phi_);
    const double sum_d_new = (pb_.degree.array() * phi_.array().square()).sum();
    const double sum_a_new = pb_.adjacency.quadratic_form(phi_);

    double log_alpha = kNegInf;
    try {
      Eigen::VectorXd grad_new(m);
      block_gradient(begin, end, grad_new);
      const auto g_new = CholeskyFactor::factorize(
          assemble_band(pb_.adjacency, pb_.layout, begin, end, diag_, -t * r), cells);
      Eigen::VectorXd drift_new = grad_new;
      g_new.solve_lower_in_place(drift_new);
      g_new.solve_upper_in_place(drift_new);
      const Eigen::VectorXd back = g_new.multiply_upper(phi_old - phi_new - a * drift_new);
      const double log_q_reverse = -0.5 * back.squaredNorm() / (s * s) + 0.5 * g_new.log_det();
      const double log_target = loglik_delta - 0.5 * t * ((sum_d_new - sum_d_) - r * (sum_a_new - sum_a_));
      log_alpha = log_target + log_q_reverse - log_q_forward;
    } catch (const NotPositiveDefinite&) {
    }

    const bool ok = accept(log_alpha, rng_);
    if (ok) {
      loglik_ += loglik_delta;
      sum_d_ = sum_d_new;
      sum_a_ = sum_a_new;
    } else {
      g.scatter(phi_old, phi_);
    }
    record(field_count_, field_adapter_, log_alpha, ok);
  }

  void beta0_move() {
    const double proposal = beta0_ + beta0_adapter_.scale() * standard_normal(rng_);
    const double loglik_new = loglik(proposal, phi_);
    const double log_alpha = loglik_new - loglik_ + pb_.priors.log_beta0(proposal) -
                             pb_.priors.log_beta0(beta0_);
    const bool ok = accept(log_alpha, rng_);
    if (ok) {
      beta0_ = proposal;
      loglik_ = loglik_new;
      cached_laplace_.reset();
    }
    record(beta0_count_, beta0_adapter_, log_alpha, ok);
  }

  // beta0 + c and phi - c leave every linear predictor unchanged.
  void shift_move() {
    const double c = shift_adapter_.scale() * standard_normal(rng_);
    const double weighted = pb_.degree.dot(phi_);
    const double sum_d_new = sum_d_ - 2.0 * c * weighted + c * c * pb_.sum_degree;
    const double sum_a_new = sum_a_ - 2.0 * c * weighted + c * c * pb_.sum_degree;
    const double t = tau();
    const double r = rho();
    const double log_alpha = pb_.priors.log_beta0(beta0_ + c) - pb_.priors.log_beta0(beta0_) -
                             0.5 * t * ((sum_d_new - sum_d_) - r * (sum_a_new - sum_a_));
    const bool ok = accept(log_alpha, rng_);
    if (ok) {
      beta0_ += c;
      phi_.array() -= c;
      cached_laplace_.reset();
      sum_d_ = sum_d_new;
      sum_a_ = sum_a_new;
    }
    record(shift_count_, shift_adapter_, log_alpha, ok);
  }

  ChainReport report() const {
    ChainReport out;
    out.chain = index_;
    auto add = [&](const char* name, const Counter& c, const Adapter& a) {
      MoveStats stats{name, c.proposed, c.accepted, a.scale(), a.at_cap()};
      out.moves.push_back(stats);
      if (stats.proposed == 0) return;
      const double rate = stats.rate();
      if (rate < 0.05 || (rate > 0.95 && !stats.at_scale_cap)) {
        std::ostringstream msg;
        msg << "adaptation diverged: chain " << index_ << " move " << name
            << " acceptance " << rate << " after burn-in";
        if (!out.diverged) out.divergence = msg.str();
        out.diverged = true;
      }
    };
    add("theta", theta_count_, theta_adapter_);
    add("field", field_count_, field_adapter_);
    add("beta0", beta0_count_, beta0_adapter_);
    add("shift", shift_count_, shift_adapter_);
    return out;
  }

  const Problem& pb_;
  const FitConfig& cfg_;
  int index_;
  Rng rng_;

  Adapter field_adapter_, beta0_adapter_, shift_adapter_, theta_adapter_;
  Counter field_count_, beta0_count_, shift_count_, theta_count_;
  RunningCovariance<2> theta_cov_;
  std::optional<Laplace> cached_laplace_;  // at the current (beta0, theta)
  bool adapting_ = true;
  double gamma_ = 1.0;

  double beta0_ = 0.0;
  double log_tau_ = 0.0;
  double rho_tilde_ = 0.0;
  Eigen::VectorXd phi_;
  double loglik_ = 0.0;
  double sum_d_ = 0.0;  // sum_u d_u phi_u^2
  double sum_a_ = 0.0;  // phi' A phi
  Eigen::VectorXd diag_;
};

std::vector<std::pair<int, int>> make_blocks(const GridSpec& grid, int lines) {
  const int line_length = std::min(grid.rows(), grid.cols());
  const int line_count = grid.size() / line_length;
  if (lines <= 0 || lines >= line_count) return {{0, grid.size()}};
  std::vector<std::pair<int, int>> blocks;
  for (int first = 0; first < line_count; first += lines) {
    const int last = std::min(first + lines, line_count);
    blocks.emplace_back(first * line_length, last * line_length);
  }
  return blocks;
}

}  // namespace

void FitConfig::validate() const {
  if (chains < 1) throw std::invalid_argument("chains must be >= 1");
  if (iterations < 1 || burn_in < 0 || burn_in >= iterations) {
    throw std::invalid_argument("burn-in must be smaller than the iteration count");
  }
  if (thin < 1) throw std::invalid_argument("thinning must be >= 1");
  if (!(field_step > 0.0 && field_step <= 1.0)) {
    throw std::invalid_argument("field_step must lie in (0, 1]");
  }
  if (!(beta0_step > 0.0 && shift_step > 0.0 && hyper_step > 0.0)) {
    throw std::invalid_argument("proposal scales must be positive");
  }
  if (laplace_steps < 1) throw std::invalid_argument("laplace_steps must be >= 1");
  if ((iterations - burn_in) / thin < 1) throw std::invalid_argument("no draws would be retained");
}

PosteriorSamples fit_mcmc(const BinaryField& data, const AdjacencyMatrix& adjacency,
                          const DegreeMatrix& degrees, const Priors& priors,
                          const FitConfig& config) {
  config.validate();
  priors.validate();
  if (!(data.grid == adjacency.grid()) || data.size() != adjacency.size()) {
    throw std::invalid_argument("data and adjacency are on different lattices");
  }

  const Problem problem{data,
                        adjacency,
                        normalized_spectrum(adjacency),
                        priors,
                        degrees.d,
                        degrees.sum_log(),
                        degrees.d.sum(),
                        band_layout(adjacency),
                        make_blocks(data.grid, config.block_lines),
                        data.size()};

  const int per_chain = (config.iterations - config.burn_in) / config.thin;
  Eigen::MatrixXd draws(static_cast<Eigen::Index>(per_chain) * config.chains,
                        kHyperColumns + problem.n);
  std::vector<ChainReport> reports(config.chains);
  parallel_for(config.chains, worker_count(config.workers), [&](int c) {
    Chain chain(problem, config, c);
    reports[c] = chain.run(draws, c * per_chain);
  });

  std::vector<int> labels(draws.rows());
  for (int c = 0; c < config.chains; ++c)
    std::fill_n(labels.begin() + static_cast<std::ptrdiff_t>(c) * per_chain, per_chain, c);
  PosteriorSamples samples = make_samples(data.grid, std::move(draws), std::move(labels));
  samples.chains = config.chains;
  samples.reports = std::move(reports);
  samples.seed = config.seed;

  if (config.fail_on_divergence) {
    for (const auto& r : samples.reports)
      if (r.diverged) throw SamplerError(r.divergence);
  }
  return samples;
}

}  // namespace spatent
