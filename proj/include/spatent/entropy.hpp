#pragma once

#include <cstdint>
#include <span>
#include <string>

#include <Eigen/Core>

#include "spatent/infer.hpp"
#include "spatent/lattice.hpp"

namespace spatent {

// Entropies are in nats.

// H = sum p_i log(1/p_i), with 0 log(1/0) = 0. Throws std::invalid_argument
// unless the pmf has >= 2 non-negative entries summing to 1 (within 1e-12).
double shannon_entropy(std::span<const double> pmf);

// Counts need n = sum >= 1 (>= 2 for the jackknife).
double plugin_estimator(std::span<const std::int64_t> counts);
// plug-in + (I+ - 1) / (2n), I+ = categories with a positive count.
double miller_madow(std::span<const std::int64_t> counts);
// n H_plugin - (n - 1) * mean of the n leave-one-out plug-in estimates.
double jackknife_estimator(std::span<const std::int64_t> counts);

// Binary entropy p log(1/p) + (1-p) log(1/(1-p)) for p in [0, 1].
double local_entropy(double p);

struct EntropySurface {
  GridSpec grid;
  // local_entropy of the posterior mean success probability.
  Eigen::VectorXd point;
  // Summaries over draws of local_entropy(expit(beta0 + phi_u)); empty for a
  // point-only surface.
  Eigen::VectorXd mean, sd, lower, upper;

  bool has_posterior_layers() const { return mean.size() > 0; }
};

EntropySurface entropy_surface_point(const PosteriorSummary& summary);
// Fills every layer; the point layer uses the posterior mean of p_u.
EntropySurface posterior_entropy_surface(const PosteriorSamples& samples);

struct SurfaceStats {
  double mean = 0.0;
  double sd = 0.0;
  double min = 0.0;
  double max = 0.0;
};
SurfaceStats surface_stats(const Eigen::VectorXd& layer);

// Spearman rank correlation with average ranks for ties.
double spearman(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

}  // namespace spatent
