#pragma once

// Brute-force references shared by the unit tests and the acceptance binary.
// None of them calls into the library code they check.

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/chi_squared.hpp>

#include "dense_oracle.hpp"

namespace spatent::testing {

// Plug-in entropy from an explicit sample of category labels.
// Labels are small non-negative integers.
inline double sample_entropy(const std::vector<int>& labels) {
  std::vector<long> freq;
  for (int l : labels) {
    if (l >= static_cast<int>(freq.size())) freq.resize(l + 1, 0);
    ++freq[l];
  }
  long double h = 0.0L;
  const long double n = static_cast<long double>(labels.size());
  for (long c : freq) {
    if (c == 0) continue;
    const long double p = c / n;
    h -= p * std::log(p);
  }
  return static_cast<double>(h);
}

inline std::vector<int> expand(const std::vector<std::int64_t>& counts) {
  std::vector<int> labels;
  for (std::size_t i = 0; i < counts.size(); ++i)
    for (std::int64_t k = 0; k < counts[i]; ++k) labels.push_back(static_cast<int>(i));
  return labels;
}

inline double brute_plugin(const std::vector<std::int64_t>& counts) {
  return sample_entropy(expand(counts));
}

inline double brute_miller_madow(const std::vector<std::int64_t>& counts) {
  const auto labels = expand(counts);
  std::map<int, long> seen;
  for (int l : labels) ++seen[l];
  return sample_entropy(labels) + (static_cast<double>(seen.size()) - 1.0) / (2.0 * labels.size());
}

// All n leave-one-out samples, built explicitly.
inline double brute_jackknife(const std::vector<std::int64_t>& counts) {
  const auto labels = expand(counts);
  const std::size_t n = labels.size();
  long double loo = 0.0L;
  for (std::size_t drop = 0; drop < n; ++drop) {
    std::vector<int> rest;
    rest.reserve(n - 1);
    for (std::size_t i = 0; i < n; ++i)
      if (i != drop) rest.push_back(labels[i]);
    loo += sample_entropy(rest);
  }
  return static_cast<double>(n * static_cast<long double>(sample_entropy(labels)) -
                             (n - 1) * (loo / n));
}

// Calls `visit` for every count vector of length `categories` with total in [1, max_n].
inline void for_each_count_vector(int categories, int max_n,
                                  const std::function<void(const std::vector<std::int64_t>&)>& visit) {
  std::vector<std::int64_t> counts(categories, 0);
  std::function<void(int, int)> rec = [&](int i, int remaining) {
    if (i == categories - 1) {
      for (int last = 0; last <= remaining; ++last) {
        counts[i] = last;
        std::int64_t total = 0;
        for (auto c : counts) total += c;
        if (total >= 1) visit(counts);
      }
      return;
    }
    for (int c = 0; c <= remaining; ++c) {
      counts[i] = c;
      rec(i + 1, remaining - c);
    }
  };
  rec(0, max_n);
}

// Stationary law of the systematic-scan Gibbs kernel for the centered
// autologistic model, by exhaustive enumeration of the 2^n states. Returns the
// per-cell marginal P(x_u = 1).
inline Eigen::VectorXd autologistic_scan_marginals(const GridSpec& grid, Scheme scheme,
                                                   double beta0, double eta) {
  const int n = grid.size();
  const int states = 1 << n;
  const Eigen::MatrixXd a = dense_adjacency(grid, scheme);
  const double mu = 1.0 / (1.0 + std::exp(-beta0));
  auto conditional = [&](int state, int u) {
    double s = 0.0;
    for (int v = 0; v < n; ++v)
      if (a(u, v) != 0.0) s += ((state >> v) & 1) - mu;
    return 1.0 / (1.0 + std::exp(-(beta0 + eta * s)));
  };
  // Kernel of one full sweep as a product of single-site kernels, applied to a
  // distribution vector; iterate to the fixed point.
  Eigen::VectorXd pi = Eigen::VectorXd::Constant(states, 1.0 / states);
  for (int iter = 0; iter < 10000; ++iter) {
    Eigen::VectorXd next = pi;
    for (int u = 0; u < n; ++u) {
      Eigen::VectorXd moved = Eigen::VectorXd::Zero(states);
      for (int s = 0; s < states; ++s) {
        if (next[s] == 0.0) continue;
        const double p1 = conditional(s, u);
        moved[s | (1 << u)] += next[s] * p1;
        moved[s & ~(1 << u)] += next[s] * (1.0 - p1);
      }
      next = moved;
    }
    const double change = (next - pi).cwiseAbs().sum();
    pi = next;
    if (change < 1e-15) break;
  }
  Eigen::VectorXd marginal = Eigen::VectorXd::Zero(n);
  for (int s = 0; s < states; ++s)
    for (int u = 0; u < n; ++u)
      if ((s >> u) & 1) marginal[u] += pi[s];
  return marginal;
}

// Same marginals from the joint Gibbs distribution the conditionals imply:
// P(x) ~ exp(sum_u (beta0 - eta mu d_u) x_u + eta sum_{u~v} x_u x_v).
inline Eigen::VectorXd autologistic_joint_marginals(const GridSpec& grid, Scheme scheme,
                                                    double beta0, double eta) {
  const int n = grid.size();
  const Eigen::MatrixXd a = dense_adjacency(grid, scheme);
  const Eigen::VectorXd d = a.rowwise().sum();
  const double mu = 1.0 / (1.0 + std::exp(-beta0));
  Eigen::VectorXd marginal = Eigen::VectorXd::Zero(n);
  double z = 0.0;
  for (int s = 0; s < (1 << n); ++s) {
    double e = 0.0;
    for (int u = 0; u < n; ++u) {
      if (!((s >> u) & 1)) continue;
      e += beta0 - eta * mu * d[u];
      for (int v = u + 1; v < n; ++v)
        if (a(u, v) != 0.0 && ((s >> v) & 1)) e += eta;
    }
    const double w = std::exp(e);
    z += w;
    for (int u = 0; u < n; ++u)
      if ((s >> u) & 1) marginal[u] += w;
  }
  return marginal / z;
}

inline double chi_square_sf(double x, int k) {
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared(k), x));
}

}  // namespace spatent::testing
