#pragma once

#include <cmath>

namespace spatent {

inline double expit(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double logit(double p) { return std::log(p / (1.0 - p)); }

// log(1 + exp(x)) without overflow.
inline double log1p_exp(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

// Bernoulli log-likelihood of outcome y in {0,1} at logit eta.
inline double bernoulli_logit_loglik(int y, double eta) { return y * eta - log1p_exp(eta); }

}  // namespace spatent
