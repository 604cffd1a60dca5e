#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "spatent/infer.hpp"
#include "spatent/numeric.hpp"

namespace spatent {

double quantile(std::vector<double> values, double prob) {
  if (values.empty()) throw std::invalid_argument("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double h = (values.size() - 1) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - lo) * (values[hi] - values[lo]);
}

IntervalSummary summarize(const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("cannot summarize an empty sample");
  IntervalSummary out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / values.size();
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  out.sd = values.size() > 1 ? std::sqrt(ss / (values.size() - 1)) : 0.0;
  out.lower = quantile(values, 0.025);
  out.upper = quantile(values, 0.975);
  return out;
}

PosteriorSummary posterior_summary(const PosteriorSamples& samples) {
  if (samples.rows() == 0) throw std::invalid_argument("posterior_summary: no draws");
  const int n = samples.cells();
  const int rows = samples.rows();
  PosteriorSummary out;
  out.grid = samples.grid;
  out.p_mean.resize(n);
  out.p_sd.resize(n);
  out.p_lower.resize(n);
  out.p_upper.resize(n);

  std::vector<double> column(rows);
  for (int c = 0; c < kHyperColumns; ++c) {
    for (int r = 0; r < rows; ++r) column[r] = samples.draws(r, c);
    (c == 0 ? out.beta0 : c == 1 ? out.tau : out.rho) = summarize(column);
  }
  for (int u = 0; u < n; ++u) {
    for (int r = 0; r < rows; ++r) {
      column[r] = expit(samples.draws(r, 0) + samples.draws(r, kHyperColumns + u));
    }
    const auto s = summarize(column);
    out.p_mean[u] = s.mean;
    out.p_sd[u] = s.sd;
    out.p_lower[u] = s.lower;
    out.p_upper[u] = s.upper;
  }
  return out;
}

}  // namespace spatent
