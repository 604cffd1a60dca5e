#include "spatent/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "spatent/numeric.hpp"

namespace spatent {

namespace {

double xlog_inv_x(double p) { return p > 0.0 ? -p * std::log(p) : 0.0; }

std::int64_t total(std::span<const std::int64_t> counts) {
  if (counts.size() < 2) throw std::invalid_argument("need at least two categories");
  std::int64_t n = 0;
  for (auto c : counts) {
    if (c < 0) throw std::invalid_argument("counts must be non-negative");
    n += c;
  }
  if (n < 1) throw std::invalid_argument("counts must sum to at least 1");
  return n;
}

// Plug-in entropy of counts with total n, category `minus` reduced by one
// when minus >= 0.
double plugin_from(std::span<const std::int64_t> counts, std::int64_t n, int minus) {
  const double m = static_cast<double>(n - (minus >= 0 ? 1 : 0));
  double h = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const auto c = counts[i] - (static_cast<int>(i) == minus ? 1 : 0);
    h += xlog_inv_x(static_cast<double>(c) / m);
  }
  return h;
}

std::vector<double> ranks(const Eigen::VectorXd& v) {
  std::vector<int> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

double shannon_entropy(std::span<const double> pmf) {
  if (pmf.size() < 2) throw std::invalid_argument("a pmf needs at least two categories");
  double sum = 0.0;
  for (double p : pmf) {
    if (!(p >= 0.0)) throw std::invalid_argument("probabilities must be non-negative");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("probabilities must sum to 1");
  double h = 0.0;
  for (double p : pmf) h += xlog_inv_x(p);
  return h;
}

double plugin_estimator(std::span<const std::int64_t> counts) {
  return plugin_from(counts, total(counts), -1);
}

double miller_madow(std::span<const std::int64_t> counts) {
  const auto n = total(counts);
  const auto observed = std::count_if(counts.begin(), counts.end(), [](auto c) { return c > 0; });
  return plugin_from(counts, n, -1) + static_cast<double>(observed - 1) / (2.0 * n);
}

double jackknife_estimator(std::span<const std::int64_t> counts) {
  const auto n = total(counts);
  if (n < 2) throw std::invalid_argument("jackknife needs at least two observations");
  // Removing any one of the n_i observations in category i gives the same
  // estimate, so the leave-one-out mean is weighted by n_i / n.
  double loo = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] == 0) continue;
    loo += static_cast<double>(counts[i]) / n * plugin_from(counts, n, static_cast<int>(i));
  }
  return n * plugin_from(counts, n, -1) - (n - 1) * loo;
}

double local_entropy(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("probability outside [0, 1]");
  return xlog_inv_x(p) + xlog_inv_x(1.0 - p);
}

EntropySurface entropy_surface_point(const PosteriorSummary& summary) {
  EntropySurface out;
  out.grid = summary.grid;
  out.point = summary.p_mean.unaryExpr([](double p) { return local_entropy(p); });
  return out;
}

EntropySurface posterior_entropy_surface(const PosteriorSamples& samples) {
  if (samples.rows() == 0) throw std::invalid_argument("posterior_entropy_surface: no draws");
  const int n = samples.cells();
  const int rows = samples.rows();
  EntropySurface out;
  out.grid = samples.grid;
  out.point.resize(n);
  out.mean.resize(n);
  out.sd.resize(n);
  out.lower.resize(n);
  out.upper.resize(n);
  std::vector<double> h(rows);
  for (int u = 0; u < n; ++u) {
    double p_sum = 0.0;
    for (int r = 0; r < rows; ++r) {
      const double p = expit(samples.draws(r, 0) + samples.draws(r, kHyperColumns + u));
      p_sum += p;
      h[r] = local_entropy(p);
    }
    const auto s = summarize(h);
    out.point[u] = local_entropy(p_sum / rows);
    out.mean[u] = s.mean;
    out.sd[u] = s.sd;
    out.lower[u] = s.lower;
    out.upper[u] = s.upper;
  }
  return out;
}

SurfaceStats surface_stats(const Eigen::VectorXd& layer) {
  SurfaceStats s;
  s.mean = layer.mean();
  s.sd = layer.size() > 1 ? std::sqrt((layer.array() - s.mean).square().sum() / (layer.size() - 1))
                          : 0.0;
  s.min = layer.minCoeff();
  s.max = layer.maxCoeff();
  return s;
}

double spearman(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size() || a.size() < 2) throw std::invalid_argument("spearman: size mismatch");
  const auto ra = ranks(a);
  const auto rb = ranks(b);
  const Eigen::Map<const Eigen::VectorXd> x(ra.data(), static_cast<Eigen::Index>(ra.size()));
  const Eigen::Map<const Eigen::VectorXd> y(rb.data(), static_cast<Eigen::Index>(rb.size()));
  const Eigen::VectorXd xc = x.array() - x.mean();
  const Eigen::VectorXd yc = y.array() - y.mean();
  const double denom = std::sqrt(xc.squaredNorm() * yc.squaredNorm());
  return denom > 0.0 ? xc.dot(yc) / denom : 0.0;
}

}  // namespace spatent
