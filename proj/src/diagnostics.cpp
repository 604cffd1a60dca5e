#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "spatent/infer.hpp"
#include "spatent/random.hpp"

namespace spatent {

namespace {

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double variance(const std::vector<double>& v, double m) {
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return ss / static_cast<double>(v.size() - 1);
}

std::vector<std::vector<double>> split_halves(const std::vector<std::vector<double>>& chains) {
  std::vector<std::vector<double>> out;
  for (const auto& c : chains) {
    const std::size_t half = c.size() / 2;
    out.emplace_back(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(half));
    out.emplace_back(c.end() - static_cast<std::ptrdiff_t>(half), c.end());
  }
  return out;
}

// Autocovariance at lags 0..n-1 (biased estimator, direct sum).
std::vector<double> autocovariance(const std::vector<double>& x) {
  const std::size_t n = x.size();
  const double m = mean(x);
  std::vector<double> out(n, 0.0);
  for (std::size_t lag = 0; lag < n; ++lag) {
    double acc = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) acc += (x[i] - m) * (x[i + lag] - m);
    out[lag] = acc / static_cast<double>(n);
  }
  return out;
}

void check_chains(const std::vector<std::vector<double>>& chains) {
  if (chains.empty()) throw std::invalid_argument("no chains supplied");
  for (const auto& c : chains) {
    if (c.size() != chains.front().size() || c.size() < 4) {
      throw std::invalid_argument("chains must have equal length >= 4");
    }
  }
}

}  // namespace

double split_rhat(const std::vector<std::vector<double>>& chains) {
  check_chains(chains);
  const auto halves = split_halves(chains);
  const double m = static_cast<double>(halves.size());
  const double n = static_cast<double>(halves.front().size());
  std::vector<double> means;
  double within = 0.0;
  for (const auto& h : halves) {
    means.push_back(mean(h));
    within += variance(h, means.back());
  }
  within /= m;
  const double grand = mean(means);
  double between = 0.0;
  for (double mu : means) between += (mu - grand) * (mu - grand);
  between *= n / (m - 1.0);
  if (!(within > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  const double var_plus = (n - 1.0) / n * within + between / n;
  return std::sqrt(var_plus / within);
}

double effective_sample_size(const std::vector<std::vector<double>>& chains) {
  check_chains(chains);
  const auto m = chains.size();
  const auto n = chains.front().size();
  std::vector<std::vector<double>> acov;
  std::vector<double> means;
  double within = 0.0;
  for (const auto& c : chains) {
    acov.push_back(autocovariance(c));
    means.push_back(mean(c));
    within += acov.back()[0] * n / (n - 1.0);
  }
  within /= static_cast<double>(m);
  double var_plus = within * (n - 1.0) / n;
  if (m > 1) {
    const double grand = mean(means);
    double between = 0.0;
    for (double mu : means) between += (mu - grand) * (mu - grand);
    var_plus += between / (m - 1.0);
  }
  if (!(var_plus > 0.0)) return std::numeric_limits<double>::quiet_NaN();

  auto rho = [&](std::size_t lag) {
    double acc = 0.0;
    for (const auto& a : acov) acc += a[lag];
    return 1.0 - (within - acc / static_cast<double>(m)) / var_plus;
  };
  // Geyer: sum paired autocorrelations while positive, enforcing monotonicity.
  double tau = -1.0;
  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t + 1 < n; t += 2) {
    double pair = rho(t) + rho(t + 1);
    if (pair <= 0.0) break;
    pair = std::min(pair, previous);
    previous = pair;
    tau += 2.0 * pair;
  }
  tau = std::max(tau, 1.0 / std::log10(static_cast<double>(m * n)));
  return static_cast<double>(m * n) / tau;
}

bool DiagnosticsReport::converged() const {
  return std::none_of(parameters.begin(), parameters.end(),
                      [](const ParameterDiagnostic& p) { return p.flagged; });
}

double DiagnosticsReport::max_rhat() const {
  double out = 0.0;
  for (const auto& p : parameters)
    if (!p.degenerate) out = std::max(out, p.rhat);
  return out;
}

DiagnosticsReport diagnostics(const PosteriorSamples& samples, std::uint64_t seed) {
  if (samples.chains < 2) throw std::invalid_argument("diagnostics need at least two chains");
  std::vector<int> columns{0, 1, 2};
  if (samples.cells() > 0) {
    Rng rng = make_stream(seed, 0xD1A6u);
    std::vector<int> cells(samples.cells());
    std::iota(cells.begin(), cells.end(), 0);
    std::shuffle(cells.begin(), cells.end(), rng);
    cells.resize(std::min<std::size_t>(10, cells.size()));
    std::sort(cells.begin(), cells.end());
    for (int u : cells) columns.push_back(kHyperColumns + u);
  }

  DiagnosticsReport report;
  for (int col : columns) {
    std::vector<std::vector<double>> chains;
    for (int c = 0; c < samples.chains; ++c) chains.push_back(samples.chain_column(col, c));
    ParameterDiagnostic d;
    d.name = samples.columns.at(col);
    d.rhat = split_rhat(chains);
    d.degenerate = std::isnan(d.rhat);
    d.ess = d.degenerate ? 0.0 : effective_sample_size(chains);
    d.flagged = d.degenerate || d.rhat > kRhatThreshold;
    report.parameters.push_back(d);
  }
  return report;
}

}  // namespace spatent
