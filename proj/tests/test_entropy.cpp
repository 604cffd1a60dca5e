#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "spatent/entropy.hpp"
#include "spatent/numeric.hpp"

using namespace spatent;

namespace {

const double kLog2 = std::log(2.0);

double counts_plugin(std::vector<std::int64_t> c) { return plugin_estimator(c); }

// Average ranks by counting, then a plain Pearson correlation.
double slow_spearman(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const int n = static_cast<int>(a.size());
  auto ranks = [n](const Eigen::VectorXd& x) {
    Eigen::VectorXd r(n);
    for (int i = 0; i < n; ++i) {
      double below = 0, equal = 0;
      for (int j = 0; j < n; ++j) {
        below += x[j] < x[i];
        equal += x[j] == x[i];
      }
      r[i] = below + (equal + 1) / 2.0;
    }
    return r;
  };
  const Eigen::VectorXd ra = ranks(a), rb = ranks(b);
  const Eigen::VectorXd ca = ra.array() - ra.mean(), cb = rb.array() - rb.mean();
  return ca.dot(cb) / std::sqrt(ca.squaredNorm() * cb.squaredNorm());
}

}  // namespace

TEST_CASE("shannon entropy examples") {
  const std::vector<double> half{0.5, 0.5}, one{1.0, 0.0}, skew{0.9, 0.1};
  CHECK(shannon_entropy(half) == doctest::Approx(kLog2).epsilon(1e-15));
  CHECK(shannon_entropy(one) == 0.0);
  CHECK(shannon_entropy(skew) == doctest::Approx(0.325083).epsilon(1e-6));
  CHECK_THROWS_AS(shannon_entropy(std::vector<double>{1.0}), std::invalid_argument);
  CHECK_THROWS_AS(shannon_entropy(std::vector<double>{0.6, 0.6}), std::invalid_argument);
  CHECK_THROWS_AS(shannon_entropy(std::vector<double>{1.2, -0.2}), std::invalid_argument);
}

TEST_CASE("shannon entropy properties") {
  std::mt19937_64 rng(11);
  std::gamma_distribution<double> g(0.7);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = 2 + trial % 6;
    std::vector<double> p(k);
    for (auto& v : p) v = g(rng);
    if (trial % 4 == 0) p[0] = 0.0;
    const double total = std::accumulate(p.begin(), p.end(), 0.0);
    for (auto& v : p) v /= total;
    const double h = shannon_entropy(p);
    CHECK(h >= 0.0);
    CHECK(h < std::log(k));
    auto shuffled = p;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    CHECK(shannon_entropy(shuffled) == doctest::Approx(h).epsilon(1e-14));
  }
  for (int k = 2; k <= 8; ++k) {
    const std::vector<double> uniform(k, 1.0 / k);
    CHECK(shannon_entropy(uniform) == doctest::Approx(std::log(k)).epsilon(1e-14));
    std::vector<double> point(k, 0.0);
    point[k / 2] = 1.0;
    CHECK(shannon_entropy(point) == 0.0);
  }
}

TEST_CASE("estimator examples") {
  CHECK(counts_plugin({2, 2}) == doctest::Approx(kLog2).epsilon(1e-15));
  CHECK(counts_plugin({4, 0}) == 0.0);
  CHECK(counts_plugin({9, 1}) == doctest::Approx(0.325083).epsilon(1e-6));

  const std::vector<std::int64_t> even{2, 2}, flat{4, 0}, skew{9, 1};
  CHECK(miller_madow(even) == doctest::Approx(kLog2 + 0.125).epsilon(1e-15));
  CHECK(miller_madow(flat) == 0.0);
  CHECK(miller_madow(skew) == doctest::Approx(0.375083).epsilon(1e-6));

  CHECK(jackknife_estimator(flat) == 0.0);
  CHECK(std::abs(jackknife_estimator(even) - testing::brute_jackknife(even)) < 1e-12);
  CHECK(std::abs(jackknife_estimator(skew) - testing::brute_jackknife(skew)) < 1e-12);

  CHECK_THROWS_AS(jackknife_estimator(std::vector<std::int64_t>{1, 0}), std::invalid_argument);
  CHECK_THROWS_AS(plugin_estimator(std::vector<std::int64_t>{0, 0}), std::invalid_argument);
  CHECK_THROWS_AS(miller_madow(std::vector<std::int64_t>{3, -1}), std::invalid_argument);
}

TEST_CASE("estimators agree with brute force on small count vectors") {
  int cases = 0;
  for (int categories = 2; categories <= 3; ++categories) {
    testing::for_each_count_vector(categories, 20, [&](const std::vector<std::int64_t>& c) {
      std::int64_t n = 0, support = 0;
      for (auto v : c) {
        n += v;
        support += v > 0;
      }
      const double plug = plugin_estimator(c);
      CHECK(std::abs(plug - testing::brute_plugin(c)) < 1e-12);
      CHECK(std::abs(miller_madow(c) - testing::brute_miller_madow(c)) < 1e-12);
      CHECK(miller_madow(c) - plug == doctest::Approx((support - 1) / (2.0 * n)).epsilon(1e-12));
      if (n >= 2) CHECK(std::abs(jackknife_estimator(c) - testing::brute_jackknife(c)) < 1e-12);
      ++cases;
    });
  }
  CHECK(cases > 1000);
}

TEST_CASE("plug-in is invariant to scaling the counts") {
  for (std::int64_t a = 0; a <= 12; ++a) {
    for (std::int64_t b = 1; b <= 12; ++b) {
      for (std::int64_t k : {2, 3, 7, 100}) {
        CHECK(counts_plugin({k * a, k * b}) == doctest::Approx(counts_plugin({a, b})).epsilon(1e-13));
      }
    }
  }
}

TEST_CASE("local entropy") {
  CHECK(local_entropy(0.5) == doctest::Approx(kLog2).epsilon(1e-15));
  CHECK(local_entropy(0.0) == 0.0);
  CHECK(local_entropy(1.0) == 0.0);
  CHECK(local_entropy(0.25) == doctest::Approx(0.562335).epsilon(1e-6));
  for (int i = 0; i <= 1000; ++i) {
    const double p = i / 1000.0;
    const double h = local_entropy(p);
    CHECK(h >= 0.0);
    CHECK(h <= kLog2);
    CHECK(h == doctest::Approx(local_entropy(1.0 - p)).epsilon(1e-14));
    const std::vector<double> pmf{p, 1.0 - p};
    CHECK(h == doctest::Approx(shannon_entropy(pmf)).epsilon(1e-14));
  }
  CHECK(local_entropy(1e-300) > 0.0);
  CHECK_THROWS_AS(local_entropy(-0.1), std::invalid_argument);
  CHECK_THROWS_AS(local_entropy(1.1), std::invalid_argument);
}

TEST_CASE("point surface") {
  PosteriorSummary s;
  s.grid = GridSpec(3, 4);
  s.p_mean = Eigen::VectorXd::Constant(12, 0.5);
  auto surface = entropy_surface_point(s);
  CHECK_FALSE(surface.has_posterior_layers());
  for (int u = 0; u < 12; ++u) CHECK(surface.point[u] == doctest::Approx(kLog2).epsilon(1e-15));

  s.p_mean = Eigen::VectorXd::LinSpaced(12, 0.0, 1.0);
  surface = entropy_surface_point(s);
  for (int u = 0; u < 12; ++u) CHECK(surface.point[u] == local_entropy(s.p_mean[u]));
}

TEST_CASE("posterior surface layers") {
  const GridSpec g(2, 3);
  SUBCASE("identical draws") {
    Eigen::MatrixXd draws(4, 9);
    for (int r = 0; r < 4; ++r) draws.row(r) << -0.3, 1.0, 0.5, 0.1, 0.4, -2.0, 0.0, 0.7, 1.1;
    const auto surface = posterior_entropy_surface(make_samples(g, draws, {0, 0, 1, 1}));
    CHECK(surface.sd.isZero());
    CHECK(surface.mean.isApprox(surface.point, 1e-15));
    CHECK(surface.lower == surface.upper);
  }
  SUBCASE("two draws at one half") {
    const Eigen::MatrixXd draws = Eigen::MatrixXd::Zero(2, 9);
    const auto surface = posterior_entropy_surface(make_samples(g, draws, {0, 1}));
    for (int u = 0; u < 6; ++u) {
      CHECK(surface.mean[u] == doctest::Approx(kLog2).epsilon(1e-15));
      CHECK(surface.sd[u] == 0.0);
    }
  }
  SUBCASE("entropy of the mean exceeds the mean of entropies near one half") {
    Rng rng = make_stream(4, 2);
    Eigen::MatrixXd draws(300, 9);
    for (int r = 0; r < 300; ++r) {
      draws(r, 0) = 0.0;
      draws(r, 1) = 1.0;
      draws(r, 2) = 0.0;
      // logits within +-0.8, so p stays inside [0.31, 0.69]
      for (int c = 3; c < 9; ++c) draws(r, c) = 0.8 * std::tanh(standard_normal(rng) + 0.2 * c);
    }
    const auto surface = posterior_entropy_surface(make_samples(g, draws, std::vector<int>(300, 0)));
    for (int u = 0; u < 6; ++u) {
      double mean_p = 0.0, mean_h = 0.0;
      for (int r = 0; r < 300; ++r) {
        const double p = expit(draws(r, 3 + u));
        mean_p += p / 300;
        mean_h += local_entropy(p) / 300;
      }
      CHECK(surface.mean[u] == doctest::Approx(mean_h).epsilon(1e-12));
      CHECK(surface.point[u] == doctest::Approx(local_entropy(mean_p)).epsilon(1e-12));
      CHECK(surface.mean[u] <= surface.point[u]);
      CHECK(surface.lower[u] <= surface.mean[u]);
      CHECK(surface.mean[u] <= surface.upper[u]);
      CHECK(surface.upper[u] <= kLog2);
    }
  }
}

TEST_CASE("surface stats") {
  Eigen::VectorXd v(4);
  v << 1.0, 2.0, 3.0, 4.0;
  const auto s = surface_stats(v);
  CHECK(s.mean == 2.5);
  CHECK(s.min == 1.0);
  CHECK(s.max == 4.0);
  CHECK(s.sd == doctest::Approx(std::sqrt(5.0 / 3.0)));
}

TEST_CASE("spearman correlation") {
  Eigen::VectorXd a(5), b(5);
  a << 1, 2, 3, 4, 5;
  b << 10, 20, 30, 40, 50;
  CHECK(spearman(a, b) == doctest::Approx(1.0));
  CHECK(spearman(a, -b) == doctest::Approx(-1.0));
  b << 1, 100, 2, 1000, 3;  // monotone transforms don't matter
  CHECK(spearman(a, b.array().exp().matrix()) == doctest::Approx(spearman(a, b)));

  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> small(0, 4);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd x(30), y(30);
    for (int i = 0; i < 30; ++i) {
      x[i] = small(rng);
      y[i] = small(rng) + 0.5 * x[i];
    }
    CHECK(spearman(x, y) == doctest::Approx(slow_spearman(x, y)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(spearman(a, Eigen::VectorXd::Zero(4)), std::invalid_argument);
}
