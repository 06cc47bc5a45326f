#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "msa/maxent.hpp"
#include "msa/rng.hpp"
#include "test_util.hpp"

using namespace msa;

namespace {

Dataset random_domain_data(Rng& rng, int m, int p, int d) {
  std::vector<Sample> samples;
  for (int i = 0; i < m; ++i) {
    Sample s;
    for (int j = 0; j < d; ++j) s.x.push_back(rng.normal());
    s.domain = i < p ? i : static_cast<int>(rng.below(static_cast<std::uint64_t>(p)));
    samples.push_back(std::move(s));
  }
  return Dataset(std::move(samples), p);
}

// Unstabilized reference implementation of the objective.
double naive_objective(const FeatureMap& fmap, std::span<const double> w,
                       const Dataset& data, double mu) {
  const int p = fmap.num_domains();
  std::vector<double> block(static_cast<std::size_t>(fmap.block_dim()));
  double total = 0.0;
  for (const Sample& s : data.samples()) {
    fmap.block_features(s.x, block);
    double z = 0.0;
    for (int k = 0; k < p; ++k) z += std::exp(fmap.logit(w, block, k));
    total += -std::log(std::exp(fmap.logit(w, block, *s.domain)) / z);
  }
  double reg = 0.0;
  for (double v : w) reg += v * v;
  return mu * reg + total / static_cast<double>(data.size());
}

}  // namespace

TEST_CASE("objective at w = 0 is log p") {
  Rng rng(5);
  for (int p : {2, 5}) {
    const Dataset data = random_domain_data(rng, 40, p, 2);
    const FeatureMap fmap = FeatureMap::per_class_linear(p, 2);
    const std::vector<double> w(static_cast<std::size_t>(fmap.output_dim()), 0.0);
    CHECK(maxent_objective(fmap, w, data, 0.5) ==
          doctest::Approx(std::log(static_cast<double>(p))).epsilon(1e-14));
  }
}

TEST_CASE("objective matches a naive reference") {
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const int p = 2 + static_cast<int>(rng.below(3));
    const Dataset data = random_domain_data(rng, 20, p, 2);
    const FeatureMap fmap = FeatureMap::per_class_linear(p, 2);
    std::vector<double> w(static_cast<std::size_t>(fmap.output_dim()));
    for (double& v : w) v = 0.5 * rng.normal();
    const double mu = 0.1 * rng.uniform01();
    CHECK(maxent_objective(fmap, w, data, mu) ==
          doctest::Approx(naive_objective(fmap, w, data, mu)).epsilon(1e-12));
  }
}

TEST_CASE("gradient matches central finite differences") {
  Rng rng(23);
  for (int trial = 0; trial < 25; ++trial) {
    const int p = 2 + static_cast<int>(rng.below(3));
    const int d = 1 + static_cast<int>(rng.below(3));
    const Dataset data = random_domain_data(rng, 10 + static_cast<int>(rng.below(40)), p, d);
    const FeatureMap fmap = FeatureMap::per_class_linear(p, d);
    std::vector<double> w(static_cast<std::size_t>(fmap.output_dim()));
    for (double& v : w) v = 0.3 * rng.normal();
    const double mu = 0.05 * rng.uniform01();

    const std::vector<double> grad = maxent_gradient(fmap, w, data, mu);
    const double step = 1e-5;
    double err2 = 0.0, norm2 = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      std::vector<double> plus = w, minus = w;
      plus[i] += step;
      minus[i] -= step;
      const double fd = (maxent_objective(fmap, plus, data, mu) -
                         maxent_objective(fmap, minus, data, mu)) /
                        (2.0 * step);
      err2 += (fd - grad[i]) * (fd - grad[i]);
      norm2 += grad[i] * grad[i];
    }
    CHECK(std::sqrt(err2) <= 1e-5 * std::max(1.0, std::sqrt(norm2)));
  }
}

TEST_CASE("regularizer contributes 2 mu w to the gradient") {
  Rng rng(31);
  const Dataset data = random_domain_data(rng, 30, 2, 2);
  const FeatureMap fmap = FeatureMap::per_class_linear(2, 2);
  std::vector<double> w(static_cast<std::size_t>(fmap.output_dim()), 0.0);
  w[0] = 1.0;
  const std::vector<double> with_mu = maxent_gradient(fmap, w, data, 1.0);
  const std::vector<double> without = maxent_gradient(fmap, w, data, 0.0);
  for (std::size_t i = 0; i < w.size(); ++i) {
    CHECK(with_mu[i] - without[i] == doctest::Approx(i == 0 ? 2.0 : 0.0).epsilon(1e-14));
  }
}

TEST_CASE("objective is convex along segments") {
  Rng rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    const Dataset data = random_domain_data(rng, 25, 3, 2);
    const FeatureMap fmap = FeatureMap::per_class_linear(3, 2);
    std::vector<double> w1(static_cast<std::size_t>(fmap.output_dim()));
    std::vector<double> w2(w1.size());
    for (double& v : w1) v = rng.normal();
    for (double& v : w2) v = rng.normal();
    const double t = rng.uniform01();
    std::vector<double> mix(w1.size());
    for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = t * w1[i] + (1.0 - t) * w2[i];
    const double mu = 0.1;
    const double lhs = maxent_objective(fmap, mix, data, mu);
    const double rhs = t * maxent_objective(fmap, w1, data, mu) +
                       (1.0 - t) * maxent_objective(fmap, w2, data, mu);
    CHECK(lhs <= rhs + 1e-10);
  }
}

TEST_CASE("training reaches a first-order point") {
  Rng rng(53);
  const Dataset data = random_domain_data(rng, 60, 2, 2);
  const FeatureMap fmap = FeatureMap::per_class_linear(2, 2);
  const MaxentModel model = train_maxent(data, 0.05, fmap, 1e-8, 500, 7);
  CHECK(model.converged);
  CHECK(model.gradient_norm <= 1e-8);
  CHECK(maxent_objective(fmap, model.weights, data, 0.05) <= std::log(2.0));
  CHECK(model.feature_radius > 0.0);

  // Determinism: identical call gives bit-identical weights.
  const MaxentModel again = train_maxent(data, 0.05, fmap, 1e-8, 500, 7);
  CHECK(again.weights == model.weights);

  CHECK_THROWS_AS(train_maxent(data, -1.0, fmap), std::invalid_argument);
}

TEST_CASE("identical domains give a uniform posterior") {
  std::vector<Sample> samples;
  for (int i = 0; i < 20; ++i) {
    const double x = -1.0 + i * 0.1;
    samples.push_back({{x}, {}, 0});
    samples.push_back({{x}, {}, 1});
  }
  const Dataset data(std::move(samples), 2);
  const FeatureMap fmap = FeatureMap::per_class_linear(2, 1);
  const MaxentModel model = train_maxent(data, 0.1, fmap);
  for (double x : {-5.0, 0.0, 3.0}) {
    const FiniteDistribution q = posterior(model, std::vector<double>{x});
    CHECK(q[0] == doctest::Approx(0.5).epsilon(1e-8));
  }
}

TEST_CASE("posterior softmax properties") {
  const FeatureMap fmap = FeatureMap::per_class_linear(2, 1);
  MaxentModel model{fmap, std::vector<double>(4, 0.0), 0.0, 0.0, 0, true, 0, 0.0};

  // w = 0: uniform.
  FiniteDistribution q = posterior(model, std::vector<double>{0.3});
  CHECK(q[0] == doctest::Approx(0.5).epsilon(1e-15));

  // Logits (1, 0) at x = 0 via the per-class biases.
  model.weights = {0.0, 1.0, 0.0, 0.0};
  q = posterior(model, std::vector<double>{0.0});
  CHECK(q[0] == doctest::Approx(0.7310585786300049).epsilon(1e-14));
  CHECK(q[1] == doctest::Approx(0.2689414213699951).epsilon(1e-14));

  // Shifting every class bias by a constant leaves the posterior unchanged.
  model.weights = {0.4, 1.0 + 17.5, 0.4, 0.0 + 17.5};
  const FiniteDistribution shifted =
      posterior(model, std::vector<double>{0.0});
  CHECK(std::abs(shifted[0] - q[0]) <= 1e-12);
  CHECK(std::abs(shifted[1] - q[1]) <= 1e-12);

  double sum = 0.0;
  for (int k = 0; k < 2; ++k) {
    CHECK(shifted[static_cast<std::size_t>(k)] > 0.0);
    sum += shifted[static_cast<std::size_t>(k)];
  }
  CHECK(std::abs(sum - 1.0) <= 1e-12);
}

TEST_CASE("random fourier features are deterministic and bounded") {
  const FeatureMap a = FeatureMap::random_fourier(2, 3, 32, 1.5, 99);
  const FeatureMap b = FeatureMap::random_fourier(2, 3, 32, 1.5, 99);
  Rng rng(61);
  for (int i = 0; i < 20; ++i) {
    std::vector<double> x{rng.normal(), rng.normal(), rng.normal()};
    std::vector<double> fa(static_cast<std::size_t>(a.block_dim()));
    std::vector<double> fb(static_cast<std::size_t>(b.block_dim()));
    a.block_features(x, fa);
    b.block_features(x, fb);
    CHECK(fa == fb);
    CHECK(a.feature_norm(x) <= std::sqrt(3.0) + 1e-12);
  }
}

TEST_CASE("training with random fourier features") {
  // Ring-vs-center layout in 2-D: not linearly separable, but the Fourier
  // features carry enough structure for a confident posterior.
  Rng rng(83);
  std::vector<Sample> samples;
  for (int i = 0; i < 120; ++i) {
    const double angle = 2.0 * 3.141592653589793 * rng.uniform01();
    Sample s;
    if (i % 2 == 0) {
      s.x = {0.15 * rng.normal(), 0.15 * rng.normal()};
      s.domain = 0;
    } else {
      s.x = {2.0 * std::cos(angle), 2.0 * std::sin(angle)};
      s.domain = 1;
    }
    samples.push_back(std::move(s));
  }
  const Dataset data(std::move(samples), 2);
  const FeatureMap fmap = FeatureMap::random_fourier(2, 2, 64, 1.0, 11);
  const MaxentModel model = train_maxent(data, 1e-3, fmap, 1e-7, 500, 11);
  CHECK(model.feature_radius <= std::sqrt(3.0) + 1e-12);

  const FiniteDistribution center = posterior(model, std::vector<double>{0.0, 0.0});
  const FiniteDistribution ring = posterior(model, std::vector<double>{2.0, 0.0});
  CHECK(center[0] > 0.8);
  CHECK(ring[1] > 0.8);
}

TEST_CASE("cross-validated mu is deterministic") {
  Rng rng(71);
  const Dataset data = random_domain_data(rng, 60, 2, 1);
  const FeatureMap fmap = FeatureMap::per_class_linear(2, 1);
  const std::vector<double> grid{1e-3, 1e-2, 1e-1, 1.0};
  std::vector<double> scores_a, scores_b;
  const double mu_a = select_mu_cv(data, fmap, grid, 5, 3, &scores_a);
  const double mu_b = select_mu_cv(data, fmap, grid, 5, 3, &scores_b);
  CHECK(mu_a == mu_b);
  CHECK(scores_a == scores_b);
  CHECK(std::count(grid.begin(), grid.end(), mu_a) == 1);
}

TEST_CASE("theorem 3 radius") {
  CHECK(theorem3_radius(1.0, 1.0, 8, std::exp(-1.0)) ==
        doctest::Approx(2.0).epsilon(1e-13));
  CHECK(theorem3_radius(0.0, 1.0, 100, 0.5) == 0.0);
  CHECK(theorem3_radius(0.5, 0.1, 400, 0.05) ==
        doctest::Approx(0.9654900982634779).epsilon(1e-13));
  // Quadrupling m halves the radius.
  CHECK(theorem3_radius(1.0, 0.3, 4 * 500, 0.1) ==
        doctest::Approx(0.5 * theorem3_radius(1.0, 0.3, 500, 0.1)).epsilon(1e-13));
  CHECK_THROWS_AS(theorem3_radius(1.0, 0.0, 10, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(theorem3_radius(1.0, 1.0, 0, 0.1), std::invalid_argument);
}
