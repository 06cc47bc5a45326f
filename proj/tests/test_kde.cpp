#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "msa/kde.hpp"
#include "msa/rng.hpp"

using namespace msa;

namespace {

std::vector<std::vector<double>> points_1d(const std::vector<double>& xs) {
  std::vector<std::vector<double>> points;
  for (double x : xs) points.push_back({x});
  return points;
}

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> grid(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / (n - 1);
    grid[static_cast<std::size_t>(i)] = std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo)));
  }
  return grid;
}

}  // namespace

TEST_CASE("gaussian kernel values") {
  const std::vector<double> zero{0.0};
  const std::vector<double> one{1.0};
  CHECK(kernel_value(zero, zero, 1.0) ==
        doctest::Approx(0.3989422804014327).epsilon(1e-14));
  CHECK(kernel_value(zero, one, 1.0) ==
        doctest::Approx(0.24197072451914337).epsilon(1e-14));
  CHECK(kernel_value(zero, one, 1.0) == kernel_value(one, zero, 1.0));
  const std::vector<double> two{1.0, 2.0};
  CHECK_THROWS_AS(kernel_value(zero, one, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(kernel_value(zero, two, 1.0), std::invalid_argument);
}

TEST_CASE("kde density basics") {
  const KdeModel single = kde_fit(points_1d({0.7}), 0.9);
  for (double x : {-2.0, 0.0, 0.7, 3.1}) {
    const std::vector<double> point{x};
    CHECK(single.density(point) ==
          doctest::Approx(kernel_value(point, std::vector<double>{0.7}, 0.9))
              .epsilon(1e-14));
  }

  // Two centers at +-1, sigma = 1, queried at 0: two equal kernel values.
  const KdeModel pair = kde_fit(points_1d({-1.0, 1.0}), 1.0);
  CHECK(pair.density(std::vector<double>{0.0}) ==
        doctest::Approx(0.24197072451914337).epsilon(1e-14));

  // Far query: underflows toward 0 without producing NaN.
  const double far = single.density(std::vector<double>{0.7 + 100.0 * 0.9});
  CHECK(std::isfinite(far));
  CHECK(far >= 0.0);
  CHECK(far <= 1e-300);

  CHECK_THROWS_AS(kde_fit({}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(kde_fit(points_1d({1.0}), -2.0), std::invalid_argument);
}

TEST_CASE("kde density is invariant under center permutation") {
  Rng rng(19);
  std::vector<double> xs;
  for (int i = 0; i < 40; ++i) xs.push_back(rng.normal());
  const KdeModel forward = kde_fit(points_1d(xs), 0.4);
  std::vector<double> reversed(xs.rbegin(), xs.rend());
  const KdeModel backward = kde_fit(points_1d(reversed), 0.4);
  for (int i = 0; i < 25; ++i) {
    const std::vector<double> x{rng.normal() * 2.0};
    CHECK(forward.density(x) == backward.density(x));  // exact
  }
}

TEST_CASE("kde integrates to 1 in one dimension") {
  Rng rng(29);
  std::vector<double> xs;
  for (int i = 0; i < 60; ++i) xs.push_back(2.0 * rng.normal() + 0.5);
  const double sigma = 0.7;
  const KdeModel model = kde_fit(points_1d(xs), sigma);
  const double lo = *std::min_element(xs.begin(), xs.end()) - 6.0 * sigma;
  const double hi = *std::max_element(xs.begin(), xs.end()) + 6.0 * sigma;
  const int steps = 20000;
  const double h = (hi - lo) / steps;
  double integral = 0.0;
  for (int i = 0; i <= steps; ++i) {
    const double weight = (i == 0 || i == steps) ? 0.5 : 1.0;
    integral += weight * model.density(std::vector<double>{lo + i * h});
  }
  integral *= h;
  CHECK(integral >= 0.999);
  CHECK(integral <= 1.001);
}

TEST_CASE("bandwidth selection") {
  // A one-element grid returns that element.
  const std::vector<double> xs{0.1, 0.4, -0.3, 0.9, -1.2, 0.0, 0.2, 1.5, -0.7, 0.3};
  const std::vector<double> lone{0.5};
  CHECK(select_bandwidth_cv(points_1d(xs), lone, 5, 1).sigma == 0.5);

  CHECK_THROWS_AS(select_bandwidth_cv(points_1d({1.0, 2.0}), lone, 5, 1),
                  std::invalid_argument);

  // A point so remote that every candidate gives -inf held-out log density.
  const std::vector<double> remote{0.0, 1.0, 2.0, 3.0, 4.0, 1e200};
  const std::vector<double> tiny{1e-3};
  CHECK_THROWS_AS(select_bandwidth_cv(points_1d(remote), tiny, 3, 1), NumericError);
}

TEST_CASE("bandwidth selection on a standard normal sample") {
  Rng rng(37);
  std::vector<double> xs;
  for (int i = 0; i < 1000; ++i) xs.push_back(rng.normal());
  const std::vector<double> grid = log_grid(0.05, 2.0, 20);
  const BandwidthSelection first = select_bandwidth_cv(points_1d(xs), grid, 5, 12);
  // Held-out log-likelihood lands near the Silverman anchor 1.06 n^{-1/5} ~ 0.27.
  CHECK(first.sigma >= 0.1);
  CHECK(first.sigma <= 1.0);
  REQUIRE(first.cv_scores.size() == grid.size());

  const BandwidthSelection second = select_bandwidth_cv(points_1d(xs), grid, 5, 12);
  CHECK(first.sigma == second.sigma);
  CHECK(first.cv_scores == second.cv_scores);
}

TEST_CASE("kappa estimate") {
  const KdeModel model = kde_fit(points_1d({0.0, 1.0}), 1.0);

  const KappaReport same = estimate_kappa(model, points_1d({0.5, 0.5, 0.5}));
  CHECK(same.kappa == doctest::Approx(1.0).epsilon(1e-14));

  const KappaReport pair = estimate_kappa(model, points_1d({0.0, 1.0}));
  CHECK(pair.kappa == doctest::Approx(1.6487212707001282).epsilon(1e-13));
  CHECK(pair.unbounded_in_theory);

  // Widening the point set never decreases kappa.
  const KappaReport wider = estimate_kappa(model, points_1d({0.0, 1.0, 3.0}));
  CHECK(wider.kappa >= pair.kappa);

  CHECK_THROWS_AS(estimate_kappa(model, points_1d({0.0})), std::invalid_argument);
}
