#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "msa/core.hpp"
#include "msa/rng.hpp"
#include "test_util.hpp"

using namespace msa;

TEST_CASE("point loss: squared") {
  const LossSpec spec = LossSpec::squared();
  CHECK(point_loss(spec, 1.0, 1.0).value == 0.0);
  CHECK(point_loss(spec, 3.0, 1.0).value == doctest::Approx(4.0).epsilon(1e-15));
  CHECK_FALSE(point_loss(spec, 3.0, 1.0).clamped);

  const LossSpec tight = LossSpec::squared(2.0);
  const PointLoss clamped = point_loss(tight, 3.0, 0.0);
  CHECK(clamped.value == 2.0);
  CHECK(clamped.clamped);
}

TEST_CASE("point loss: cross-entropy") {
  const LossSpec spec = LossSpec::cross_entropy();
  const std::vector<double> certain{0.0, 1.0};
  CHECK(point_loss(spec, certain, 1).value == 0.0);

  // Probability 0 at the true label: infinite loss clamped to M.
  const std::vector<double> wrong{1.0, 0.0};
  const PointLoss clamped = point_loss(spec, wrong, 1);
  CHECK(clamped.value == spec.bound);
  CHECK(clamped.clamped);

  const std::vector<double> half{0.5, 0.5};
  CHECK(point_loss(spec, half, 0).value == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK_THROWS_AS(point_loss(spec, half, 7), std::invalid_argument);
}

TEST_CASE("point loss bounds") {
  Rng rng(11);
  const LossSpec spec = LossSpec::squared(4.0);
  for (int i = 0; i < 200; ++i) {
    const double prediction = 10.0 * (rng.uniform01() - 0.5);
    const double label = 10.0 * (rng.uniform01() - 0.5);
    const PointLoss loss = point_loss(spec, prediction, label);
    CHECK(loss.value >= 0.0);
    CHECK(loss.value <= spec.bound);
  }
}

TEST_CASE("empirical loss") {
  const LossSpec spec = LossSpec::squared();
  const Dataset data = test::make_labeled_1d({0.0, 1.0}, {1.0, 1.0});

  const RegressionFn constant = [](std::span<const double>) { return 1.0; };
  CHECK(empirical_loss(data, constant, spec) == 0.0);

  // Point losses 0 and 4 average to 2.
  const RegressionFn skewed = [](std::span<const double> x) {
    return x[0] == 0.0 ? 1.0 : 3.0;
  };
  CHECK(empirical_loss(data, skewed, spec) == doctest::Approx(2.0).epsilon(1e-15));

  const Dataset unlabeled = test::make_labeled_1d({0.0, 1.0}, {});
  CHECK_THROWS_AS(empirical_loss(unlabeled, constant, spec), std::invalid_argument);
}

TEST_CASE("empirical loss is permutation invariant") {
  Rng rng(7);
  std::vector<double> xs, ys;
  for (int i = 0; i < 50; ++i) {
    xs.push_back(rng.normal());
    ys.push_back(rng.normal());
  }
  const LossSpec spec = LossSpec::squared();
  const RegressionFn predictor = [](std::span<const double> x) { return 0.3 * x[0]; };
  const double forward = empirical_loss(test::make_labeled_1d(xs, ys), predictor, spec);
  std::vector<double> xs_rev(xs.rbegin(), xs.rend());
  std::vector<double> ys_rev(ys.rbegin(), ys.rend());
  const double backward =
      empirical_loss(test::make_labeled_1d(xs_rev, ys_rev), predictor, spec);
  CHECK(std::abs(forward - backward) <= 1e-15);
}

TEST_CASE("simplex projection") {
  {
    const MixtureWeights w = project_to_simplex(std::vector<double>{0.2, 0.8});
    CHECK(w[0] == doctest::Approx(0.2).epsilon(1e-14));
    CHECK(w[1] == doctest::Approx(0.8).epsilon(1e-14));
  }
  {
    const MixtureWeights w = project_to_simplex(std::vector<double>{2.0, 0.0});
    CHECK(w[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(w[1] == doctest::Approx(0.0).epsilon(1e-12));
    // Oracle: no point of a 1e-3 simplex grid is closer to (2, 0).
    const double projected_dist = (w[0] - 2.0) * (w[0] - 2.0) + w[1] * w[1];
    for (int i = 0; i <= 1000; ++i) {
      const double t = i / 1000.0;
      const double dist = (t - 2.0) * (t - 2.0) + (1.0 - t) * (1.0 - t);
      CHECK(projected_dist <= dist + 1e-12);
    }
  }
  {
    const MixtureWeights w = project_to_simplex(std::vector<double>{0.5, 0.5, 0.5});
    for (int k = 0; k < 3; ++k) CHECK(w[k] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  }
  CHECK_THROWS_AS(project_to_simplex(std::vector<double>{1.0, std::nan("")}),
                  std::invalid_argument);
}

TEST_CASE("simplex projection is idempotent") {
  Rng rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const std::vector<double> z = test::random_simplex_point(rng, 2 + static_cast<int>(rng.below(5)));
    const MixtureWeights projected = project_to_simplex(z);
    for (std::size_t k = 0; k < z.size(); ++k) {
      CHECK(std::abs(projected[static_cast<int>(k)] - z[k]) <= 1e-12);
    }
  }
}

TEST_CASE("mixture weight invariants") {
  CHECK_THROWS_AS(MixtureWeights({0.5, 0.6}), std::invalid_argument);
  CHECK_THROWS_AS(MixtureWeights({1.5, -0.5}), std::invalid_argument);
  CHECK(MixtureWeights::uniform(3).size() == 3);
  CHECK(MixtureWeights::vertex(4, 2)[2] == 1.0);
}

TEST_CASE("dataset invariants") {
  CHECK_THROWS_AS(Dataset({}, 0), std::invalid_argument);
  std::vector<Sample> ragged;
  ragged.push_back({{1.0}, {}, {}});
  ragged.push_back({{1.0, 2.0}, {}, {}});
  CHECK_THROWS_AS(Dataset(std::move(ragged), 0), std::invalid_argument);
  std::vector<Sample> bad_domain;
  bad_domain.push_back({{1.0}, {}, 3});
  CHECK_THROWS_AS(Dataset(std::move(bad_domain), 2), std::invalid_argument);
}

TEST_CASE("csv round trip") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "msa_core_test";
  fs::create_directories(dir);
  const std::string path = (dir / "data.csv").string();

  std::vector<Sample> samples;
  samples.push_back({{0.125, -3.5}, 1.0, 0});
  samples.push_back({{1e-17, 2.0}, {}, 1});
  samples.push_back({{-0.1, 0.3333333333333333}, -1.0, {}});
  const Dataset original(std::move(samples), 2);
  save_dataset_csv(original, path);

  const Dataset loaded = load_dataset_csv(path);
  REQUIRE(loaded.size() == original.size());
  CHECK(loaded.num_domains() == 2);
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    CHECK(loaded[i].x == original[i].x);  // exact through %.17g
    CHECK(loaded[i].y == original[i].y);
    CHECK(loaded[i].domain == original[i].domain);
  }

  std::ofstream bad(dir / "ragged.csv");
  bad << "x0,y,domain\n1.0,1.0\n";
  bad.close();
  CHECK_THROWS_AS(load_dataset_csv((dir / "ragged.csv").string()), std::invalid_argument);
  CHECK_THROWS_AS(load_dataset_csv((dir / "missing.csv").string()), IoError);
  fs::remove_all(dir);
}
