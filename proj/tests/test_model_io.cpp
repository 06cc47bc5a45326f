#include <doctest.h>

#include <cmath>

#include "msa/model_io.hpp"
#include "msa/rng.hpp"
#include "test_util.hpp"

using namespace msa;

TEST_CASE("maxent model json round trip is exact") {
  Rng rng(3);
  const FeatureMap fmap = FeatureMap::per_class_linear(3, 2);
  MaxentModel model{fmap, {}, 0.05, 2.5, 77, true, 42, 0.0};
  for (int i = 0; i < fmap.output_dim(); ++i) model.weights.push_back(rng.normal() * 1e3);

  const MaxentModel loaded = maxent_from_json(maxent_to_json(model));
  CHECK(loaded.weights == model.weights);  // bitwise
  CHECK(loaded.mu == model.mu);
  CHECK(loaded.feature_radius == model.feature_radius);
  CHECK(loaded.seed == model.seed);
  CHECK(loaded.num_domains() == 3);

  // Random Fourier maps reconstruct the same features from the stored seed.
  const FeatureMap rff = FeatureMap::random_fourier(2, 1, 16, 0.7, 5);
  MaxentModel rff_model{rff, std::vector<double>(static_cast<std::size_t>(rff.output_dim()), 0.25),
                        0.1, 1.0, 5, true, 1, 0.0};
  const MaxentModel rff_loaded = maxent_from_json(maxent_to_json(rff_model));
  const std::vector<double> x{0.4};
  std::vector<double> f1(static_cast<std::size_t>(rff.block_dim()));
  std::vector<double> f2(f1.size());
  rff.block_features(x, f1);
  rff_loaded.feature_map.block_features(x, f2);
  CHECK(f1 == f2);
}

TEST_CASE("kde json round trip") {
  const KdeModel model({{0.5}, {-1.25}, {3.0}}, 0.3);
  int domain = -1;
  const KdeModel loaded = kde_from_json(kde_to_json(model, 1), &domain);
  CHECK(domain == 1);
  CHECK(loaded.sigma() == model.sigma());
  CHECK(loaded.centers() == model.centers());
  const std::vector<double> x{0.2};
  CHECK(loaded.density(x) == model.density(x));
}

TEST_CASE("predictor bundles") {
  const std::string regression = R"({
    "model": "regression", "d": 2,
    "predictors": [
      {"type": "linear", "weights": [1.0, -0.5], "bias": 0.25, "output": "raw"},
      {"type": "linear", "weights": [0.0, 2.0], "bias": 0.0, "output": "logistic_pm1"}
    ]})";
  int dim = 0;
  const SourcePredictorSet set = predictors_from_json(regression, &dim);
  CHECK(dim == 2);
  CHECK(set.count() == 2);
  const std::vector<double> x{1.0, 2.0};
  CHECK(set.regression[0](x) == doctest::Approx(1.0 - 1.0 + 0.25).epsilon(1e-15));
  CHECK(set.regression[1](x) ==
        doctest::Approx(2.0 / (1.0 + std::exp(-4.0)) - 1.0).epsilon(1e-14));

  const std::string probability = R"({
    "model": "probability", "d": 1, "labels": 3,
    "predictors": [
      {"type": "linear_softmax", "weights": [[1.0], [0.0], [-1.0]], "bias": [0.0, 0.1, 0.2]}
    ]})";
  const SourcePredictorSet prob = predictors_from_json(probability);
  const std::vector<double> dist = prob.probability[0](std::vector<double>{0.5});
  double sum = 0.0;
  for (double v : dist) sum += v;
  CHECK(std::abs(sum - 1.0) <= 1e-12);

  CHECK_THROWS_AS(predictors_from_json("{not json"), std::invalid_argument);
  CHECK_THROWS_AS(predictors_from_json(R"({"model":"regression","d":1,"predictors":[]})"),
                  std::invalid_argument);
}

TEST_CASE("z solution round trip") {
  ZSolveResult result;
  result.z = MixtureWeights({0.25, 0.75});
  result.z_prime = MixtureWeights({0.4, 0.6});
  result.objective = 0.0125;
  result.per_domain_losses = {0.2, 0.1875};
  result.method = "grid";
  result.iterations = 101;
  result.converged = true;

  const ZSolveResult loaded = zsolve_result_from_json(zsolve_result_to_json(result, 0.0125));
  CHECK(loaded.z.values() == result.z.values());
  CHECK(loaded.z_prime.values() == result.z_prime.values());
  CHECK(loaded.objective == result.objective);
  CHECK(loaded.per_domain_losses == result.per_domain_losses);
  CHECK(loaded.method == "grid");
}

TEST_CASE("experiment config parsing") {
  const ExperimentConfig defaults = experiment_config_from_json("default");
  CHECK(defaults.sample_sizes == std::vector<int>{100, 300, 1000, 3000});
  CHECK(defaults.runs == 10);

  const ExperimentConfig custom = experiment_config_from_json(R"({
    "sample_sizes": [50, 100], "runs": 3, "seed": 9, "test_size": 123,
    "maxent_mu": 0.5, "target_mixtures": [[0.25, 0.75]],
    "domain1": [{"weight": 1.0, "mean": 0.0, "stddev": 2.0}]
  })");
  CHECK(custom.sample_sizes == std::vector<int>{50, 100});
  CHECK(custom.runs == 3);
  CHECK(custom.test_size == 123);
  CHECK(custom.maxent_mu == 0.5);
  CHECK(custom.domain1.components.size() == 1);

  // Round trip through the serializer keeps the parsed values.
  const ExperimentConfig reloaded =
      experiment_config_from_json(experiment_config_to_json(custom));
  CHECK(reloaded.sample_sizes == custom.sample_sizes);
  CHECK(reloaded.seed == custom.seed);

  CHECK_THROWS_AS(experiment_config_from_json(R"({"runs": 0})"), std::invalid_argument);
}
