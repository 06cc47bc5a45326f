#include "msa/model_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include <json.hpp>

namespace msa {

using nlohmann::json;

namespace {

json parse(const std::string& text, const char* what) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) {
    throw std::invalid_argument(std::string(what) + ": malformed JSON");
  }
  return j;
}

}  // namespace

std::string maxent_to_json(const MaxentModel& model) {
  json j;
  j["kind"] = model.feature_map.kind() == FeatureMapKind::kPerClassLinear
                  ? "per_class_linear"
                  : "random_fourier";
  j["p"] = model.num_domains();
  j["d"] = model.input_dim();
  j["mu"] = model.mu;
  j["r"] = model.feature_radius;
  j["seed"] = model.seed;
  j["weights"] = model.weights;
  j["converged"] = model.converged;
  j["iterations"] = model.iterations;
  if (model.feature_map.kind() == FeatureMapKind::kRandomFourier) {
    j["rff_width"] = model.feature_map.width();
    j["rff_bandwidth"] = model.feature_map.bandwidth();
    j["rff_seed"] = model.feature_map.seed();
  }
  return j.dump(2);
}

MaxentModel maxent_from_json(const std::string& text) {
  const json j = parse(text, "maxent model");
  const std::string kind = j.at("kind").get<std::string>();
  const int p = j.at("p").get<int>();
  const int d = j.at("d").get<int>();
  FeatureMap fmap =
      kind == "per_class_linear"
          ? FeatureMap::per_class_linear(p, d)
          : FeatureMap::random_fourier(p, d, j.at("rff_width").get<int>(),
                                       j.at("rff_bandwidth").get<double>(),
                                       j.at("rff_seed").get<std::uint64_t>());
  MaxentModel model{std::move(fmap),
                    j.at("weights").get<std::vector<double>>(),
                    j.at("mu").get<double>(),
                    j.at("r").get<double>(),
                    j.at("seed").get<std::uint64_t>(),
                    j.value("converged", true),
                    j.value("iterations", 0),
                    0.0};
  if (static_cast<int>(model.weights.size()) != model.feature_map.output_dim()) {
    throw std::invalid_argument("maxent model: weight vector size mismatch");
  }
  return model;
}

std::string kde_to_json(const KdeModel& model, int domain,
                        const std::vector<double>& cv_grid,
                        const std::vector<double>& cv_scores) {
  json j;
  j["sigma"] = model.sigma();
  j["d"] = model.dim();
  j["domain"] = domain;
  j["centers"] = model.centers();
  if (!cv_grid.empty()) j["grid"] = cv_grid;
  if (!cv_scores.empty()) j["cv_scores"] = cv_scores;
  return j.dump(2);
}

KdeModel kde_from_json(const std::string& text, int* domain) {
  const json j = parse(text, "kde model");
  if (domain) *domain = j.value("domain", 0);
  return KdeModel(j.at("centers").get<std::vector<std::vector<double>>>(),
                  j.at("sigma").get<double>());
}

SourcePredictorSet predictors_from_json(const std::string& text, int* dim) {
  const json j = parse(text, "predictor bundle");
  const std::string model = j.at("model").get<std::string>();
  const int d = j.at("d").get<int>();
  if (dim) *dim = d;
  const json& items = j.at("predictors");
  if (!items.is_array() || items.empty()) {
    throw std::invalid_argument("predictor bundle: empty predictor list");
  }

  if (model == "regression") {
    std::vector<RegressionFn> predictors;
    for (const json& item : items) {
      const std::string type = item.at("type").get<std::string>();
      if (type != "linear") {
        throw std::invalid_argument("predictor bundle: unknown regression type " + type);
      }
      const std::vector<double> weights = item.at("weights").get<std::vector<double>>();
      const double bias = item.at("bias").get<double>();
      const std::string output = item.value("output", "raw");
      if (static_cast<int>(weights.size()) != d) {
        throw std::invalid_argument("predictor bundle: weight dimension mismatch");
      }
      const bool squash = output == "logistic_pm1";
      if (!squash && output != "raw") {
        throw std::invalid_argument("predictor bundle: unknown output mode " + output);
      }
      predictors.push_back([weights, bias, squash](std::span<const double> x) {
        double value = bias;
        for (std::size_t i = 0; i < weights.size(); ++i) value += weights[i] * x[i];
        if (squash) value = 2.0 / (1.0 + std::exp(-value)) - 1.0;
        return value;
      });
    }
    return SourcePredictorSet::for_regression(std::move(predictors));
  }

  if (model != "probability") {
    throw std::invalid_argument("predictor bundle: model must be regression or probability");
  }
  const int labels = j.at("labels").get<int>();
  std::vector<ProbabilityFn> predictors;
  for (const json& item : items) {
    const std::string type = item.at("type").get<std::string>();
    if (type != "linear_softmax") {
      throw std::invalid_argument("predictor bundle: unknown probability type " + type);
    }
    const auto weights = item.at("weights").get<std::vector<std::vector<double>>>();
    const auto bias = item.at("bias").get<std::vector<double>>();
    if (static_cast<int>(weights.size()) != labels ||
        static_cast<int>(bias.size()) != labels) {
      throw std::invalid_argument("predictor bundle: label dimension mismatch");
    }
    for (const auto& row : weights) {
      if (static_cast<int>(row.size()) != d) {
        throw std::invalid_argument("predictor bundle: weight dimension mismatch");
      }
    }
    predictors.push_back([weights, bias](std::span<const double> x) {
      std::vector<double> logits(bias.size());
      double max_logit = -std::numeric_limits<double>::infinity();
      for (std::size_t y = 0; y < bias.size(); ++y) {
        double value = bias[y];
        for (std::size_t i = 0; i < weights[y].size(); ++i) value += weights[y][i] * x[i];
        logits[y] = value;
        max_logit = std::max(max_logit, value);
      }
      double sum = 0.0;
      for (double& l : logits) {
        l = std::exp(l - max_logit);
        sum += l;
      }
      for (double& l : logits) l /= sum;
      return logits;
    });
  }
  return SourcePredictorSet::for_probability(std::move(predictors), labels);
}

std::string zsolve_result_to_json(const ZSolveResult& result, double spread) {
  json j;
  j["z"] = result.z.values();
  j["z_prime"] = result.z_prime.values();
  j["objective"] = result.objective;
  j["per_domain_losses"] = result.per_domain_losses;
  j["spread"] = spread;
  j["method"] = result.method;
  j["iterations"] = result.iterations;
  j["converged"] = result.converged;
  return j.dump(2);
}

ZSolveResult zsolve_result_from_json(const std::string& text) {
  const json j = parse(text, "z solution");
  ZSolveResult result;
  result.z = MixtureWeights(j.at("z").get<std::vector<double>>());
  result.z_prime = MixtureWeights(j.at("z_prime").get<std::vector<double>>());
  result.objective = j.at("objective").get<double>();
  result.per_domain_losses = j.at("per_domain_losses").get<std::vector<double>>();
  result.method = j.at("method").get<std::string>();
  result.iterations = j.value("iterations", 0);
  result.converged = j.value("converged", true);
  return result;
}

namespace {

json mixture_to_json(const GaussianMixtureSpec& spec) {
  json components = json::array();
  for (const GaussianComponent& c : spec.components) {
    components.push_back({{"weight", c.weight}, {"mean", c.mean}, {"stddev", c.stddev}});
  }
  return components;
}

GaussianMixtureSpec mixture_from_json(const json& j) {
  GaussianMixtureSpec spec;
  for (const json& item : j) {
    spec.components.push_back({item.at("weight").get<double>(),
                               item.at("mean").get<double>(),
                               item.at("stddev").get<double>()});
  }
  return spec;
}

}  // namespace

ExperimentConfig experiment_config_from_json(const std::string& text) {
  ExperimentConfig config;
  if (text == "default" || text.empty()) return config;
  const json j = parse(text, "experiment config");
  config.sample_sizes = j.value("sample_sizes", config.sample_sizes);
  config.runs = j.value("runs", config.runs);
  config.seed = j.value("seed", config.seed);
  config.test_size = j.value("test_size", config.test_size);
  config.grid_resolution = j.value("grid_resolution", config.grid_resolution);
  config.solver = j.value("solver", config.solver);
  config.eta = j.value("eta", config.eta);
  config.kde_grid = j.value("kde_grid", config.kde_grid);
  config.kde_folds = j.value("kde_folds", config.kde_folds);
  config.maxent_mu = j.value("maxent_mu", config.maxent_mu);
  config.maxent_tol = j.value("maxent_tol", config.maxent_tol);
  config.maxent_max_iters = j.value("maxent_max_iters", config.maxent_max_iters);
  config.base_mu = j.value("base_mu", config.base_mu);
  config.base_fixed_m = j.value("base_fixed_m", config.base_fixed_m);
  config.variance_convention = j.value("variance_convention", config.variance_convention);
  config.target_mixtures = j.value("target_mixtures", config.target_mixtures);
  config.threads = j.value("threads", config.threads);
  if (j.contains("domain1")) config.domain1 = mixture_from_json(j.at("domain1"));
  if (j.contains("domain2")) config.domain2 = mixture_from_json(j.at("domain2"));
  config.validate();
  return config;
}

std::string experiment_config_to_json(const ExperimentConfig& config) {
  json j;
  j["sample_sizes"] = config.sample_sizes;
  j["runs"] = config.runs;
  j["seed"] = config.seed;
  j["test_size"] = config.test_size;
  j["grid_resolution"] = config.grid_resolution;
  j["solver"] = config.solver;
  j["eta"] = config.eta;
  j["kde_grid"] = config.kde_grid;
  j["kde_folds"] = config.kde_folds;
  j["maxent_mu"] = config.maxent_mu;
  j["maxent_tol"] = config.maxent_tol;
  j["maxent_max_iters"] = config.maxent_max_iters;
  j["base_mu"] = config.base_mu;
  j["base_fixed_m"] = config.base_fixed_m;
  j["variance_convention"] = config.variance_convention;
  j["target_mixtures"] = config.target_mixtures;
  j["threads"] = config.threads;
  j["domain1"] = mixture_to_json(config.domain1.components.empty() ? default_domain1()
                                                                   : config.domain1);
  j["domain2"] = mixture_to_json(config.domain2.components.empty() ? default_domain2()
                                                                   : config.domain2);
  return j.dump(2);
}

std::string experiment_report_to_json(const ExperimentReport& report) {
  json j;
  j["config"] = json::parse(experiment_config_to_json(report.config));
  json runs = json::array();
  for (const RunRecord& record : report.runs) {
    json r;
    r["run"] = record.run;
    r["m"] = record.m;
    r["maxent_mu"] = record.maxent_mu;
    if (std::isfinite(record.maxent_threshold)) {
      r["maxent_threshold"] = record.maxent_threshold;
    } else {
      r["maxent_threshold"] = nullptr;
    }
    r["kde_sigmas"] = record.kde_sigmas;
    r["qhat"] = record.qhat;
    r["dmsa_z"] = record.dmsa_z;
    r["dmsa_z_prime"] = record.dmsa_z_prime;
    r["gmsa_z"] = record.gmsa_z;
    r["targets"] = record.target_names;
    r["dmsa_accuracy"] = record.dmsa_accuracy;
    r["gmsa_accuracy"] = record.gmsa_accuracy;
    r["uniform_accuracy"] = record.uniform_accuracy;
    runs.push_back(std::move(r));
  }
  j["runs"] = std::move(runs);
  json aggregates = json::array();
  for (const AggregateRow& row : report.aggregates) {
    aggregates.push_back({{"method", row.method},
                          {"target", row.target},
                          {"m", row.m},
                          {"mean_acc", row.mean_accuracy},
                          {"std_acc", row.std_accuracy}});
  }
  j["aggregates"] = std::move(aggregates);
  return j.dump(2);
}

std::string experiment_curves_csv(const ExperimentReport& report) {
  std::string csv = "method,target,m,mean_acc,std_acc\n";
  char buffer[128];
  for (const AggregateRow& row : report.aggregates) {
    std::snprintf(buffer, sizeof(buffer), "%s,%s,%d,%.17g,%.17g\n", row.method.c_str(),
                  row.target.c_str(), row.m, row.mean_accuracy, row.std_accuracy);
    csv += buffer;
  }
  return csv;
}

}  // namespace msa
