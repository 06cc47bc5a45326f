#ifndef MSA_SYNTHBENCH_HPP
#define MSA_SYNTHBENCH_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "msa/combine.hpp"
#include "msa/core.hpp"

namespace msa {

struct GaussianComponent {
  double weight = 1.0;
  double mean = 0.0;
  double stddev = 1.0;
};

struct GaussianMixtureSpec {
  std::vector<GaussianComponent> components;
  void validate() const;
};

// i.i.d. draws: component by categorical(weights), then normal(mean, stddev).
Dataset sample_mixture(const GaussianMixtureSpec& spec, int n, std::uint64_t seed);

// -1 on [-0.5, 0.5] and [3.5, inf), +1 elsewhere; boundaries map to -1.
int synthetic_label(double x);

// 1-D linear separator sign(slope * x + intercept) fit by regularized
// logistic loss; score(x) is the hard +-1 decision.
struct LinearBinaryPredictor {
  double slope = 0.0;
  double intercept = 0.0;
  bool constant = false;  // single-class training data
  double constant_score = 1.0;

  double score(double x) const;
};

LinearBinaryPredictor train_base_predictor(const Dataset& labeled, double mu = 1e-3);

struct ExperimentConfig {
  std::vector<int> sample_sizes{100, 300, 1000, 3000};
  int runs = 10;
  std::uint64_t seed = 20260810;
  int test_size = 5000;
  int grid_resolution = 100;
  std::string solver = "grid";  // grid | iter
  double eta = 1e-8;
  std::vector<double> kde_grid;    // empty => log-spaced default
  int kde_folds = 5;
  double maxent_mu = -1.0;         // < 0 => five-fold CV over a log grid
  double maxent_tol = 1e-8;
  int maxent_max_iters = 500;
  double base_mu = 1e-3;
  int base_fixed_m = 0;            // 0 => base predictors reuse the m samples
  bool variance_convention = false;  // true: second mixture parameter is a variance
  std::vector<std::vector<double>> target_mixtures{{0.5, 0.5}};
  GaussianMixtureSpec domain1;     // empty => benchmark default
  GaussianMixtureSpec domain2;
  int threads = 0;                 // 0 => MSA_THREADS or hardware concurrency

  void validate() const;
};

// The benchmark pair: a wide component at -20 with a narrow spike at 0, and
// three narrow spikes at 3, 5, and 0 (weights normalized to the simplex).
GaussianMixtureSpec default_domain1();
GaussianMixtureSpec default_domain2();

struct RunRecord {
  int run = 0;
  int m = 0;
  double maxent_mu = 0.0;
  double maxent_threshold = 0.0;  // posterior 0.5-crossing (NaN if undefined)
  std::vector<double> kde_sigmas;
  std::vector<double> qhat;
  std::vector<double> dmsa_z, dmsa_z_prime, gmsa_z;
  std::vector<std::string> target_names;
  std::vector<double> dmsa_accuracy, gmsa_accuracy, uniform_accuracy;
};

struct AggregateRow {
  std::string method;
  std::string target;
  int m = 0;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<RunRecord> runs;
  std::vector<AggregateRow> aggregates;
};

// Full benchmark: per run and sample size, draw per-domain samples, fit base
// predictors, train the domain posterior and per-domain KDEs, solve z for the
// discriminative and generative routes on identical data, and score both on
// fresh per-domain test sets plus every configured target mixture.
ExperimentReport run_synthetic(const ExperimentConfig& config);

enum class TargetMetric { kAccuracy, kMse };

// Metric on the lambda-weighted union of the per-domain test sets
// (weighting mode: the per-domain metrics combined with weights lambda).
double evaluate_target_mixture(const MixtureWeights& lambda,
                               const std::vector<Dataset>& test_sets,
                               const RegressionFn& predictor, TargetMetric metric);

}  // namespace msa

#endif  // MSA_SYNTHBENCH_HPP
