#include "msa/synthbench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <mutex>
#include <thread>
#include <utility>

#include "msa/kde.hpp"
#include "msa/maxent.hpp"
#include "msa/rng.hpp"
#include "msa/zsolve.hpp"

namespace msa {

namespace {

std::vector<double> log_spaced(double lo, double hi, int n) {
  std::vector<double> grid(static_cast<std::size_t>(n));
  const double log_lo = std::log(lo);
  const double log_hi = std::log(hi);
  for (int i = 0; i < n; ++i) {
    const double t = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
    grid[static_cast<std::size_t>(i)] = std::exp(log_lo + t * (log_hi - log_lo));
  }
  return grid;
}

struct Stats {
  double mean = 0.0;
  double stddev = 0.0;
};

Stats mean_std(const std::vector<double>& values) {
  Stats stats;
  if (values.empty()) return stats;
  for (double v : values) stats.mean += v;
  stats.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - stats.mean) * (v - stats.mean);
    stats.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return stats;
}

int resolve_threads(int configured, int jobs) {
  if (configured > 0) return std::min(configured, jobs);
  if (const char* env = std::getenv("MSA_THREADS")) {
    const int parsed = std::atoi(env);
    if (parsed > 0) return std::min(parsed, jobs);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return std::min<int>(hw == 0 ? 1 : static_cast<int>(hw), jobs);
}

}  // namespace

void GaussianMixtureSpec::validate() const {
  if (components.empty()) throw std::invalid_argument("mixture spec: no components");
  double sum = 0.0;
  for (const GaussianComponent& c : components) {
    if (!(c.weight >= 0.0)) throw std::invalid_argument("mixture spec: negative weight");
    if (!(c.stddev > 0.0)) throw std::invalid_argument("mixture spec: stddev must be positive");
    sum += c.weight;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw std::invalid_argument("mixture spec: weights must sum to 1");
  }
}

Dataset sample_mixture(const GaussianMixtureSpec& spec, int n, std::uint64_t seed) {
  spec.validate();
  if (n < 1) throw std::invalid_argument("sample mixture: n must be >= 1");
  Rng rng(seed);
  std::vector<Sample> samples;
  samples.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform01();
    double cumulative = 0.0;
    const GaussianComponent* chosen = &spec.components.back();
    for (const GaussianComponent& c : spec.components) {
      cumulative += c.weight;
      if (u < cumulative) {
        chosen = &c;
        break;
      }
    }
    Sample s;
    s.x = {chosen->mean + chosen->stddev * rng.normal()};
    samples.push_back(std::move(s));
  }
  return Dataset(std::move(samples), 0);
}

int synthetic_label(double x) {
  if (x >= -0.5 && x <= 0.5) return -1;
  if (x >= 3.5) return -1;
  return 1;
}

double LinearBinaryPredictor::score(double x) const {
  if (constant) return constant_score;
  return slope * x + intercept >= 0.0 ? 1.0 : -1.0;
}

LinearBinaryPredictor train_base_predictor(const Dataset& labeled, double mu) {
  if (!labeled.fully_labeled()) {
    throw std::invalid_argument("base predictor: unlabeled sample");
  }
  if (labeled.dim() != 1) {
    throw std::invalid_argument("base predictor: expects 1-D features");
  }
  bool has_pos = false, has_neg = false;
  for (const Sample& s : labeled.samples()) {
    if (*s.y > 0) has_pos = true;
    else has_neg = true;
  }
  LinearBinaryPredictor predictor;
  if (!has_pos || !has_neg) {
    predictor.constant = true;
    predictor.constant_score = has_pos ? 1.0 : -1.0;
    return predictor;
  }

  // Binary logistic regression as a two-class conditional Maxent problem.
  std::vector<Sample> relabeled;
  relabeled.reserve(labeled.size());
  for (const Sample& s : labeled.samples()) {
    Sample t;
    t.x = s.x;
    t.domain = *s.y > 0 ? 1 : 0;
    relabeled.push_back(std::move(t));
  }
  Dataset classes(std::move(relabeled), 2);
  const FeatureMap fmap = FeatureMap::per_class_linear(2, 1);
  const MaxentModel model = train_maxent(classes, mu, fmap, 1e-8, 500, 0);
  // P(+1 | x) = logistic((w1 - w0) . (x, 1)).
  predictor.slope = model.weights[2] - model.weights[0];
  predictor.intercept = model.weights[3] - model.weights[1];
  return predictor;
}

void ExperimentConfig::validate() const {
  if (sample_sizes.empty()) throw std::invalid_argument("experiment: no sample sizes");
  for (int m : sample_sizes) {
    if (m < 10) throw std::invalid_argument("experiment: sample sizes must be >= 10");
  }
  if (runs < 1) throw std::invalid_argument("experiment: runs must be >= 1");
  if (test_size < 1) throw std::invalid_argument("experiment: test size must be >= 1");
  if (grid_resolution < 1) throw std::invalid_argument("experiment: resolution must be >= 1");
  if (solver != "grid" && solver != "iter") {
    throw std::invalid_argument("experiment: solver must be grid or iter");
  }
  if (!(eta >= 0.0)) throw std::invalid_argument("experiment: eta must be >= 0");
  for (const auto& lambda : target_mixtures) {
    if (lambda.size() != 2) {
      throw std::invalid_argument("experiment: target mixtures must have 2 entries");
    }
  }
}

GaussianMixtureSpec default_domain1() {
  return GaussianMixtureSpec{{{0.9, -20.0, 8.0}, {0.1, 0.0, 0.1}}};
}

GaussianMixtureSpec default_domain2() {
  // Weights 0.75 / 0.25 / 0.05 normalized onto the simplex.
  const double total = 1.05;
  return GaussianMixtureSpec{
      {{0.75 / total, 3.0, 0.1}, {0.25 / total, 5.0, 0.1}, {0.05 / total, 0.0, 0.1}}};
}

double evaluate_target_mixture(const MixtureWeights& lambda,
                               const std::vector<Dataset>& test_sets,
                               const RegressionFn& predictor, TargetMetric metric) {
  if (lambda.size() != static_cast<int>(test_sets.size())) {
    throw std::invalid_argument("target mixture: lambda does not match the test sets");
  }
  double total = 0.0;
  for (int k = 0; k < lambda.size(); ++k) {
    if (lambda[k] == 0.0) continue;
    const Dataset& tests = test_sets[static_cast<std::size_t>(k)];
    if (!tests.fully_labeled()) {
      throw std::invalid_argument("target mixture: unlabeled test sample");
    }
    double metric_k = 0.0;
    for (const Sample& s : tests.samples()) {
      const double value = predictor(s.x);
      if (metric == TargetMetric::kAccuracy) {
        const double decision = value >= 0.0 ? 1.0 : -1.0;
        metric_k += decision == *s.y ? 1.0 : 0.0;
      } else {
        const double diff = value - *s.y;
        metric_k += diff * diff;
      }
    }
    total += lambda[k] * metric_k / static_cast<double>(tests.size());
  }
  return total;
}

namespace {

struct PreparedDomains {
  GaussianMixtureSpec d1;
  GaussianMixtureSpec d2;
};

PreparedDomains prepared_domains(const ExperimentConfig& config) {
  PreparedDomains domains;
  domains.d1 = config.domain1.components.empty() ? default_domain1() : config.domain1;
  domains.d2 = config.domain2.components.empty() ? default_domain2() : config.domain2;
  if (config.variance_convention) {
    for (GaussianComponent& c : domains.d1.components) c.stddev = std::sqrt(c.stddev);
    for (GaussianComponent& c : domains.d2.components) c.stddev = std::sqrt(c.stddev);
  }
  domains.d1.validate();
  domains.d2.validate();
  return domains;
}

Dataset labeled_from(const Dataset& raw, int domain) {
  std::vector<Sample> samples;
  samples.reserve(raw.size());
  for (const Sample& s : raw.samples()) {
    Sample t;
    t.x = s.x;
    t.y = static_cast<double>(synthetic_label(s.x[0]));
    t.domain = domain;
    samples.push_back(std::move(t));
  }
  return Dataset(std::move(samples), 2);
}

Dataset pool(const Dataset& a, const Dataset& b) {
  std::vector<Sample> samples;
  samples.reserve(a.size() + b.size());
  for (const Sample& s : a.samples()) samples.push_back(s);
  for (const Sample& s : b.samples()) samples.push_back(s);
  return Dataset(std::move(samples), std::max(a.num_domains(), b.num_domains()));
}

// Posterior 0.5-crossing of a two-domain PerClassLinear model in 1-D.
double posterior_crossing(const MaxentModel& model) {
  const double slope = model.weights[0] - model.weights[2];
  const double offset = model.weights[1] - model.weights[3];
  if (std::abs(slope) < 1e-300) return std::numeric_limits<double>::quiet_NaN();
  return -offset / slope;
}

struct RunOutput {
  RunRecord record;
};

RunRecord execute_run(const ExperimentConfig& config, const PreparedDomains& domains,
                      int run, int m, const std::vector<double>& kde_grid,
                      const std::vector<double>& mu_grid) {
  RunRecord record;
  record.run = run;
  record.m = m;

  const std::uint64_t run_seed = Rng::derive(config.seed, static_cast<std::uint64_t>(run));
  const std::uint64_t m_seed = Rng::derive(run_seed, static_cast<std::uint64_t>(m));

  // Adaptation samples, one set per domain, labeled by the target function.
  const Dataset raw1 = sample_mixture(domains.d1, m, Rng::derive(m_seed, 1));
  const Dataset raw2 = sample_mixture(domains.d2, m, Rng::derive(m_seed, 2));
  const Dataset domain1 = labeled_from(raw1, 0);
  const Dataset domain2 = labeled_from(raw2, 1);
  const Dataset pooled = pool(domain1, domain2);

  // Base predictors: either the same m samples or a separate fixed-size draw.
  LinearBinaryPredictor base1, base2;
  if (config.base_fixed_m > 0) {
    const Dataset fixed1 = labeled_from(
        sample_mixture(domains.d1, config.base_fixed_m, Rng::derive(m_seed, 3)), 0);
    const Dataset fixed2 = labeled_from(
        sample_mixture(domains.d2, config.base_fixed_m, Rng::derive(m_seed, 4)), 1);
    base1 = train_base_predictor(fixed1, config.base_mu);
    base2 = train_base_predictor(fixed2, config.base_mu);
  } else {
    base1 = train_base_predictor(domain1, config.base_mu);
    base2 = train_base_predictor(domain2, config.base_mu);
  }
  const SourcePredictorSet predictors = SourcePredictorSet::for_regression(
      {[base1](std::span<const double> x) { return base1.score(x[0]); },
       [base2](std::span<const double> x) { return base2.score(x[0]); }});

  // Domain posterior via conditional Maxent on the pooled domain-labeled data.
  const FeatureMap fmap = FeatureMap::per_class_linear(2, 1);
  double mu = config.maxent_mu;
  if (mu < 0.0) {
    mu = select_mu_cv(pooled, fmap, mu_grid, 5, Rng::derive(m_seed, 5));
  }
  const MaxentModel maxent = train_maxent(pooled, mu, fmap, config.maxent_tol,
                                          config.maxent_max_iters, Rng::derive(m_seed, 6));
  record.maxent_mu = mu;
  record.maxent_threshold = posterior_crossing(maxent);
  const DomainScorer posterior_scorer = [&maxent](std::span<const double> x) {
    std::vector<double> probs(2);
    maxent.posterior_into(x, probs);
    return probs;
  };

  // Per-domain KDEs with cross-validated bandwidths.
  const std::vector<std::vector<double>> points1 = pooled.domain_points(0);
  const std::vector<std::vector<double>> points2 = pooled.domain_points(1);
  const BandwidthSelection bw1 =
      select_bandwidth_cv(points1, kde_grid, config.kde_folds, Rng::derive(m_seed, 7));
  const BandwidthSelection bw2 =
      select_bandwidth_cv(points2, kde_grid, config.kde_folds, Rng::derive(m_seed, 8));
  const KdeModel kde1 = kde_fit(points1, bw1.sigma);
  const KdeModel kde2 = kde_fit(points2, bw2.sigma);
  record.kde_sigmas = {bw1.sigma, bw2.sigma};
  const DomainScorer density_scorer = [&kde1, &kde2](std::span<const double> x) {
    return std::vector<double>{std::max(kde1.density(x), 1e-300),
                               std::max(kde2.density(x), 1e-300)};
  };

  // Solve z for both routes on the identical pooled calibration data.
  const LossSpec loss = LossSpec::squared(4.0);
  const ZObjectiveContext dmsa_ctx = ZObjectiveContext::from_posterior(
      pooled, posterior_scorer, predictors, loss, config.eta);
  const ZObjectiveContext gmsa_ctx = ZObjectiveContext::from_densities(
      pooled, density_scorer, predictors, loss, config.eta);
  ZSolveResult dmsa_solution, gmsa_solution;
  if (config.solver == "grid") {
    dmsa_solution = grid_search_z(dmsa_ctx, config.grid_resolution);
    gmsa_solution = grid_search_z(gmsa_ctx, config.grid_resolution);
  } else {
    dmsa_solution = iterative_solve_z(dmsa_ctx, MixtureWeights::uniform(2));
    gmsa_solution = iterative_solve_z(gmsa_ctx, MixtureWeights::uniform(2));
  }
  record.qhat = dmsa_ctx.qhat();
  record.dmsa_z = dmsa_solution.z.values();
  record.dmsa_z_prime = dmsa_solution.z_prime.values();
  record.gmsa_z = gmsa_solution.z.values();

  // Fresh test sets, shared by every method within the run.
  const std::uint64_t test_seed = Rng::derive(run_seed, 0x7465);
  const std::vector<Dataset> test_sets = {
      labeled_from(sample_mixture(domains.d1, config.test_size, Rng::derive(test_seed, 1)), 0),
      labeled_from(sample_mixture(domains.d2, config.test_size, Rng::derive(test_seed, 2)), 1)};

  const MixtureWeights dmsa_z_prime = dmsa_solution.z_prime;
  const RegressionFn dmsa_fn = [&](std::span<const double> x) {
    return dmsa_predict_regression(dmsa_z_prime, posterior_scorer, predictors, x,
                                   config.eta);
  };
  const MixtureWeights gmsa_z = gmsa_solution.z;
  const RegressionFn gmsa_fn = [&](std::span<const double> x) {
    return gmsa_predict_regression(gmsa_z, density_scorer, predictors, x, config.eta);
  };
  const RegressionFn uniform_fn = [&](std::span<const double> x) {
    return uniform_predict_regression(predictors, x);
  };

  std::vector<std::pair<std::string, MixtureWeights>> targets;
  targets.emplace_back("D1", MixtureWeights::vertex(2, 0));
  targets.emplace_back("D2", MixtureWeights::vertex(2, 1));
  for (const auto& lambda : config.target_mixtures) {
    const MixtureWeights weights{lambda};
    char name[64];
    std::snprintf(name, sizeof(name), "mix(%g,%g)", lambda[0], lambda[1]);
    targets.emplace_back(name, weights);
  }
  for (const auto& [name, lambda] : targets) {
    record.target_names.push_back(name);
    record.dmsa_accuracy.push_back(
        evaluate_target_mixture(lambda, test_sets, dmsa_fn, TargetMetric::kAccuracy));
    record.gmsa_accuracy.push_back(
        evaluate_target_mixture(lambda, test_sets, gmsa_fn, TargetMetric::kAccuracy));
    record.uniform_accuracy.push_back(
        evaluate_target_mixture(lambda, test_sets, uniform_fn, TargetMetric::kAccuracy));
  }
  return record;
}

}  // namespace

ExperimentReport run_synthetic(const ExperimentConfig& config) {
  config.validate();
  const PreparedDomains domains = prepared_domains(config);
  const std::vector<double> kde_grid =
      config.kde_grid.empty() ? log_spaced(0.02, 5.0, 15) : config.kde_grid;
  const std::vector<double> mu_grid = log_spaced(1e-4, 10.0, 6);

  struct Job {
    int run;
    int m;
  };
  std::vector<Job> jobs;
  for (int run = 0; run < config.runs; ++run) {
    for (int m : config.sample_sizes) jobs.push_back({run, m});
  }

  std::vector<RunRecord> records(jobs.size());
  const int threads = resolve_threads(config.threads, static_cast<int>(jobs.size()));
  if (threads <= 1) {
    for (std::size_t j = 0; j < jobs.size(); ++j) {
      records[j] = execute_run(config, domains, jobs[j].run, jobs[j].m, kde_grid, mu_grid);
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    workers.reserve(static_cast<std::size_t>(threads));
    std::exception_ptr failure;
    std::mutex failure_mutex;
    for (int t = 0; t < threads; ++t) {
      workers.emplace_back([&]() {
        while (true) {
          const std::size_t j = next.fetch_add(1);
          if (j >= jobs.size()) return;
          try {
            records[j] =
                execute_run(config, domains, jobs[j].run, jobs[j].m, kde_grid, mu_grid);
          } catch (...) {
            std::lock_guard<std::mutex> lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            return;
          }
        }
      });
    }
    for (std::thread& worker : workers) worker.join();
    if (failure) std::rethrow_exception(failure);
  }

  ExperimentReport report;
  report.config = config;
  report.runs = std::move(records);

  // Aggregate in (method, target, m) order, runs ordered by index.
  const std::vector<std::string> methods = {"dmsa", "gmsa", "uniform"};
  if (!report.runs.empty()) {
    const std::vector<std::string>& names = report.runs.front().target_names;
    for (const std::string& method : methods) {
      for (std::size_t target = 0; target < names.size(); ++target) {
        for (int m : config.sample_sizes) {
          std::vector<double> accuracies;
          for (const RunRecord& record : report.runs) {
            if (record.m != m) continue;
            const std::vector<double>& source = method == "dmsa" ? record.dmsa_accuracy
                                                : method == "gmsa" ? record.gmsa_accuracy
                                                                   : record.uniform_accuracy;
            accuracies.push_back(source[target]);
          }
          const Stats stats = mean_std(accuracies);
          report.aggregates.push_back({method, names[target], m, stats.mean, stats.stddev});
        }
      }
    }
  }
  return report;
}

}  // namespace msa
