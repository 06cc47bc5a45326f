#include "msa/msa_c.h"

#include <algorithm>
#include <cstring>
#include <memory>
#include <string>

#include "msa/combine.hpp"
#include "msa/core.hpp"
#include "msa/kde.hpp"
#include "msa/maxent.hpp"
#include "msa/model_io.hpp"
#include "msa/renyi.hpp"
#include "msa/synthbench.hpp"
#include "msa/zsolve.hpp"

namespace {

thread_local std::string g_last_error;

char* copy_string(const std::string& text) {
  char* out = new char[text.size() + 1];
  std::memcpy(out, text.c_str(), text.size() + 1);
  return out;
}

template <typename Fn>
msa_status guarded(Fn&& fn) {
  try {
    fn();
    return MSA_OK;
  } catch (const msa::IoError& e) {
    g_last_error = e.what();
    return MSA_ERROR_IO;
  } catch (const msa::NumericError& e) {
    g_last_error = e.what();
    return MSA_ERROR_NUMERIC;
  } catch (const std::invalid_argument& e) {
    g_last_error = e.what();
    return MSA_ERROR_INVALID_ARGUMENT;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return MSA_ERROR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return MSA_ERROR_INTERNAL;
  }
}

msa_status invalid(const char* message) {
  g_last_error = message;
  return MSA_ERROR_INVALID_ARGUMENT;
}

}  // namespace

struct msa_dataset {
  msa::Dataset data;
};

struct msa_posterior {
  msa::MaxentModel model;
};

struct msa_kde {
  msa::KdeModel model;
  explicit msa_kde(msa::KdeModel m) : model(std::move(m)) {}
};

struct msa_predictors {
  msa::SourcePredictorSet set;
  int dim = 0;
};

namespace {

msa_status combined_predict(const msa_predictors* predictors,
                            const msa::DomainScorer& scorer, const double* z, int32_t p,
                            double eta, const double* x, int32_t d,
                            double* prediction_out, double* weights_out,
                            double* scores_out) {
  return guarded([&] {
    if (p != predictors->set.count()) {
      throw std::invalid_argument("predict: z length does not match the predictors");
    }
    if (d != predictors->dim) {
      throw std::invalid_argument("predict: feature dimension mismatch");
    }
    const msa::MixtureWeights weights(std::vector<double>(z, z + p));
    const std::span<const double> point(x, static_cast<std::size_t>(d));
    const std::vector<double> scores = scorer(point);
    if (scores_out) {
      std::memcpy(scores_out, scores.data(), scores.size() * sizeof(double));
    }
    const std::vector<double> w = msa::mix_weights(weights, scores, eta);
    if (weights_out) std::memcpy(weights_out, w.data(), w.size() * sizeof(double));
    if (predictors->set.model == msa::LossModel::kRegression) {
      double value = 0.0;
      for (int k = 0; k < p; ++k) {
        if (w[static_cast<std::size_t>(k)] == 0.0) continue;
        value += w[static_cast<std::size_t>(k)] *
                 predictors->set.regression[static_cast<std::size_t>(k)](point);
      }
      prediction_out[0] = value;
    } else {
      std::vector<double> combined(static_cast<std::size_t>(predictors->set.label_count),
                                   0.0);
      for (int k = 0; k < p; ++k) {
        if (w[static_cast<std::size_t>(k)] == 0.0) continue;
        const std::vector<double> dist =
            predictors->set.probability[static_cast<std::size_t>(k)](point);
        for (std::size_t yi = 0; yi < combined.size(); ++yi) {
          combined[yi] += w[static_cast<std::size_t>(k)] * dist[yi];
        }
      }
      std::memcpy(prediction_out, combined.data(), combined.size() * sizeof(double));
    }
  });
}

msa_status solve_z_common(const msa_dataset* calibration, const msa::DomainScorer& scorer,
                          bool posterior_route, const msa_predictors* predictors,
                          const msa_zsolve_config* config, char** json_out) {
  return guarded([&] {
    const msa::LossSpec loss =
        config->loss_kind == 0 ? msa::LossSpec::squared(config->loss_bound)
                               : msa::LossSpec::cross_entropy(config->loss_bound);
    const msa::ZObjectiveContext ctx =
        posterior_route
            ? msa::ZObjectiveContext::from_posterior(calibration->data, scorer,
                                                     predictors->set, loss, config->eta)
            : msa::ZObjectiveContext::from_densities(calibration->data, scorer,
                                                     predictors->set, loss, config->eta);
    const int p = predictors->set.count();
    const int resolution =
        config->resolution > 0 ? config->resolution : (p <= 2 ? 100 : p == 3 ? 40 : 20);
    msa::ZSolveResult result;
    if (config->method == 0) {
      result = msa::grid_search_z(ctx, resolution, config->budget_cap);
    } else {
      result = msa::iterative_solve_z(ctx, msa::MixtureWeights::uniform(p));
    }
    const double spread = msa::balance_report(result, ctx);
    *json_out = copy_string(msa::zsolve_result_to_json(result, spread));
  });
}

}  // namespace

extern "C" {

const char* msa_version(void) { return "1.0.0"; }

const char* msa_last_error(void) { return g_last_error.c_str(); }

void msa_string_free(char* text) { delete[] text; }

msa_status msa_dataset_load_csv(const char* path, msa_dataset** out) {
  if (!path || !out) return invalid("dataset load: null argument");
  return guarded([&] { *out = new msa_dataset{msa::load_dataset_csv(path)}; });
}

msa_status msa_dataset_create(int64_t n, int32_t d, const double* x, const double* y,
                              const int32_t* domains, int32_t p, msa_dataset** out) {
  if (!x || !out) return invalid("dataset create: null argument");
  if (n <= 0 || d <= 0) return invalid("dataset create: n and d must be positive");
  return guarded([&] {
    std::vector<msa::Sample> samples(static_cast<std::size_t>(n));
    for (int64_t i = 0; i < n; ++i) {
      msa::Sample& s = samples[static_cast<std::size_t>(i)];
      s.x.assign(x + i * d, x + (i + 1) * d);
      if (y) s.y = y[i];
      if (domains) s.domain = domains[i];
    }
    *out = new msa_dataset{msa::Dataset(std::move(samples), p)};
  });
}

void msa_dataset_free(msa_dataset* dataset) { delete dataset; }

int64_t msa_dataset_size(const msa_dataset* dataset) {
  return dataset ? static_cast<int64_t>(dataset->data.size()) : 0;
}

int32_t msa_dataset_dim(const msa_dataset* dataset) {
  return dataset ? dataset->data.dim() : 0;
}

int32_t msa_dataset_num_domains(const msa_dataset* dataset) {
  return dataset ? dataset->data.num_domains() : 0;
}

void msa_maxent_config_init(msa_maxent_config* config) {
  if (!config) return;
  config->mu = -1.0;
  config->tol = 1e-8;
  config->max_iters = 500;
  config->seed = 0;
  config->feature_map = 0;
  config->rff_width = 64;
  config->rff_bandwidth = 1.0;
}

msa_status msa_maxent_train(const msa_dataset* data, const msa_maxent_config* config,
                            msa_posterior** out) {
  if (!data || !config || !out) return invalid("maxent train: null argument");
  return guarded([&] {
    const int p = data->data.num_domains();
    const int d = data->data.dim();
    const msa::FeatureMap fmap =
        config->feature_map == 0
            ? msa::FeatureMap::per_class_linear(p, d)
            : msa::FeatureMap::random_fourier(p, d, config->rff_width,
                                              config->rff_bandwidth, config->seed);
    double mu = config->mu;
    if (mu < 0.0) {
      const std::vector<double> grid = {1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0};
      mu = msa::select_mu_cv(data->data, fmap, grid, 5, config->seed);
    }
    msa::MaxentModel model = msa::train_maxent(data->data, mu, fmap, config->tol,
                                               config->max_iters, config->seed);
    *out = new msa_posterior{std::move(model)};
  });
}

int32_t msa_posterior_num_domains(const msa_posterior* model) {
  return model ? model->model.num_domains() : 0;
}

msa_status msa_posterior_eval(const msa_posterior* model, const double* x, int32_t d,
                              double* probs) {
  if (!model || !x || !probs) return invalid("posterior eval: null argument");
  return guarded([&] {
    if (d != model->model.input_dim()) {
      throw std::invalid_argument("posterior eval: feature dimension mismatch");
    }
    model->model.posterior_into(std::span<const double>(x, static_cast<std::size_t>(d)),
                                std::span<double>(probs, static_cast<std::size_t>(
                                                             model->model.num_domains())));
  });
}

msa_status msa_posterior_to_json(const msa_posterior* model, char** json_out) {
  if (!model || !json_out) return invalid("posterior json: null argument");
  return guarded([&] { *json_out = copy_string(msa::maxent_to_json(model->model)); });
}

msa_status msa_posterior_from_json(const char* json_text, msa_posterior** out) {
  if (!json_text || !out) return invalid("posterior json: null argument");
  return guarded([&] { *out = new msa_posterior{msa::maxent_from_json(json_text)}; });
}

void msa_posterior_free(msa_posterior* model) { delete model; }

msa_status msa_theorem3_radius(double feature_radius, double mu, int64_t m,
                               double delta, double* out) {
  if (!out) return invalid("theorem3 radius: null output");
  return guarded([&] { *out = msa::theorem3_radius(feature_radius, mu, m, delta); });
}

msa_status msa_kde_cv_bandwidth(const msa_dataset* data, int32_t domain,
                                const double* grid, int32_t grid_len, int32_t folds,
                                uint64_t seed, double* sigma_out, double* scores_out) {
  if (!data || !grid || !sigma_out) return invalid("kde cv: null argument");
  if (grid_len <= 0) return invalid("kde cv: empty grid");
  return guarded([&] {
    const auto points = data->data.domain_points(domain);
    const msa::BandwidthSelection selection = msa::select_bandwidth_cv(
        points, std::span<const double>(grid, static_cast<std::size_t>(grid_len)),
        folds, seed);
    *sigma_out = selection.sigma;
    if (scores_out) {
      std::memcpy(scores_out, selection.cv_scores.data(),
                  selection.cv_scores.size() * sizeof(double));
    }
  });
}

msa_status msa_kde_fit(const msa_dataset* data, int32_t domain, double sigma,
                       msa_kde** out) {
  if (!data || !out) return invalid("kde fit: null argument");
  return guarded([&] {
    *out = new msa_kde(msa::kde_fit(data->data.domain_points(domain), sigma));
  });
}

msa_status msa_kde_density(const msa_kde* model, const double* x, int32_t d,
                           double* out) {
  if (!model || !x || !out) return invalid("kde density: null argument");
  return guarded([&] {
    *out = model->model.density(std::span<const double>(x, static_cast<std::size_t>(d)));
  });
}

msa_status msa_kde_to_json(const msa_kde* model, int32_t domain, char** json_out) {
  if (!model || !json_out) return invalid("kde json: null argument");
  return guarded([&] { *json_out = copy_string(msa::kde_to_json(model->model, domain)); });
}

msa_status msa_kde_from_json(const char* json_text, msa_kde** out) {
  if (!json_text || !out) return invalid("kde json: null argument");
  return guarded([&] { *out = new msa_kde(msa::kde_from_json(json_text)); });
}

void msa_kde_free(msa_kde* model) { delete model; }

msa_status msa_predictors_from_json(const char* json_text, msa_predictors** out) {
  if (!json_text || !out) return invalid("predictors: null argument");
  return guarded([&] {
    auto handle = std::make_unique<msa_predictors>();
    handle->set = msa::predictors_from_json(json_text, &handle->dim);
    *out = handle.release();
  });
}

int32_t msa_predictors_count(const msa_predictors* predictors) {
  return predictors ? predictors->set.count() : 0;
}

int32_t msa_predictors_model(const msa_predictors* predictors) {
  if (!predictors) return -1;
  return predictors->set.model == msa::LossModel::kRegression ? 0 : 1;
}

int32_t msa_predictors_label_count(const msa_predictors* predictors) {
  return predictors ? predictors->set.label_count : 0;
}

void msa_predictors_free(msa_predictors* predictors) { delete predictors; }

msa_status msa_predict_posterior(const msa_predictors* predictors,
                                 const msa_posterior* posterior, const double* z,
                                 int32_t p, double eta, const double* x, int32_t d,
                                 double* prediction_out, double* weights_out,
                                 double* scores_out) {
  if (!predictors || !posterior || !z || !x || !prediction_out) {
    return invalid("predict: null argument");
  }
  const msa::MaxentModel& model = posterior->model;
  const msa::DomainScorer scorer = [&model](std::span<const double> point) {
    std::vector<double> probs(static_cast<std::size_t>(model.num_domains()));
    model.posterior_into(point, probs);
    return probs;
  };
  return combined_predict(predictors, scorer, z, p, eta, x, d, prediction_out,
                          weights_out, scores_out);
}

msa_status msa_predict_kde(const msa_predictors* predictors, const msa_kde* const* kdes,
                           const double* z, int32_t p, double eta, const double* x,
                           int32_t d, double* prediction_out, double* weights_out,
                           double* scores_out) {
  if (!predictors || !kdes || !z || !x || !prediction_out) {
    return invalid("predict: null argument");
  }
  for (int32_t k = 0; k < p; ++k) {
    if (!kdes[k]) return invalid("predict: null kde handle");
  }
  const msa::DomainScorer scorer = [kdes, p](std::span<const double> point) {
    std::vector<double> densities(static_cast<std::size_t>(p));
    for (int32_t k = 0; k < p; ++k) {
      densities[static_cast<std::size_t>(k)] =
          std::max(kdes[k]->model.density(point), 1e-300);
    }
    return densities;
  };
  return combined_predict(predictors, scorer, z, p, eta, x, d, prediction_out,
                          weights_out, scores_out);
}

msa_status msa_predict_uniform(const msa_predictors* predictors, const double* x,
                               int32_t d, double* prediction_out) {
  if (!predictors || !x || !prediction_out) return invalid("predict: null argument");
  return guarded([&] {
    if (d != predictors->dim) {
      throw std::invalid_argument("predict: feature dimension mismatch");
    }
    const std::span<const double> point(x, static_cast<std::size_t>(d));
    if (predictors->set.model == msa::LossModel::kRegression) {
      prediction_out[0] = msa::uniform_predict_regression(predictors->set, point);
    } else {
      const std::vector<double> dist =
          msa::uniform_predict_probability(predictors->set, point);
      std::memcpy(prediction_out, dist.data(), dist.size() * sizeof(double));
    }
  });
}

void msa_zsolve_config_init(msa_zsolve_config* config) {
  if (!config) return;
  config->method = 0;
  config->resolution = 0;
  config->budget_cap = 1000000;
  config->eta = 1e-8;
  config->loss_kind = 0;
  config->loss_bound = 50.0;
}

msa_status msa_solve_z_posterior(const msa_dataset* calibration,
                                 const msa_posterior* posterior,
                                 const msa_predictors* predictors,
                                 const msa_zsolve_config* config, char** json_out) {
  if (!calibration || !posterior || !predictors || !config || !json_out) {
    return invalid("solve z: null argument");
  }
  const msa::MaxentModel& model = posterior->model;
  const msa::DomainScorer scorer = [&model](std::span<const double> point) {
    std::vector<double> probs(static_cast<std::size_t>(model.num_domains()));
    model.posterior_into(point, probs);
    return probs;
  };
  return solve_z_common(calibration, scorer, true, predictors, config, json_out);
}

msa_status msa_solve_z_kde(const msa_dataset* calibration, const msa_kde* const* kdes,
                           int32_t p, const msa_predictors* predictors,
                           const msa_zsolve_config* config, char** json_out) {
  if (!calibration || !kdes || !predictors || !config || !json_out) {
    return invalid("solve z: null argument");
  }
  for (int32_t k = 0; k < p; ++k) {
    if (!kdes[k]) return invalid("solve z: null kde handle");
  }
  const msa::DomainScorer scorer = [kdes, p](std::span<const double> point) {
    std::vector<double> densities(static_cast<std::size_t>(p));
    for (int32_t k = 0; k < p; ++k) {
      densities[static_cast<std::size_t>(k)] =
          std::max(kdes[k]->model.density(point), 1e-300);
    }
    return densities;
  };
  return solve_z_common(calibration, scorer, false, predictors, config, json_out);
}

msa_status msa_renyi_divergence(const double* p, const double* q, int32_t n,
                                double alpha, double* out) {
  if (!p || !q || !out) return invalid("renyi: null argument");
  if (n <= 0) return invalid("renyi: empty distributions");
  return guarded([&] {
    const msa::FiniteDistribution dist_p(std::vector<double>(p, p + n));
    const msa::FiniteDistribution dist_q(std::vector<double>(q, q + n));
    *out = msa::renyi_divergence(dist_p, dist_q, alpha);
  });
}

msa_status msa_bound_theorem_1_2(double epsilon, double delta, double alpha, double M,
                                 double dhat, double d_target, double* out) {
  if (!out) return invalid("bound: null output");
  return guarded([&] {
    msa::BoundInputs inputs;
    inputs.epsilon = epsilon;
    inputs.delta = delta;
    inputs.alpha = alpha;
    inputs.loss_bound = M;
    inputs.dhat = dhat;
    inputs.d_target = d_target;
    *out = msa::bound_theorem_1_2(inputs);
  });
}

msa_status msa_bound_theorem_4(double epsilon, double delta, double alpha, double M,
                               double dhat, double dhat_prime, double d_2alpha_target,
                               double* out) {
  if (!out) return invalid("bound: null output");
  return guarded([&] {
    msa::BoundInputs inputs;
    inputs.epsilon = epsilon;
    inputs.delta = delta;
    inputs.alpha = alpha;
    inputs.loss_bound = M;
    inputs.dhat = dhat;
    inputs.dhat_prime = dhat_prime;
    *out = msa::bound_theorem_4(inputs, d_2alpha_target);
  });
}

msa_status msa_bound_theorem_5_dmsa(double epsilon, int32_t p, double feature_radius,
                                    double mu, int64_t m, double delta, double d_star,
                                    double d_prime_star, double* out) {
  if (!out) return invalid("bound: null output");
  return guarded([&] {
    msa::TailBoundParams params;
    params.epsilon = epsilon;
    params.num_domains = p;
    params.feature_radius = feature_radius;
    params.mu = mu;
    params.sample_size = m;
    params.delta = delta;
    params.d_star = d_star;
    params.d_prime_star = d_prime_star;
    *out = msa::bound_theorem_5_6(msa::MsaKind::kDmsa, params);
  });
}

msa_status msa_bound_theorem_6_gmsa(double epsilon, double M, double kappa, int32_t p,
                                    int64_t m, double delta, double d_star,
                                    double d_prime_star, double* out) {
  if (!out) return invalid("bound: null output");
  return guarded([&] {
    msa::TailBoundParams params;
    params.epsilon = epsilon;
    params.loss_bound = M;
    params.kappa = kappa;
    params.num_domains = p;
    params.sample_size = m;
    params.delta = delta;
    params.d_star = d_star;
    params.d_prime_star = d_prime_star;
    *out = msa::bound_theorem_5_6(msa::MsaKind::kGmsa, params);
  });
}

msa_status msa_synth_run(const char* config_json, char** report_json_out,
                         char** curves_csv_out) {
  if (!report_json_out) return invalid("synth: null output");
  return guarded([&] {
    const msa::ExperimentConfig config =
        msa::experiment_config_from_json(config_json ? config_json : "default");
    const msa::ExperimentReport report = msa::run_synthetic(config);
    *report_json_out = copy_string(msa::experiment_report_to_json(report));
    if (curves_csv_out) *curves_csv_out = copy_string(msa::experiment_curves_csv(report));
  });
}

}  // extern "C"
