#include "msa/zsolve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace msa {

namespace {

double lattice_point_count(int resolution, int p) {
  // C(resolution + p - 1, p - 1), computed in floating point for the cap check.
  double count = 1.0;
  for (int i = 1; i < p; ++i) {
    count *= static_cast<double>(resolution + i) / static_cast<double>(i);
  }
  return count;
}

void enumerate_lattice(int resolution, int p,
                       const std::function<void(const std::vector<double>&)>& visit) {
  std::vector<int> counts(static_cast<std::size_t>(p), 0);
  std::vector<double> z(static_cast<std::size_t>(p), 0.0);
  // Lexicographic enumeration over compositions of `resolution` into p parts.
  std::function<void(int, int)> recurse = [&](int index, int remaining) {
    if (index == p - 1) {
      counts[static_cast<std::size_t>(index)] = remaining;
      for (int k = 0; k < p; ++k) {
        z[static_cast<std::size_t>(k)] =
            static_cast<double>(counts[static_cast<std::size_t>(k)]) / resolution;
      }
      visit(z);
      return;
    }
    for (int n = 0; n <= remaining; ++n) {
      counts[static_cast<std::size_t>(index)] = n;
      recurse(index + 1, remaining - n);
    }
  };
  recurse(0, resolution);
}

MixtureWeights normalized_weights(std::vector<double> z) {
  double sum = 0.0;
  for (double v : z) sum += v;
  for (double& v : z) v /= sum;
  return MixtureWeights(std::move(z));
}

}  // namespace

std::vector<double> ZLossSource::qhat() const {
  return std::vector<double>(static_cast<std::size_t>(num_domains()),
                             1.0 / num_domains());
}

ZObjectiveValue z_objective(const MixtureWeights& z, const ZLossSource& source) {
  if (z.size() != source.num_domains()) {
    throw std::invalid_argument("z objective: dimension mismatch");
  }
  ZObjectiveValue value;
  value.per_domain_losses = source.per_domain_losses(z);
  double max_loss = -std::numeric_limits<double>::infinity();
  double mix_loss = 0.0;
  for (int k = 0; k < z.size(); ++k) {
    const double loss = value.per_domain_losses[static_cast<std::size_t>(k)];
    if (!std::isfinite(loss)) throw NumericError("z objective: non-finite domain loss");
    max_loss = std::max(max_loss, loss);
    mix_loss += z[k] * loss;
  }
  value.objective = max_loss - mix_loss;
  return value;
}

ZObjectiveContext ZObjectiveContext::from_posterior(const Dataset& calibration,
                                                    const DomainScorer& posterior,
                                                    const SourcePredictorSet& predictors,
                                                    const LossSpec& loss, double eta) {
  ZObjectiveContext ctx;
  ctx.build(calibration, posterior, predictors, loss, eta, true);
  return ctx;
}

ZObjectiveContext ZObjectiveContext::from_densities(const Dataset& calibration,
                                                    const DomainScorer& densities,
                                                    const SourcePredictorSet& predictors,
                                                    const LossSpec& loss, double eta) {
  ZObjectiveContext ctx;
  ctx.build(calibration, densities, predictors, loss, eta, false);
  return ctx;
}

void ZObjectiveContext::build(const Dataset& calibration, const DomainScorer& scorer,
                              const SourcePredictorSet& predictors, const LossSpec& loss,
                              double eta, bool posterior_route) {
  loss.validate();
  if (!calibration.fully_labeled()) {
    throw std::invalid_argument("z context: calibration data must be labeled");
  }
  if (!(eta >= 0.0)) throw std::invalid_argument("z context: eta must be >= 0");
  p_ = predictors.count();
  eta_ = eta;
  loss_ = loss;
  count_ = calibration.size();
  regression_ = predictors.model == LossModel::kRegression;
  label_count_ = predictors.label_count;
  if ((loss.model == LossModel::kRegression) != regression_) {
    throw std::invalid_argument("z context: loss model does not match predictors");
  }

  scores_.resize(count_ * static_cast<std::size_t>(p_));
  labels_.resize(count_);
  if (regression_) {
    values_.resize(count_ * static_cast<std::size_t>(p_));
  } else {
    prob_values_.resize(count_ * static_cast<std::size_t>(p_) *
                        static_cast<std::size_t>(label_count_));
  }

  for (std::size_t i = 0; i < count_; ++i) {
    const Sample& s = calibration[i];
    labels_[i] = *s.y;
    const std::vector<double> scores = scorer(s.x);
    if (static_cast<int>(scores.size()) != p_) {
      throw std::invalid_argument("z context: scorer output size mismatch");
    }
    for (int k = 0; k < p_; ++k) {
      scores_[i * static_cast<std::size_t>(p_) + static_cast<std::size_t>(k)] =
          scores[static_cast<std::size_t>(k)];
    }
    if (regression_) {
      for (int k = 0; k < p_; ++k) {
        values_[i * static_cast<std::size_t>(p_) + static_cast<std::size_t>(k)] =
            predictors.regression[static_cast<std::size_t>(k)](s.x);
      }
    } else {
      for (int k = 0; k < p_; ++k) {
        const std::vector<double> dist =
            predictors.probability[static_cast<std::size_t>(k)](s.x);
        if (static_cast<int>(dist.size()) != label_count_) {
          throw std::invalid_argument("z context: predictor label count mismatch");
        }
        std::copy(dist.begin(), dist.end(),
                  prob_values_.begin() +
                      static_cast<std::ptrdiff_t>(
                          (i * static_cast<std::size_t>(p_) + static_cast<std::size_t>(k)) *
                          static_cast<std::size_t>(label_count_)));
      }
    }
  }

  // Importance weights representing the per-domain evaluation measures.
  weights_.assign(static_cast<std::size_t>(p_) * count_, 0.0);
  weight_sums_.assign(static_cast<std::size_t>(p_), 0.0);
  qhat_.assign(static_cast<std::size_t>(p_), 0.0);
  if (posterior_route) {
    for (std::size_t i = 0; i < count_; ++i) {
      for (int k = 0; k < p_; ++k) {
        qhat_[static_cast<std::size_t>(k)] +=
            scores_[i * static_cast<std::size_t>(p_) + static_cast<std::size_t>(k)];
      }
    }
    for (int k = 0; k < p_; ++k) {
      qhat_[static_cast<std::size_t>(k)] /= static_cast<double>(count_);
      if (qhat_[static_cast<std::size_t>(k)] < 1e-12) {
        throw NumericError("z context: domain " + std::to_string(k) +
                           " has vanishing posterior mass");
      }
    }
    for (std::size_t i = 0; i < count_; ++i) {
      for (int k = 0; k < p_; ++k) {
        const double w =
            scores_[i * static_cast<std::size_t>(p_) + static_cast<std::size_t>(k)] /
            qhat_[static_cast<std::size_t>(k)];
        weights_[static_cast<std::size_t>(k) * count_ + i] = w;
        weight_sums_[static_cast<std::size_t>(k)] += w;
      }
    }
  } else {
    qhat_.assign(static_cast<std::size_t>(p_), 1.0 / p_);
    for (std::size_t i = 0; i < count_; ++i) {
      double mean_density = 0.0;
      for (int k = 0; k < p_; ++k) {
        mean_density +=
            scores_[i * static_cast<std::size_t>(p_) + static_cast<std::size_t>(k)];
      }
      mean_density /= static_cast<double>(p_);
      if (mean_density <= 0.0) mean_density = 1e-300;
      for (int k = 0; k < p_; ++k) {
        const double w =
            scores_[i * static_cast<std::size_t>(p_) + static_cast<std::size_t>(k)] /
            mean_density;
        weights_[static_cast<std::size_t>(k) * count_ + i] = w;
        weight_sums_[static_cast<std::size_t>(k)] += w;
      }
    }
  }
  for (int k = 0; k < p_; ++k) {
    if (weight_sums_[static_cast<std::size_t>(k)] <= 0.0) {
      throw NumericError("z context: domain " + std::to_string(k) +
                         " carries no evaluation weight");
    }
  }
}

std::vector<double> ZObjectiveContext::per_domain_losses(const MixtureWeights& z) const {
  if (z.size() != p_) throw std::invalid_argument("z context: dimension mismatch");
  const MixtureWeights z_prime = map_z_prime(z, qhat_);
  std::vector<double> losses(static_cast<std::size_t>(p_), 0.0);
  std::vector<double> combined(static_cast<std::size_t>(label_count_));
  for (std::size_t i = 0; i < count_; ++i) {
    const std::span<const double> scores(scores_.data() + i * static_cast<std::size_t>(p_),
                                         static_cast<std::size_t>(p_));
    const std::vector<double> w = mix_weights(z_prime, scores, eta_);
    double loss_value = 0.0;
    if (regression_) {
      double prediction = 0.0;
      for (int k = 0; k < p_; ++k) {
        prediction += w[static_cast<std::size_t>(k)] *
                      values_[i * static_cast<std::size_t>(p_) + static_cast<std::size_t>(k)];
      }
      loss_value = point_loss(loss_, prediction, labels_[i]).value;
    } else {
      std::fill(combined.begin(), combined.end(), 0.0);
      for (int k = 0; k < p_; ++k) {
        const double wk = w[static_cast<std::size_t>(k)];
        const double* dist =
            prob_values_.data() +
            (i * static_cast<std::size_t>(p_) + static_cast<std::size_t>(k)) *
                static_cast<std::size_t>(label_count_);
        for (int y = 0; y < label_count_; ++y) {
          combined[static_cast<std::size_t>(y)] += wk * dist[y];
        }
      }
      loss_value =
          point_loss(loss_, combined, static_cast<int>(std::llround(labels_[i]))).value;
    }
    for (int k = 0; k < p_; ++k) {
      losses[static_cast<std::size_t>(k)] +=
          weights_[static_cast<std::size_t>(k) * count_ + i] * loss_value;
    }
  }
  for (int k = 0; k < p_; ++k) {
    losses[static_cast<std::size_t>(k)] /= weight_sums_[static_cast<std::size_t>(k)];
  }
  return losses;
}

ZSolveResult grid_search_z(const ZLossSource& source, int resolution,
                           std::int64_t budget_cap) {
  if (resolution < 1) throw std::invalid_argument("grid search: resolution must be >= 1");
  const int p = source.num_domains();
  if (p < 1) throw std::invalid_argument("grid search: need at least one domain");
  if (lattice_point_count(resolution, p) > static_cast<double>(budget_cap)) {
    throw std::invalid_argument(
        "grid search: lattice exceeds the evaluation budget; use the iterative solver");
  }

  ZSolveResult best;
  best.method = "grid";
  double best_objective = std::numeric_limits<double>::infinity();
  std::vector<double> best_z;
  std::vector<double> best_losses;
  int evaluations = 0;
  enumerate_lattice(resolution, p, [&](const std::vector<double>& z_raw) {
    const MixtureWeights z = normalized_weights(z_raw);
    const ZObjectiveValue value = z_objective(z, source);
    ++evaluations;
    // Objectives within rounding noise of each other count as ties, and the
    // first-enumerated (lexicographically smallest) z wins a tie.
    const bool first = best_z.empty();
    const double tie_band =
        first ? 0.0 : 1e-12 * std::max(1.0, std::abs(best_objective));
    if (first || value.objective < best_objective - tie_band) {
      best_objective = value.objective;
      best_z = z.values();
      best_losses = value.per_domain_losses;
    }
  });

  best.z = MixtureWeights(best_z);
  best.z_prime = map_z_prime(best.z, source.qhat());
  best.objective = best_objective;
  best.per_domain_losses = std::move(best_losses);
  best.iterations = evaluations;
  best.converged = true;
  return best;
}

namespace {

double smoothed_objective(const std::vector<double>& losses, const MixtureWeights& z,
                          double temperature) {
  double max_loss = -std::numeric_limits<double>::infinity();
  for (double l : losses) max_loss = std::max(max_loss, l);
  double sum = 0.0;
  for (double l : losses) sum += std::exp((l - max_loss) / temperature);
  const double softmax = max_loss + temperature * std::log(sum);
  double mix = 0.0;
  for (int k = 0; k < z.size(); ++k) mix += z[k] * losses[static_cast<std::size_t>(k)];
  return softmax - mix;
}

}  // namespace

ZSolveResult iterative_solve_z(const ZLossSource& source, const MixtureWeights& init,
                               const IterativeOptions& options) {
  const int p = source.num_domains();
  if (init.size() != p) throw std::invalid_argument("iterative solve: init dimension mismatch");

  auto true_objective = [&](const MixtureWeights& z) { return z_objective(z, source); };

  MixtureWeights best_z = init;
  ZObjectiveValue best_value = true_objective(init);
  MixtureWeights current = init;
  int iterations = 0;

  auto consider = [&](const MixtureWeights& z, const ZObjectiveValue& value) {
    if (value.objective < best_value.objective) {
      best_value = value;
      best_z = z;
      return true;
    }
    return false;
  };

  for (double temperature : options.temperatures) {
    auto surrogate = [&](const MixtureWeights& z) {
      return smoothed_objective(source.per_domain_losses(z), z, temperature);
    };
    double step = options.initial_step;
    for (int it = 0; it < options.iterations_per_stage; ++it) {
      ++iterations;
      const double f0 = surrogate(current);
      consider(current, true_objective(current));

      // Finite-difference gradient in the ambient space, evaluated through
      // the simplex projection so off-simplex probes stay feasible.
      std::vector<double> grad(static_cast<std::size_t>(p), 0.0);
      for (int k = 0; k < p; ++k) {
        std::vector<double> probe = current.values();
        probe[static_cast<std::size_t>(k)] += options.fd_step;
        const double f_plus = surrogate(project_to_simplex(probe));
        probe[static_cast<std::size_t>(k)] -= 2.0 * options.fd_step;
        const double f_minus = surrogate(project_to_simplex(probe));
        grad[static_cast<std::size_t>(k)] = (f_plus - f_minus) / (2.0 * options.fd_step);
      }
      double grad_norm = 0.0;
      for (double g : grad) grad_norm += g * g;
      grad_norm = std::sqrt(grad_norm);
      if (grad_norm < options.tol) break;

      bool moved = false;
      double trial_step = step;
      for (int backtrack = 0; backtrack < 20; ++backtrack) {
        std::vector<double> candidate = current.values();
        for (int k = 0; k < p; ++k) {
          candidate[static_cast<std::size_t>(k)] -=
              trial_step * grad[static_cast<std::size_t>(k)] / grad_norm;
        }
        const MixtureWeights projected = project_to_simplex(candidate);
        if (surrogate(projected) < f0 - 1e-15) {
          current = projected;
          consider(current, true_objective(current));
          moved = true;
          step = std::min(trial_step * 2.0, options.initial_step);
          break;
        }
        trial_step *= 0.5;
      }
      if (!moved) break;
    }
  }

  // Pairwise-exchange polish on the true objective.
  bool polished_converged = false;
  for (double h : {0.05, 0.02, 0.01, 0.005, 0.002, 0.001}) {
    bool improved = true;
    int sweeps = 0;
    while (improved && sweeps < 200) {
      improved = false;
      ++sweeps;
      for (int i = 0; i < p && !improved; ++i) {
        for (int j = 0; j < p && !improved; ++j) {
          if (i == j) continue;
          std::vector<double> candidate = best_z.values();
          const double transfer = std::min(h, candidate[static_cast<std::size_t>(j)]);
          if (transfer <= 0.0) continue;
          candidate[static_cast<std::size_t>(i)] += transfer;
          candidate[static_cast<std::size_t>(j)] -= transfer;
          const MixtureWeights z = project_to_simplex(candidate);
          ++iterations;
          if (consider(z, true_objective(z))) improved = true;
        }
      }
    }
    polished_converged = !improved;
  }

  ZSolveResult result;
  result.method = "iterative";
  result.z = best_z;
  result.z_prime = map_z_prime(best_z, source.qhat());
  result.objective = best_value.objective;
  result.per_domain_losses = best_value.per_domain_losses;
  result.iterations = iterations;
  result.converged = polished_converged;
  return result;
}

double balance_report(const ZSolveResult& solution, const ZLossSource& source) {
  const std::vector<double> losses = source.per_domain_losses(solution.z);
  double max_loss = -std::numeric_limits<double>::infinity();
  double min_active = std::numeric_limits<double>::infinity();
  for (int k = 0; k < solution.z.size(); ++k) {
    max_loss = std::max(max_loss, losses[static_cast<std::size_t>(k)]);
    if (solution.z[k] > 1e-6) {
      min_active = std::min(min_active, losses[static_cast<std::size_t>(k)]);
    }
  }
  if (!std::isfinite(min_active)) return 0.0;
  return max_loss - min_active;
}

}  // namespace msa
