#include "msa/combine.hpp"

#include <cmath>
#include <numeric>

namespace msa {

namespace {

void check_scores(std::span<const double> scores, int expected) {
  if (static_cast<int>(scores.size()) != expected) {
    throw std::invalid_argument("combine: score count does not match z");
  }
  for (double s : scores) {
    if (!(s >= 0.0)) throw std::invalid_argument("combine: negative domain score");
  }
}

std::vector<double> checked_probability(const ProbabilityFn& predictor,
                                        std::span<const double> x, int label_count) {
  std::vector<double> dist = predictor(x);
  if (static_cast<int>(dist.size()) != label_count) {
    throw std::invalid_argument("combine: predictor label count mismatch");
  }
  double sum = 0.0;
  for (double v : dist) sum += v;
  if (std::abs(sum - 1.0) > 1e-10) {
    throw std::invalid_argument("combine: probability predictor is not normalized");
  }
  return dist;
}

double weighted_regression(const MixtureWeights& z, std::span<const double> scores,
                           const SourcePredictorSet& predictors,
                           std::span<const double> x, double eta) {
  if (predictors.model != LossModel::kRegression) {
    throw std::invalid_argument("combine: regression predictors required");
  }
  const std::vector<double> w = mix_weights(z, scores, eta);
  double out = 0.0;
  for (int k = 0; k < predictors.count(); ++k) {
    if (w[static_cast<std::size_t>(k)] == 0.0) continue;
    out += w[static_cast<std::size_t>(k)] * predictors.regression[static_cast<std::size_t>(k)](x);
  }
  return out;
}

std::vector<double> weighted_probability(const MixtureWeights& z,
                                         std::span<const double> scores,
                                         const SourcePredictorSet& predictors,
                                         std::span<const double> x, double eta) {
  if (predictors.model != LossModel::kProbability) {
    throw std::invalid_argument("combine: probability predictors required");
  }
  const std::vector<double> w = mix_weights(z, scores, eta);
  std::vector<double> out(static_cast<std::size_t>(predictors.label_count), 0.0);
  for (int k = 0; k < predictors.count(); ++k) {
    if (w[static_cast<std::size_t>(k)] == 0.0) continue;
    const std::vector<double> dist =
        checked_probability(predictors.probability[static_cast<std::size_t>(k)], x,
                            predictors.label_count);
    for (std::size_t y = 0; y < out.size(); ++y) {
      out[y] += w[static_cast<std::size_t>(k)] * dist[y];
    }
  }
  return out;
}

}  // namespace

SourcePredictorSet SourcePredictorSet::for_regression(std::vector<RegressionFn> predictors) {
  if (predictors.empty()) throw std::invalid_argument("predictors: empty set");
  SourcePredictorSet set;
  set.model = LossModel::kRegression;
  set.regression = std::move(predictors);
  return set;
}

SourcePredictorSet SourcePredictorSet::for_probability(std::vector<ProbabilityFn> predictors,
                                                       int label_count) {
  if (predictors.empty()) throw std::invalid_argument("predictors: empty set");
  if (label_count < 2) throw std::invalid_argument("predictors: need at least 2 labels");
  SourcePredictorSet set;
  set.model = LossModel::kProbability;
  set.label_count = label_count;
  set.probability = std::move(predictors);
  return set;
}

int SourcePredictorSet::count() const {
  return static_cast<int>(model == LossModel::kRegression ? regression.size()
                                                          : probability.size());
}

std::vector<double> mix_weights(const MixtureWeights& z, std::span<const double> scores,
                                double eta) {
  check_scores(scores, z.size());
  if (!(eta >= 0.0)) throw std::invalid_argument("combine: eta must be >= 0");
  double denom = eta;
  for (int k = 0; k < z.size(); ++k) denom += z[k] * scores[static_cast<std::size_t>(k)];
  if (denom <= 0.0) {
    throw NumericError("combine: all weighted scores vanish; add smoothing eta > 0");
  }
  std::vector<double> w(scores.size());
  for (int k = 0; k < z.size(); ++k) {
    w[static_cast<std::size_t>(k)] = z[k] * scores[static_cast<std::size_t>(k)] / denom;
  }
  return w;
}

double dmsa_predict_regression(const MixtureWeights& z, const DomainScorer& posterior,
                               const SourcePredictorSet& predictors,
                               std::span<const double> x, double eta) {
  return weighted_regression(z, posterior(x), predictors, x, eta);
}

std::vector<double> dmsa_predict_probability(const MixtureWeights& z,
                                             const DomainScorer& posterior,
                                             const SourcePredictorSet& predictors,
                                             std::span<const double> x, double eta) {
  return weighted_probability(z, posterior(x), predictors, x, eta);
}

double gmsa_predict_regression(const MixtureWeights& z, const DomainScorer& densities,
                               const SourcePredictorSet& predictors,
                               std::span<const double> x, double eta) {
  return weighted_regression(z, densities(x), predictors, x, eta);
}

std::vector<double> gmsa_predict_probability(const MixtureWeights& z,
                                             const DomainScorer& densities,
                                             const SourcePredictorSet& predictors,
                                             std::span<const double> x, double eta) {
  return weighted_probability(z, densities(x), predictors, x, eta);
}

std::vector<double> PosteriorInducedDensities::scores(std::span<const double> x) const {
  std::vector<double> s = posterior(x);
  if (s.size() != qhat.size()) {
    throw std::invalid_argument("induced densities: posterior size mismatch");
  }
  for (std::size_t k = 0; k < s.size(); ++k) s[k] /= qhat[k];
  return s;
}

DomainScorer PosteriorInducedDensities::scorer() const {
  PosteriorInducedDensities copy = *this;
  return [copy](std::span<const double> x) { return copy.scores(x); };
}

PosteriorInducedDensities induce_densities(const DomainScorer& posterior,
                                           const Dataset& marginal_samples) {
  std::vector<double> qhat;
  for (const Sample& s : marginal_samples.samples()) {
    const std::vector<double> probs = posterior(s.x);
    if (qhat.empty()) qhat.assign(probs.size(), 0.0);
    if (probs.size() != qhat.size()) {
      throw std::invalid_argument("induced densities: posterior size changed across samples");
    }
    for (std::size_t k = 0; k < probs.size(); ++k) qhat[k] += probs[k];
  }
  for (std::size_t k = 0; k < qhat.size(); ++k) {
    qhat[k] /= static_cast<double>(marginal_samples.size());
    if (qhat[k] < 1e-12) {
      throw NumericError("induced densities: domain " + std::to_string(k) +
                         " has vanishing posterior mass");
    }
  }
  PosteriorInducedDensities induced;
  induced.posterior = posterior;
  induced.qhat = std::move(qhat);
  return induced;
}

MixtureWeights map_z_prime(const MixtureWeights& z, std::span<const double> qhat) {
  if (static_cast<int>(qhat.size()) != z.size()) {
    throw std::invalid_argument("z prime: qhat size mismatch");
  }
  std::vector<double> ratio(qhat.size());
  double sum = 0.0;
  for (int k = 0; k < z.size(); ++k) {
    if (!(qhat[static_cast<std::size_t>(k)] > 0.0)) {
      throw std::invalid_argument("z prime: qhat entries must be positive");
    }
    ratio[static_cast<std::size_t>(k)] = z[k] / qhat[static_cast<std::size_t>(k)];
    sum += ratio[static_cast<std::size_t>(k)];
  }
  for (double& v : ratio) v /= sum;
  return MixtureWeights(std::move(ratio));
}

double uniform_predict_regression(const SourcePredictorSet& predictors,
                                  std::span<const double> x) {
  if (predictors.model != LossModel::kRegression) {
    throw std::invalid_argument("combine: regression predictors required");
  }
  double total = 0.0;
  for (const RegressionFn& h : predictors.regression) total += h(x);
  return total / static_cast<double>(predictors.count());
}

std::vector<double> uniform_predict_probability(const SourcePredictorSet& predictors,
                                                std::span<const double> x) {
  if (predictors.model != LossModel::kProbability) {
    throw std::invalid_argument("combine: probability predictors required");
  }
  std::vector<double> out(static_cast<std::size_t>(predictors.label_count), 0.0);
  for (const ProbabilityFn& h : predictors.probability) {
    const std::vector<double> dist = checked_probability(h, x, predictors.label_count);
    for (std::size_t y = 0; y < out.size(); ++y) out[y] += dist[y];
  }
  for (double& v : out) v /= static_cast<double>(predictors.count());
  return out;
}

}  // namespace msa
