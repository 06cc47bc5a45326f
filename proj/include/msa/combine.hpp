#ifndef MSA_COMBINE_HPP
#define MSA_COMBINE_HPP

#include <functional>
#include <span>
#include <vector>

#include "msa/core.hpp"

namespace msa {

// Frozen per-domain predictors. Regression predictors return a real score;
// probability predictors return a normalized distribution over the labels.
struct SourcePredictorSet {
  LossModel model = LossModel::kRegression;
  int label_count = 0;
  std::vector<RegressionFn> regression;
  std::vector<ProbabilityFn> probability;

  static SourcePredictorSet for_regression(std::vector<RegressionFn> predictors);
  static SourcePredictorSet for_probability(std::vector<ProbabilityFn> predictors,
                                            int label_count);
  int count() const;
};

// Callback producing the p per-domain scores at a point: posterior
// probabilities for the discriminative route, density estimates for the
// generative one.
using DomainScorer = std::function<std::vector<double>(std::span<const double>)>;

// w_k = z_k s_k / (sum_j z_j s_j + eta). With eta = 0 the weights sum to 1;
// an all-zero denominator with eta = 0 is an error.
std::vector<double> mix_weights(const MixtureWeights& z, std::span<const double> scores,
                                double eta);

double dmsa_predict_regression(const MixtureWeights& z, const DomainScorer& posterior,
                               const SourcePredictorSet& predictors,
                               std::span<const double> x, double eta);
std::vector<double> dmsa_predict_probability(const MixtureWeights& z,
                                             const DomainScorer& posterior,
                                             const SourcePredictorSet& predictors,
                                             std::span<const double> x, double eta);

double gmsa_predict_regression(const MixtureWeights& z, const DomainScorer& densities,
                               const SourcePredictorSet& predictors,
                               std::span<const double> x, double eta);
std::vector<double> gmsa_predict_probability(const MixtureWeights& z,
                                             const DomainScorer& densities,
                                             const SourcePredictorSet& predictors,
                                             std::span<const double> x, double eta);

// Density scores induced from a domain posterior: score_k(x) = Q(k|x) / Qhat_k
// with Qhat_k the posterior mass averaged over samples drawn from the pooled
// marginal. The common marginal factor cancels inside mix_weights and is
// omitted.
struct PosteriorInducedDensities {
  DomainScorer posterior;
  std::vector<double> qhat;

  std::vector<double> scores(std::span<const double> x) const;
  DomainScorer scorer() const;
};

PosteriorInducedDensities induce_densities(const DomainScorer& posterior,
                                           const Dataset& marginal_samples);

// z'_k = (z_k / qhat_k) / sum_j (z_j / qhat_j).
MixtureWeights map_z_prime(const MixtureWeights& z, std::span<const double> qhat);

double uniform_predict_regression(const SourcePredictorSet& predictors,
                                  std::span<const double> x);
std::vector<double> uniform_predict_probability(const SourcePredictorSet& predictors,
                                                std::span<const double> x);

}  // namespace msa

#endif  // MSA_COMBINE_HPP
