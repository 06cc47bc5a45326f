#ifndef MSA_MAXENT_HPP
#define MSA_MAXENT_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "msa/core.hpp"
#include "msa/renyi.hpp"

namespace msa {

enum class FeatureMapKind { kPerClassLinear, kRandomFourier };

// Feature mapping Phi(x, k) in R^N with per-class block structure:
// block k holds the per-input features plus a bias. PerClassLinear uses
// (x, 1) per block; RandomFourier uses (sqrt(2/W) cos(w_j . x + b_j), 1).
class FeatureMap {
 public:
  static FeatureMap per_class_linear(int num_domains, int input_dim);
  static FeatureMap random_fourier(int num_domains, int input_dim, int width,
                                   double bandwidth, std::uint64_t seed);

  FeatureMapKind kind() const { return kind_; }
  int num_domains() const { return num_domains_; }
  int input_dim() const { return input_dim_; }
  int block_dim() const { return block_dim_; }
  int output_dim() const { return num_domains_ * block_dim_; }
  int width() const { return width_; }
  double bandwidth() const { return bandwidth_; }
  std::uint64_t seed() const { return seed_; }

  // Per-input features shared by every class block (size block_dim).
  void block_features(std::span<const double> x, std::span<double> out) const;
  // w . Phi(x, k) given precomputed block features.
  double logit(std::span<const double> w, std::span<const double> block, int k) const;
  // g += c * Phi(x, k) given precomputed block features.
  void add_scaled(std::span<double> g, std::span<const double> block, int k,
                  double c) const;
  // ||Phi(x, k)|| (independent of k by construction).
  double feature_norm(std::span<const double> x) const;

 private:
  FeatureMapKind kind_ = FeatureMapKind::kPerClassLinear;
  int num_domains_ = 0;
  int input_dim_ = 0;
  int block_dim_ = 0;
  int width_ = 0;
  double bandwidth_ = 1.0;
  std::uint64_t seed_ = 0;
  std::vector<double> omega_;  // width x input_dim, row-major
  std::vector<double> phase_;  // width
};

struct MaxentModel {
  FeatureMap feature_map;
  std::vector<double> weights;
  double mu = 0.0;
  double feature_radius = 0.0;  // max ||Phi|| over the training set
  std::uint64_t seed = 0;
  bool converged = false;
  int iterations = 0;
  double gradient_norm = 0.0;

  int num_domains() const { return feature_map.num_domains(); }
  int input_dim() const { return feature_map.input_dim(); }
  // Softmax posterior over domains; entries floored at 1e-300.
  void posterior_into(std::span<const double> x, std::span<double> out) const;
};

// mu ||w||^2 - (1/m) sum_i log p_w[k_i | x_i], stabilized with log-sum-exp.
double maxent_objective(const FeatureMap& fmap, std::span<const double> w,
                        const Dataset& data, double mu);

// 2 mu w + (1/m) sum_i [ sum_k p_w[k|x_i] Phi(x_i,k) - Phi(x_i,k_i) ].
std::vector<double> maxent_gradient(const FeatureMap& fmap, std::span<const double> w,
                                    const Dataset& data, double mu);

struct MaxentOptions {
  double tol = 1e-8;
  int max_iters = 500;
};

// Deterministic L-BFGS with backtracking line search. Requires every sample
// to carry a domain label and every domain to be represented.
MaxentModel train_maxent(const Dataset& data, double mu, const FeatureMap& fmap,
                         double tol = 1e-8, int max_iters = 500,
                         std::uint64_t seed = 0);

FiniteDistribution posterior(const MaxentModel& model, std::span<const double> x);

// Five-fold cross-validated regularization choice over `grid`, scored by
// held-out log-loss; ties break toward the larger (smoother) mu.
double select_mu_cv(const Dataset& data, const FeatureMap& fmap,
                    std::span<const double> grid, int folds, std::uint64_t seed,
                    std::vector<double>* cv_scores = nullptr);

// 2 sqrt(2) r^2 / (mu sqrt(m)) * [1 + sqrt(log(1/delta))].
double theorem3_radius(double feature_radius, double mu, std::int64_t m, double delta);

}  // namespace msa

#endif  // MSA_MAXENT_HPP
