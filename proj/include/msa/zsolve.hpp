#ifndef MSA_ZSOLVE_HPP
#define MSA_ZSOLVE_HPP

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "msa/combine.hpp"
#include "msa/core.hpp"

namespace msa {

// Provider of the per-domain losses entering the min-max objective. The
// data-driven implementation is ZObjectiveContext; tests may stub it.
class ZLossSource {
 public:
  virtual ~ZLossSource() = default;
  virtual int num_domains() const = 0;
  // Loss of the combined predictor on each domain's evaluation measure.
  virtual std::vector<double> per_domain_losses(const MixtureWeights& z) const = 0;
  // Posterior mass estimates used to map z to the deployed parameter z'.
  virtual std::vector<double> qhat() const;
};

struct ZObjectiveValue {
  double objective = 0.0;
  std::vector<double> per_domain_losses;
};

// max_k L_k(z) - sum_k z_k L_k(z); nonnegative for every simplex z.
ZObjectiveValue z_objective(const MixtureWeights& z, const ZLossSource& source);

// Pooled labeled evaluation data reweighted per domain. Each pooled sample
// contributes to domain k with importance weight
//   posterior route:  Q(k|x) / Qhat_k
//   density route:    Dhat_k(x) / mean_j Dhat_j(x)
// and per-domain losses are self-normalized weighted means. Predictions use
// the combiner at z' = map_z_prime(z, qhat); the density route has uniform
// qhat, so z' = z there.
class ZObjectiveContext : public ZLossSource {
 public:
  static ZObjectiveContext from_posterior(const Dataset& calibration,
                                          const DomainScorer& posterior,
                                          const SourcePredictorSet& predictors,
                                          const LossSpec& loss, double eta);
  static ZObjectiveContext from_densities(const Dataset& calibration,
                                          const DomainScorer& densities,
                                          const SourcePredictorSet& predictors,
                                          const LossSpec& loss, double eta);

  int num_domains() const override { return p_; }
  std::vector<double> per_domain_losses(const MixtureWeights& z) const override;
  std::vector<double> qhat() const override { return qhat_; }

 private:
  ZObjectiveContext() = default;
  void build(const Dataset& calibration, const DomainScorer& scorer,
             const SourcePredictorSet& predictors, const LossSpec& loss, double eta,
             bool posterior_route);

  int p_ = 0;
  double eta_ = 0.0;
  LossSpec loss_;
  std::size_t count_ = 0;
  int label_count_ = 0;
  bool regression_ = true;
  std::vector<double> scores_;        // count x p
  std::vector<double> weights_;       // p x count importance weights
  std::vector<double> weight_sums_;   // p
  std::vector<double> labels_;        // count (real label or class index)
  std::vector<double> values_;        // regression: count x p predictor values
  std::vector<double> prob_values_;   // probability: count x p x label_count
  std::vector<double> qhat_;
};

struct ZSolveResult {
  MixtureWeights z{std::vector<double>{1.0}};
  MixtureWeights z_prime{std::vector<double>{1.0}};
  double objective = 0.0;
  std::vector<double> per_domain_losses;
  std::string method;
  int iterations = 0;
  bool converged = false;
};

// Exhaustive minimization over the lattice {z : z_k = n_k / resolution}.
// Ties break toward the lexicographically smallest z. The lattice size
// C(resolution + p - 1, p - 1) must not exceed budget_cap.
ZSolveResult grid_search_z(const ZLossSource& source, int resolution,
                           std::int64_t budget_cap = 1000000);

struct IterativeOptions {
  std::vector<double> temperatures{1.0, 0.3, 0.1, 0.03, 0.01};
  int iterations_per_stage = 60;
  double initial_step = 0.25;
  double fd_step = 1e-4;
  double tol = 1e-10;
};

// Substitute for an exact DC decomposition: projected descent on the
// log-sum-exp smoothed objective with a decreasing temperature, followed by
// a pairwise-exchange polish on the true objective. Deterministic; returns
// the best z visited (never worse than the initializer).
ZSolveResult iterative_solve_z(const ZLossSource& source, const MixtureWeights& init,
                               const IterativeOptions& options = {});

// spread = max_k L_k - min over {k : z_k > 1e-6} of L_k at the solution.
double balance_report(const ZSolveResult& solution, const ZLossSource& source);

}  // namespace msa

#endif  // MSA_ZSOLVE_HPP
