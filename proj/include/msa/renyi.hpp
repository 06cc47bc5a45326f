#ifndef MSA_RENYI_HPP
#define MSA_RENYI_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "msa/core.hpp"

namespace msa {

// Probability vector over a finite support; entries sum to 1 within 1e-12.
class FiniteDistribution {
 public:
  explicit FiniteDistribution(std::vector<double> probs);
  const std::vector<double>& probs() const { return probs_; }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::size_t size() const { return probs_.size(); }

 private:
  std::vector<double> probs_;
};

// alpha-Renyi divergence D_alpha(P || Q); alpha in [0, +inf].
// alpha = 1 is relative entropy, alpha = +inf is log sup P_i/Q_i,
// alpha = 0 is -log Q(support of P). Returns +inf when Q vanishes where it
// must not; never NaN.
double renyi_divergence(const FiniteDistribution& p, const FiniteDistribution& q,
                        double alpha);

// d_alpha(P || Q) = exp(D_alpha(P || Q)); always >= 1 (up to rounding).
double renyi_exp(const FiniteDistribution& p, const FiniteDistribution& q,
                 double alpha);

struct TriangleCheck {
  double lhs_log = 0.0;  // (alpha-1) * D_alpha(P || Q)
  double rhs_log = 0.0;  // (alpha-gamma) * D_{a/g}(P||R) + (alpha-1) * D_{(a-g)/(1-g)}(R||Q)
  double slack = 0.0;    // exp(rhs_log) - exp(lhs_log)
  bool infinite = false;
};

// Slack of d_a(P||Q)^{a-1} <= d_{a/g}(P||R)^{a-g} * d_{(a-g)/(1-g)}(R||Q)^{a-1}
// for gamma in (0,1), alpha > gamma.
TriangleCheck triangle_slack(const FiniteDistribution& p, const FiniteDistribution& q,
                             const FiniteDistribution& r, double alpha, double gamma);

// Inputs for the closed-form excess-loss bounds. Divergence fields are the
// exponentiated divergences d_alpha (all >= 1).
struct BoundInputs {
  double epsilon = 0.0;     // per-source accuracy
  double delta = 0.0;       // slack
  double alpha = 2.0;       // > 1, +inf allowed
  double loss_bound = 1.0;  // M
  double dhat = 1.0;        // max_k d_alpha(Dhat_k || D_k)
  double dhat_prime = 1.0;  // max_k d_{2 alpha - 1}(D_k || Dhat_k)
  double d_target = 1.0;    // d_alpha(D_T || mixture family)
  void validate() const;
};

// [(eps_hat + delta) * d_target]^{(a-1)/a} * M^{1/a},
// eps_hat = [epsilon * dhat]^{(a-1)/a} * M^{1/a}.
double bound_theorem_1_2(const BoundInputs& inputs);

// [(eps_hat + delta) * dhat_prime]^{(a-1)/a}
//   * d_2alpha_target^{(2a-1)/(2a)} * M^{1/a}.
double bound_theorem_4(const BoundInputs& inputs, double d_2alpha_target);

enum class MsaKind { kDmsa, kGmsa };

struct TailBoundParams {
  double epsilon = 0.0;
  int num_domains = 1;       // p
  std::int64_t sample_size = 1;  // m
  double delta = 0.5;        // in (0, 1]
  double d_star = 1.0;
  double d_prime_star = 1.0;
  double feature_radius = 0.0;  // r       (DMSA)
  double mu = 0.0;              // maxent regularization (DMSA)
  double kappa = 1.0;           // kernel ratio bound    (GMSA)
  double loss_bound = 1.0;      // M                     (GMSA)
};

// DMSA: eps * p * exp(6 sqrt(2) r^2 / (mu sqrt(m)) * [1 + sqrt(log 1/delta)]) * d* * d'*.
// GMSA: eps^{1/4} M^{3/4} exp(6 kappa / sqrt(2 m / p) * sqrt(log p + log 1/delta)) * d* * d'*.
double bound_theorem_5_6(MsaKind kind, const TailBoundParams& params);

}  // namespace msa

#endif  // MSA_RENYI_HPP
