#include "msa/renyi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace msa {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// log sum exp over the collected terms; -inf entries are ignored.
double log_sum_exp(const std::vector<double>& terms) {
  double max_term = -kInf;
  for (double t : terms) max_term = std::max(max_term, t);
  if (!std::isfinite(max_term)) return max_term;
  double sum = 0.0;
  for (double t : terms) sum += std::exp(t - max_term);
  return max_term + std::log(sum);
}

double relative_entropy(const FiniteDistribution& p, const FiniteDistribution& q) {
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;  // 0 log(0/q) == 0
    if (q[i] == 0.0) return kInf;
    total += p[i] * std::log(p[i] / q[i]);
  }
  return total;
}

}  // namespace

FiniteDistribution::FiniteDistribution(std::vector<double> probs)
    : probs_(std::move(probs)) {
  if (probs_.empty()) throw std::invalid_argument("distribution: empty support");
  double sum = 0.0;
  for (double v : probs_) {
    if (!(v >= 0.0)) throw std::invalid_argument("distribution: negative probability");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw std::invalid_argument("distribution: probabilities must sum to 1");
  }
}

double renyi_divergence(const FiniteDistribution& p, const FiniteDistribution& q,
                        double alpha) {
  if (p.size() != q.size()) {
    throw std::invalid_argument("renyi divergence: mismatched support sizes");
  }
  if (!(alpha >= 0.0)) throw std::invalid_argument("renyi divergence: alpha must be >= 0");

  if (std::isinf(alpha)) {
    double max_log_ratio = -kInf;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (p[i] == 0.0) continue;
      if (q[i] == 0.0) return kInf;
      max_log_ratio = std::max(max_log_ratio, std::log(p[i] / q[i]));
    }
    return max_log_ratio;
  }
  if (alpha == 1.0) return relative_entropy(p, q);
  if (alpha == 0.0) {
    double mass = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (p[i] > 0.0) mass += q[i];
    }
    if (mass == 0.0) return kInf;
    return -std::log(mass);
  }

  // General case: (1/(alpha-1)) log sum_i p_i^alpha q_i^{1-alpha}, in log space.
  std::vector<double> terms;
  terms.reserve(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) {
      if (alpha > 1.0) return kInf;
      continue;  // alpha < 1: p^a q^{1-a} -> 0
    }
    terms.push_back(alpha * std::log(p[i]) + (1.0 - alpha) * std::log(q[i]));
  }
  if (terms.empty()) return kInf;  // disjoint supports
  const double log_sum = log_sum_exp(terms);
  return log_sum / (alpha - 1.0);
}

double renyi_exp(const FiniteDistribution& p, const FiniteDistribution& q,
                 double alpha) {
  return std::exp(renyi_divergence(p, q, alpha));
}

TriangleCheck triangle_slack(const FiniteDistribution& p, const FiniteDistribution& q,
                             const FiniteDistribution& r, double alpha, double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("triangle slack: gamma must lie in (0, 1)");
  }
  if (!(alpha > gamma)) {
    throw std::invalid_argument("triangle slack: alpha must exceed gamma");
  }
  const double d_pq = renyi_divergence(p, q, alpha);
  const double d_pr = renyi_divergence(p, r, alpha / gamma);
  const double d_rq = renyi_divergence(r, q, (alpha - gamma) / (1.0 - gamma));

  TriangleCheck check;
  check.lhs_log = (alpha - 1.0) * d_pq;
  check.rhs_log = (alpha - gamma) * d_pr + (alpha - 1.0) * d_rq;
  if (std::isinf(d_pq) || std::isinf(d_pr) || std::isinf(d_rq)) {
    check.infinite = true;
    check.slack = kInf;
    return check;
  }
  check.slack = std::exp(check.rhs_log) - std::exp(check.lhs_log);
  return check;
}

void BoundInputs::validate() const {
  if (!(epsilon >= 0.0)) throw std::invalid_argument("bound inputs: epsilon must be >= 0");
  if (!(delta >= 0.0)) throw std::invalid_argument("bound inputs: delta must be >= 0");
  if (!(alpha > 1.0)) throw std::invalid_argument("bound inputs: alpha must exceed 1");
  if (!(loss_bound >= 0.0)) throw std::invalid_argument("bound inputs: M must be >= 0");
  const double floor = 1.0 - 1e-12;
  if (dhat < floor || dhat_prime < floor || d_target < floor) {
    throw std::invalid_argument("bound inputs: divergence terms must be >= 1");
  }
}

namespace {

// x^{(a-1)/a} with the alpha = +inf limit handled.
double pow_head(double x, double alpha) {
  if (std::isinf(alpha)) return x;
  return std::pow(x, (alpha - 1.0) / alpha);
}

// M^{1/a} with the alpha = +inf limit handled.
double pow_tail(double m, double alpha) {
  if (std::isinf(alpha)) return 1.0;
  return std::pow(m, 1.0 / alpha);
}

}  // namespace

double bound_theorem_1_2(const BoundInputs& inputs) {
  inputs.validate();
  const double eps_hat =
      pow_head(inputs.epsilon * inputs.dhat, inputs.alpha) *
      pow_tail(inputs.loss_bound, inputs.alpha);
  return pow_head((eps_hat + inputs.delta) * inputs.d_target, inputs.alpha) *
         pow_tail(inputs.loss_bound, inputs.alpha);
}

double bound_theorem_4(const BoundInputs& inputs, double d_2alpha_target) {
  inputs.validate();
  if (d_2alpha_target < 1.0 - 1e-12) {
    throw std::invalid_argument("bound inputs: d_{2a}(D_T || D) must be >= 1");
  }
  const double eps_hat =
      pow_head(inputs.epsilon * inputs.dhat, inputs.alpha) *
      pow_tail(inputs.loss_bound, inputs.alpha);
  const double target_exponent =
      std::isinf(inputs.alpha) ? 1.0
                               : (2.0 * inputs.alpha - 1.0) / (2.0 * inputs.alpha);
  return pow_head((eps_hat + inputs.delta) * inputs.dhat_prime, inputs.alpha) *
         std::pow(d_2alpha_target, target_exponent) *
         pow_tail(inputs.loss_bound, inputs.alpha);
}

double bound_theorem_5_6(MsaKind kind, const TailBoundParams& params) {
  if (params.sample_size <= 0) throw std::invalid_argument("tail bound: m must be positive");
  if (params.num_domains <= 0) throw std::invalid_argument("tail bound: p must be positive");
  if (!(params.delta > 0.0 && params.delta <= 1.0)) {
    throw std::invalid_argument("tail bound: delta must lie in (0, 1]");
  }
  if (!(params.epsilon >= 0.0)) throw std::invalid_argument("tail bound: epsilon must be >= 0");
  if (params.d_star < 1.0 - 1e-12 || params.d_prime_star < 1.0 - 1e-12) {
    throw std::invalid_argument("tail bound: divergence terms must be >= 1");
  }
  const double m = static_cast<double>(params.sample_size);
  const double p = static_cast<double>(params.num_domains);
  const double log_inv_delta = std::log(1.0 / params.delta);

  if (kind == MsaKind::kDmsa) {
    if (!(params.mu > 0.0)) throw std::invalid_argument("tail bound: mu must be positive");
    const double r2 = params.feature_radius * params.feature_radius;
    const double exponent =
        6.0 * std::sqrt(2.0) * r2 / (params.mu * std::sqrt(m)) *
        (1.0 + std::sqrt(log_inv_delta));
    return params.epsilon * p * std::exp(exponent) * params.d_star * params.d_prime_star;
  }

  if (!(params.loss_bound > 0.0)) throw std::invalid_argument("tail bound: M must be positive");
  if (!(params.kappa >= 1.0)) throw std::invalid_argument("tail bound: kappa must be >= 1");
  const double exponent = 6.0 * params.kappa / std::sqrt(2.0 * m / p) *
                          std::sqrt(std::log(p) + log_inv_delta);
  return std::pow(params.epsilon, 0.25) * std::pow(params.loss_bound, 0.75) *
         std::exp(exponent) * params.d_star * params.d_prime_star;
}

}  // namespace msa
