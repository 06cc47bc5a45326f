#include "msa/maxent.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

#include "msa/rng.hpp"

namespace msa {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double dot(std::span<const double> a, std::span<const double> b) {
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) total += a[i] * b[i];
  return total;
}

double norm2(std::span<const double> v) { return std::sqrt(dot(v, v)); }

void check_training_data(const Dataset& data, const FeatureMap& fmap) {
  if (!data.fully_domain_labeled()) {
    throw std::invalid_argument("maxent: every sample must carry a domain label");
  }
  const int p = fmap.num_domains();
  if (data.num_domains() > p) {
    throw std::invalid_argument("maxent: dataset has more domains than the feature map");
  }
  if (static_cast<int>(data.size()) < p) {
    throw std::invalid_argument("maxent: need at least one sample per domain (m >= p)");
  }
  std::vector<bool> seen(static_cast<std::size_t>(p), false);
  for (const Sample& s : data.samples()) seen[static_cast<std::size_t>(*s.domain)] = true;
  if (!std::all_of(seen.begin(), seen.end(), [](bool b) { return b; })) {
    throw std::invalid_argument("maxent: some domain has no samples");
  }
  if (data.dim() != fmap.input_dim()) {
    throw std::invalid_argument("maxent: feature dimension mismatch");
  }
}

// Per-sample softmax over domain logits, stabilized by subtracting the max.
void softmax_logits(std::span<const double> logits, std::span<double> probs) {
  double max_logit = logits[0];
  for (double l : logits) max_logit = std::max(max_logit, l);
  double sum = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    probs[k] = std::exp(logits[k] - max_logit);
    sum += probs[k];
  }
  for (std::size_t k = 0; k < logits.size(); ++k) {
    probs[k] /= sum;
    if (probs[k] < 1e-300) probs[k] = 1e-300;
  }
}

}  // namespace

FeatureMap FeatureMap::per_class_linear(int num_domains, int input_dim) {
  if (num_domains <= 0 || input_dim <= 0) {
    throw std::invalid_argument("feature map: dimensions must be positive");
  }
  FeatureMap fmap;
  fmap.kind_ = FeatureMapKind::kPerClassLinear;
  fmap.num_domains_ = num_domains;
  fmap.input_dim_ = input_dim;
  fmap.block_dim_ = input_dim + 1;
  return fmap;
}

FeatureMap FeatureMap::random_fourier(int num_domains, int input_dim, int width,
                                      double bandwidth, std::uint64_t seed) {
  if (num_domains <= 0 || input_dim <= 0 || width <= 0) {
    throw std::invalid_argument("feature map: dimensions must be positive");
  }
  if (!(bandwidth > 0.0)) throw std::invalid_argument("feature map: bandwidth must be positive");
  FeatureMap fmap;
  fmap.kind_ = FeatureMapKind::kRandomFourier;
  fmap.num_domains_ = num_domains;
  fmap.input_dim_ = input_dim;
  fmap.width_ = width;
  fmap.bandwidth_ = bandwidth;
  fmap.seed_ = seed;
  fmap.block_dim_ = width + 1;
  Rng rng(Rng::derive(seed, 0x8ff));
  fmap.omega_.resize(static_cast<std::size_t>(width) * input_dim);
  for (double& w : fmap.omega_) w = rng.normal() / bandwidth;
  fmap.phase_.resize(static_cast<std::size_t>(width));
  for (double& b : fmap.phase_) b = rng.uniform01() * kTwoPi;
  return fmap;
}

void FeatureMap::block_features(std::span<const double> x, std::span<double> out) const {
  if (kind_ == FeatureMapKind::kPerClassLinear) {
    for (int i = 0; i < input_dim_; ++i) out[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)];
    out[static_cast<std::size_t>(input_dim_)] = 1.0;
    return;
  }
  const double scale = std::sqrt(2.0 / width_);
  for (int j = 0; j < width_; ++j) {
    double arg = phase_[static_cast<std::size_t>(j)];
    for (int i = 0; i < input_dim_; ++i) {
      arg += omega_[static_cast<std::size_t>(j) * input_dim_ + i] * x[static_cast<std::size_t>(i)];
    }
    out[static_cast<std::size_t>(j)] = scale * std::cos(arg);
  }
  out[static_cast<std::size_t>(width_)] = 1.0;
}

double FeatureMap::logit(std::span<const double> w, std::span<const double> block,
                         int k) const {
  const std::size_t offset = static_cast<std::size_t>(k) * block_dim_;
  double total = 0.0;
  for (int i = 0; i < block_dim_; ++i) {
    total += w[offset + static_cast<std::size_t>(i)] * block[static_cast<std::size_t>(i)];
  }
  return total;
}

void FeatureMap::add_scaled(std::span<double> g, std::span<const double> block, int k,
                            double c) const {
  const std::size_t offset = static_cast<std::size_t>(k) * block_dim_;
  for (int i = 0; i < block_dim_; ++i) {
    g[offset + static_cast<std::size_t>(i)] += c * block[static_cast<std::size_t>(i)];
  }
}

double FeatureMap::feature_norm(std::span<const double> x) const {
  std::vector<double> block(static_cast<std::size_t>(block_dim_));
  block_features(x, block);
  return norm2(block);
}

void MaxentModel::posterior_into(std::span<const double> x, std::span<double> out) const {
  const int p = num_domains();
  std::vector<double> block(static_cast<std::size_t>(feature_map.block_dim()));
  feature_map.block_features(x, block);
  std::vector<double> logits(static_cast<std::size_t>(p));
  for (int k = 0; k < p; ++k) logits[static_cast<std::size_t>(k)] = feature_map.logit(weights, block, k);
  softmax_logits(logits, out);
}

double maxent_objective(const FeatureMap& fmap, std::span<const double> w,
                        const Dataset& data, double mu) {
  check_training_data(data, fmap);
  if (mu < 0.0) throw std::invalid_argument("maxent: mu must be >= 0");
  const int p = fmap.num_domains();
  std::vector<double> block(static_cast<std::size_t>(fmap.block_dim()));
  std::vector<double> logits(static_cast<std::size_t>(p));
  double data_term = 0.0;
  for (const Sample& s : data.samples()) {
    fmap.block_features(s.x, block);
    double max_logit = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < p; ++k) {
      logits[static_cast<std::size_t>(k)] = fmap.logit(w, block, k);
      max_logit = std::max(max_logit, logits[static_cast<std::size_t>(k)]);
    }
    double sum = 0.0;
    for (int k = 0; k < p; ++k) sum += std::exp(logits[static_cast<std::size_t>(k)] - max_logit);
    const double log_z = max_logit + std::log(sum);
    data_term += log_z - logits[static_cast<std::size_t>(*s.domain)];
  }
  return mu * dot(w, w) + data_term / static_cast<double>(data.size());
}

std::vector<double> maxent_gradient(const FeatureMap& fmap, std::span<const double> w,
                                    const Dataset& data, double mu) {
  check_training_data(data, fmap);
  if (mu < 0.0) throw std::invalid_argument("maxent: mu must be >= 0");
  const int p = fmap.num_domains();
  std::vector<double> grad(w.size(), 0.0);
  std::vector<double> block(static_cast<std::size_t>(fmap.block_dim()));
  std::vector<double> logits(static_cast<std::size_t>(p));
  std::vector<double> probs(static_cast<std::size_t>(p));
  const double inv_m = 1.0 / static_cast<double>(data.size());
  for (const Sample& s : data.samples()) {
    fmap.block_features(s.x, block);
    for (int k = 0; k < p; ++k) logits[static_cast<std::size_t>(k)] = fmap.logit(w, block, k);
    softmax_logits(logits, probs);
    for (int k = 0; k < p; ++k) {
      fmap.add_scaled(grad, block, k, inv_m * probs[static_cast<std::size_t>(k)]);
    }
    fmap.add_scaled(grad, block, *s.domain, -inv_m);
  }
  for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += 2.0 * mu * w[i];
  return grad;
}

MaxentModel train_maxent(const Dataset& data, double mu, const FeatureMap& fmap,
                         double tol, int max_iters, std::uint64_t seed) {
  check_training_data(data, fmap);
  if (mu < 0.0) throw std::invalid_argument("maxent: mu must be >= 0");
  if (!(tol > 0.0)) throw std::invalid_argument("maxent: tol must be positive");
  if (max_iters <= 0) throw std::invalid_argument("maxent: max_iters must be positive");

  const std::size_t n = static_cast<std::size_t>(fmap.output_dim());
  std::vector<double> w(n, 0.0);
  double fx = maxent_objective(fmap, w, data, mu);
  std::vector<double> g = maxent_gradient(fmap, w, data, mu);

  // L-BFGS history.
  const std::size_t history = 10;
  std::deque<std::vector<double>> s_list, y_list;
  std::deque<double> rho_list;

  int iter = 0;
  bool converged = false;
  while (iter < max_iters) {
    if (norm2(g) <= tol) {
      converged = true;
      break;
    }
    ++iter;

    // Two-loop recursion for the search direction.
    std::vector<double> direction = g;
    std::vector<double> alpha(s_list.size());
    for (std::size_t j = s_list.size(); j-- > 0;) {
      alpha[j] = rho_list[j] * dot(s_list[j], direction);
      for (std::size_t i = 0; i < n; ++i) direction[i] -= alpha[j] * y_list[j][i];
    }
    if (!s_list.empty()) {
      const double gamma =
          dot(s_list.back(), y_list.back()) / dot(y_list.back(), y_list.back());
      for (double& v : direction) v *= gamma;
    }
    for (std::size_t j = 0; j < s_list.size(); ++j) {
      const double beta = rho_list[j] * dot(y_list[j], direction);
      for (std::size_t i = 0; i < n; ++i) direction[i] += (alpha[j] - beta) * s_list[j][i];
    }
    for (double& v : direction) v = -v;

    double descent = dot(g, direction);
    if (descent >= 0.0) {
      // Curvature information went bad; fall back to steepest descent.
      for (std::size_t i = 0; i < n; ++i) direction[i] = -g[i];
      descent = -dot(g, g);
      s_list.clear();
      y_list.clear();
      rho_list.clear();
    }

    // Backtracking Armijo line search.
    double step = 1.0;
    const double c1 = 1e-4;
    std::vector<double> w_next(n);
    double fx_next = fx;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (std::size_t i = 0; i < n; ++i) w_next[i] = w[i] + step * direction[i];
      fx_next = maxent_objective(fmap, w_next, data, mu);
      if (fx_next <= fx + c1 * step * descent) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (!s_list.empty()) {
        // Drop stale curvature pairs and retry from steepest descent.
        s_list.clear();
        y_list.clear();
        rho_list.clear();
        continue;
      }
      if (norm2(g) <= tol * 100.0) {
        converged = true;
        break;
      }
      throw NumericError(
          "maxent: line search failed (objective " + std::to_string(fx) +
          ", gradient norm " + std::to_string(norm2(g)) + ", iteration " +
          std::to_string(iter) + ")");
    }

    std::vector<double> g_next = maxent_gradient(fmap, w_next, data, mu);
    std::vector<double> s_vec(n), y_vec(n);
    for (std::size_t i = 0; i < n; ++i) {
      s_vec[i] = w_next[i] - w[i];
      y_vec[i] = g_next[i] - g[i];
    }
    const double sy = dot(s_vec, y_vec);
    if (sy > 1e-16) {
      s_list.push_back(std::move(s_vec));
      y_list.push_back(std::move(y_vec));
      rho_list.push_back(1.0 / sy);
      if (s_list.size() > history) {
        s_list.pop_front();
        y_list.pop_front();
        rho_list.pop_front();
      }
    }
    w = std::move(w_next);
    g = std::move(g_next);
    fx = fx_next;
  }

  MaxentModel model{fmap, std::move(w), mu, 0.0, seed, converged, iter, 0.0};
  model.gradient_norm = norm2(maxent_gradient(fmap, model.weights, data, mu));
  if (!converged && model.gradient_norm <= tol) model.converged = true;
  double radius = 0.0;
  for (const Sample& s : data.samples()) radius = std::max(radius, fmap.feature_norm(s.x));
  model.feature_radius = radius;
  return model;
}

FiniteDistribution posterior(const MaxentModel& model, std::span<const double> x) {
  if (static_cast<int>(x.size()) != model.input_dim()) {
    throw std::invalid_argument("posterior: feature dimension mismatch");
  }
  std::vector<double> probs(static_cast<std::size_t>(model.num_domains()));
  model.posterior_into(x, probs);
  return FiniteDistribution(std::move(probs));
}

double select_mu_cv(const Dataset& data, const FeatureMap& fmap,
                    std::span<const double> grid, int folds, std::uint64_t seed,
                    std::vector<double>* cv_scores) {
  if (grid.empty()) throw std::invalid_argument("mu selection: empty grid");
  if (folds < 2) throw std::invalid_argument("mu selection: folds must be >= 2");
  if (static_cast<int>(data.size()) < folds) {
    throw std::invalid_argument("mu selection: fewer samples than folds");
  }
  for (double mu : grid) {
    if (mu < 0.0) throw std::invalid_argument("mu selection: negative mu in grid");
  }

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(Rng::derive(seed, 0x6d75));
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[rng.below(i)]);
  }

  std::vector<double> scores(grid.size(), 0.0);
  std::vector<std::size_t> counts(grid.size(), 0);
  for (int fold = 0; fold < folds; ++fold) {
    std::vector<Sample> train, held;
    for (std::size_t idx = 0; idx < order.size(); ++idx) {
      const Sample& s = data[order[idx]];
      if (static_cast<int>(idx % static_cast<std::size_t>(folds)) == fold) {
        held.push_back(s);
      } else {
        train.push_back(s);
      }
    }
    if (held.empty() || train.empty()) continue;
    bool train_covers_all = true;
    {
      std::vector<bool> seen(static_cast<std::size_t>(fmap.num_domains()), false);
      for (const Sample& s : train) seen[static_cast<std::size_t>(*s.domain)] = true;
      train_covers_all = std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
    }
    if (!train_covers_all) continue;
    Dataset train_set(std::move(train), data.num_domains());
    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
      const MaxentModel model = train_maxent(train_set, grid[gi], fmap, 1e-8, 500, seed);
      double log_loss = 0.0;
      std::vector<double> probs(static_cast<std::size_t>(fmap.num_domains()));
      for (const Sample& s : held) {
        model.posterior_into(s.x, probs);
        log_loss += -std::log(probs[static_cast<std::size_t>(*s.domain)]);
      }
      scores[gi] += log_loss / static_cast<double>(held.size());
      counts[gi] += 1;
    }
  }

  double best_mu = grid[0];
  double best_score = std::numeric_limits<double>::infinity();
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    if (counts[gi] == 0) continue;
    const double mean_score = scores[gi] / static_cast<double>(counts[gi]);
    if (cv_scores) {
      if (cv_scores->size() < grid.size()) cv_scores->resize(grid.size());
      (*cv_scores)[gi] = mean_score;
    }
    // Ties break toward the larger (smoother) mu.
    if (mean_score < best_score - 1e-12 ||
        (std::abs(mean_score - best_score) <= 1e-12 && grid[gi] > best_mu)) {
      best_score = mean_score;
      best_mu = grid[gi];
    }
  }
  if (!std::isfinite(best_score)) {
    throw NumericError("mu selection: no fold produced a finite score");
  }
  return best_mu;
}

double theorem3_radius(double feature_radius, double mu, std::int64_t m, double delta) {
  if (!(mu > 0.0)) throw std::invalid_argument("theorem3 radius: mu must be positive");
  if (m <= 0) throw std::invalid_argument("theorem3 radius: m must be positive");
  if (!(delta > 0.0 && delta <= 1.0)) {
    throw std::invalid_argument("theorem3 radius: delta must lie in (0, 1]");
  }
  const double r2 = feature_radius * feature_radius;
  return 2.0 * std::sqrt(2.0) * r2 / (mu * std::sqrt(static_cast<double>(m))) *
         (1.0 + std::sqrt(std::log(1.0 / delta)));
}

}  // namespace msa
