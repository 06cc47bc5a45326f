#include "msa/kde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "msa/rng.hpp"

namespace msa {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454835606594728112;

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    total += diff * diff;
  }
  return total;
}

double log_kernel_constant(int dim, double sigma) {
  return -0.5 * dim * (kLogTwoPi + 2.0 * std::log(sigma));
}

}  // namespace

double kernel_value(std::span<const double> x, std::span<const double> x_prime,
                    double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("kernel: sigma must be positive");
  if (x.size() != x_prime.size()) throw std::invalid_argument("kernel: dimension mismatch");
  if (x.empty()) throw std::invalid_argument("kernel: empty point");
  const double log_value = log_kernel_constant(static_cast<int>(x.size()), sigma) -
                           squared_distance(x, x_prime) / (2.0 * sigma * sigma);
  return std::exp(log_value);
}

KdeModel::KdeModel(std::vector<std::vector<double>> centers, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("kde: sigma must be positive");
  if (centers.empty()) throw std::invalid_argument("kde: no centers");
  dim_ = static_cast<int>(centers.front().size());
  if (dim_ == 0) throw std::invalid_argument("kde: zero-dimensional centers");
  for (const auto& c : centers) {
    if (static_cast<int>(c.size()) != dim_) {
      throw std::invalid_argument("kde: inconsistent center dimension");
    }
  }
  std::sort(centers.begin(), centers.end());
  sigma_ = sigma;
  count_ = centers.size();
  flat_centers_.reserve(count_ * static_cast<std::size_t>(dim_));
  for (const auto& c : centers) {
    flat_centers_.insert(flat_centers_.end(), c.begin(), c.end());
  }
}

std::vector<std::vector<double>> KdeModel::centers() const {
  std::vector<std::vector<double>> out(count_);
  for (std::size_t i = 0; i < count_; ++i) {
    out[i].assign(flat_centers_.begin() + static_cast<std::ptrdiff_t>(i * dim_),
                  flat_centers_.begin() + static_cast<std::ptrdiff_t>((i + 1) * dim_));
  }
  return out;
}

double KdeModel::density(std::span<const double> x) const {
  return std::exp(log_density(x));
}

double KdeModel::log_density(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim_) {
    throw std::invalid_argument("kde: query dimension mismatch");
  }
  const double inv_two_sigma2 = 1.0 / (2.0 * sigma_ * sigma_);
  double min_sq = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < count_; ++i) {
    const std::span<const double> center(flat_centers_.data() + i * dim_,
                                         static_cast<std::size_t>(dim_));
    min_sq = std::min(min_sq, squared_distance(x, center));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < count_; ++i) {
    const std::span<const double> center(flat_centers_.data() + i * dim_,
                                         static_cast<std::size_t>(dim_));
    sum += std::exp(-(squared_distance(x, center) - min_sq) * inv_two_sigma2);
  }
  return log_kernel_constant(dim_, sigma_) - min_sq * inv_two_sigma2 +
         std::log(sum / static_cast<double>(count_));
}

KdeModel kde_fit(const std::vector<std::vector<double>>& samples, double sigma) {
  return KdeModel(samples, sigma);
}

BandwidthSelection select_bandwidth_cv(const std::vector<std::vector<double>>& samples,
                                       std::span<const double> grid, int folds,
                                       std::uint64_t seed) {
  if (grid.empty()) throw std::invalid_argument("bandwidth cv: empty grid");
  if (folds < 2) throw std::invalid_argument("bandwidth cv: folds must be >= 2");
  if (samples.size() < static_cast<std::size_t>(folds)) {
    throw std::invalid_argument("bandwidth cv: fewer samples than folds");
  }
  for (double sigma : grid) {
    if (!(sigma > 0.0)) throw std::invalid_argument("bandwidth cv: sigma grid must be positive");
  }
  const int dim = static_cast<int>(samples.front().size());

  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(Rng::derive(seed, 0x6b6465));
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[rng.below(i)]);
  }

  std::vector<double> total_log_density(grid.size(), 0.0);
  std::size_t held_total = 0;
  for (int fold = 0; fold < folds; ++fold) {
    std::vector<std::size_t> train_idx, held_idx;
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
      if (static_cast<int>(pos % static_cast<std::size_t>(folds)) == fold) {
        held_idx.push_back(order[pos]);
      } else {
        train_idx.push_back(order[pos]);
      }
    }
    if (held_idx.empty() || train_idx.empty()) continue;
    held_total += held_idx.size();

    // Squared distances held-out x train are shared across the whole grid.
    std::vector<double> dist2(held_idx.size() * train_idx.size());
    std::vector<double> min_dist2(held_idx.size(), std::numeric_limits<double>::infinity());
    for (std::size_t h = 0; h < held_idx.size(); ++h) {
      const auto& xh = samples[held_idx[h]];
      for (std::size_t t = 0; t < train_idx.size(); ++t) {
        const double d2 = squared_distance(xh, samples[train_idx[t]]);
        dist2[h * train_idx.size() + t] = d2;
        min_dist2[h] = std::min(min_dist2[h], d2);
      }
    }

    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
      const double sigma = grid[gi];
      const double inv_two_sigma2 = 1.0 / (2.0 * sigma * sigma);
      const double log_const = log_kernel_constant(dim, sigma) -
                               std::log(static_cast<double>(train_idx.size()));
      double fold_total = 0.0;
      for (std::size_t h = 0; h < held_idx.size(); ++h) {
        double sum = 0.0;
        const double* row = dist2.data() + h * train_idx.size();
        for (std::size_t t = 0; t < train_idx.size(); ++t) {
          sum += std::exp(-(row[t] - min_dist2[h]) * inv_two_sigma2);
        }
        fold_total += log_const - min_dist2[h] * inv_two_sigma2 + std::log(sum);
      }
      total_log_density[gi] += fold_total;
    }
  }

  BandwidthSelection selection;
  selection.cv_scores.resize(grid.size());
  double best_score = -std::numeric_limits<double>::infinity();
  double best_sigma = 0.0;
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    const double score = total_log_density[gi] / static_cast<double>(held_total);
    selection.cv_scores[gi] = score;
    if (score > best_score + 1e-12 ||
        (std::abs(score - best_score) <= 1e-12 && grid[gi] > best_sigma)) {
      best_score = score;
      best_sigma = grid[gi];
    }
  }
  if (!std::isfinite(best_score)) {
    throw NumericError("bandwidth cv: every candidate gave -inf held-out log density; widen the grid");
  }
  selection.sigma = best_sigma;
  return selection;
}

KappaReport estimate_kappa(const KdeModel& model,
                           const std::vector<std::vector<double>>& eval_points) {
  if (eval_points.size() < 2) {
    throw std::invalid_argument("kappa: need at least 2 evaluation points");
  }
  for (const auto& x : eval_points) {
    if (static_cast<int>(x.size()) != model.dim()) {
      throw std::invalid_argument("kappa: evaluation point dimension mismatch");
    }
  }
  // kappa = max_x exp((max_{x''} ||x-x''||^2 - min_{x'} ||x-x'||^2) / (2 sigma^2)).
  const double inv_two_sigma2 = 1.0 / (2.0 * model.sigma() * model.sigma());
  double best_log = 0.0;
  for (const auto& x : eval_points) {
    double min_sq = std::numeric_limits<double>::infinity();
    double max_sq = 0.0;
    for (const auto& other : eval_points) {
      const double d2 = squared_distance(x, other);
      min_sq = std::min(min_sq, d2);
      max_sq = std::max(max_sq, d2);
    }
    best_log = std::max(best_log, (max_sq - min_sq) * inv_two_sigma2);
  }
  KappaReport report;
  report.log_kappa = best_log;
  report.kappa = std::exp(best_log);
  report.unbounded_in_theory = true;
  return report;
}

}  // namespace msa
