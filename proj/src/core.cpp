#include "msa/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace msa {

namespace {

bool all_finite(std::span<const double> v) {
  for (double value : v) {
    if (!std::isfinite(value)) return false;
  }
  return true;
}

}  // namespace

Dataset::Dataset(std::vector<Sample> samples, int num_domains)
    : samples_(std::move(samples)), num_domains_(num_domains) {
  if (samples_.empty()) throw std::invalid_argument("dataset: no samples");
  if (num_domains_ < 0) throw std::invalid_argument("dataset: negative domain count");
  dim_ = static_cast<int>(samples_.front().x.size());
  if (dim_ == 0) throw std::invalid_argument("dataset: zero feature dimension");
  for (const Sample& s : samples_) {
    if (static_cast<int>(s.x.size()) != dim_) {
      throw std::invalid_argument("dataset: inconsistent feature dimension");
    }
    if (!all_finite(s.x)) throw std::invalid_argument("dataset: non-finite feature");
    if (s.domain && (*s.domain < 0 || *s.domain >= num_domains_)) {
      throw std::invalid_argument("dataset: domain index out of range");
    }
  }
}

bool Dataset::fully_labeled() const {
  return std::all_of(samples_.begin(), samples_.end(),
                     [](const Sample& s) { return s.y.has_value(); });
}

bool Dataset::fully_domain_labeled() const {
  return std::all_of(samples_.begin(), samples_.end(),
                     [](const Sample& s) { return s.domain.has_value(); });
}

std::vector<std::vector<double>> Dataset::domain_points(int k) const {
  if (k < 0 || k >= num_domains_) {
    throw std::invalid_argument("dataset: domain index out of range");
  }
  std::vector<std::vector<double>> points;
  for (const Sample& s : samples_) {
    if (s.domain && *s.domain == k) points.push_back(s.x);
  }
  return points;
}

LossSpec LossSpec::squared(double bound) {
  LossSpec spec{LossModel::kRegression, LossKind::kSquared, bound};
  spec.validate();
  return spec;
}

LossSpec LossSpec::cross_entropy(double bound) {
  LossSpec spec{LossModel::kProbability, LossKind::kCrossEntropy, bound};
  spec.validate();
  return spec;
}

void LossSpec::validate() const {
  if (!(bound > 0.0)) throw std::invalid_argument("loss spec: bound M must be positive");
  if (kind == LossKind::kSquared && model != LossModel::kRegression) {
    throw std::invalid_argument("loss spec: squared loss requires the regression model");
  }
  if (kind == LossKind::kCrossEntropy && model != LossModel::kProbability) {
    throw std::invalid_argument("loss spec: cross-entropy requires the probability model");
  }
}

MixtureWeights::MixtureWeights(std::vector<double> z) : z_(std::move(z)) {
  if (z_.empty()) throw std::invalid_argument("mixture weights: empty vector");
  double sum = 0.0;
  for (double v : z_) {
    if (!(v >= 0.0)) throw std::invalid_argument("mixture weights: negative entry");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw std::invalid_argument("mixture weights: entries must sum to 1");
  }
}

MixtureWeights MixtureWeights::uniform(int p) {
  if (p <= 0) throw std::invalid_argument("mixture weights: p must be positive");
  std::vector<double> z(static_cast<std::size_t>(p), 1.0 / p);
  // Make the sum exact regardless of p.
  double sum = std::accumulate(z.begin(), z.end() - 1, 0.0);
  z.back() = 1.0 - sum;
  return MixtureWeights(std::move(z));
}

MixtureWeights MixtureWeights::vertex(int p, int k) {
  if (p <= 0 || k < 0 || k >= p) throw std::invalid_argument("mixture weights: bad vertex");
  std::vector<double> z(static_cast<std::size_t>(p), 0.0);
  z[static_cast<std::size_t>(k)] = 1.0;
  return MixtureWeights(std::move(z));
}

PointLoss point_loss(const LossSpec& spec, double prediction, double label) {
  spec.validate();
  if (spec.kind != LossKind::kSquared) {
    throw std::invalid_argument("point loss: scalar prediction requires squared loss");
  }
  if (!std::isfinite(prediction) || !std::isfinite(label)) {
    throw std::invalid_argument("point loss: non-finite input");
  }
  const double residual = prediction - label;
  double value = residual * residual;
  PointLoss result{value, false};
  if (value > spec.bound) {
    result.value = spec.bound;
    result.clamped = true;
  }
  return result;
}

PointLoss point_loss(const LossSpec& spec, std::span<const double> prediction,
                     int label) {
  spec.validate();
  if (spec.kind != LossKind::kCrossEntropy) {
    throw std::invalid_argument("point loss: distribution prediction requires cross-entropy");
  }
  if (label < 0 || static_cast<std::size_t>(label) >= prediction.size()) {
    throw std::invalid_argument("point loss: label outside prediction support");
  }
  const double p = prediction[static_cast<std::size_t>(label)];
  if (!(p >= 0.0) || p > 1.0 + 1e-9) {
    throw std::invalid_argument("point loss: prediction not a probability");
  }
  PointLoss result{0.0, false};
  if (p <= 0.0) {
    // Infinite loss clamped to M.
    result.value = spec.bound;
    result.clamped = true;
    return result;
  }
  result.value = -std::log(p);
  if (result.value > spec.bound) {
    result.value = spec.bound;
    result.clamped = true;
  }
  if (result.value < 0.0) result.value = 0.0;
  return result;
}

double empirical_loss(const Dataset& data, const RegressionFn& predictor,
                      const LossSpec& spec, std::size_t* clamp_count) {
  if (!data.fully_labeled()) throw std::invalid_argument("empirical loss: unlabeled sample");
  double total = 0.0;
  std::size_t clamps = 0;
  for (const Sample& s : data.samples()) {
    const PointLoss loss = point_loss(spec, predictor(s.x), *s.y);
    total += loss.value;
    clamps += loss.clamped ? 1 : 0;
  }
  if (clamp_count) *clamp_count += clamps;
  return total / static_cast<double>(data.size());
}

double empirical_loss(const Dataset& data, const ProbabilityFn& predictor,
                      const LossSpec& spec, std::size_t* clamp_count) {
  if (!data.fully_labeled()) throw std::invalid_argument("empirical loss: unlabeled sample");
  double total = 0.0;
  std::size_t clamps = 0;
  for (const Sample& s : data.samples()) {
    const double y = *s.y;
    const int label = static_cast<int>(std::llround(y));
    if (std::abs(y - label) > 1e-9) {
      throw std::invalid_argument("empirical loss: probability-model label is not a class index");
    }
    const std::vector<double> prediction = predictor(s.x);
    const PointLoss loss = point_loss(spec, prediction, label);
    total += loss.value;
    clamps += loss.clamped ? 1 : 0;
  }
  if (clamp_count) *clamp_count += clamps;
  return total / static_cast<double>(data.size());
}

MixtureWeights project_to_simplex(std::span<const double> v) {
  if (v.empty()) throw std::invalid_argument("simplex projection: empty vector");
  if (!all_finite(v)) throw std::invalid_argument("simplex projection: non-finite entry");
  // Sort-based projection: threshold theta such that sum(max(v - theta, 0)) = 1.
  std::vector<double> sorted(v.begin(), v.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < sorted.size(); ++j) {
    cumulative += sorted[j];
    const double candidate = (cumulative - 1.0) / static_cast<double>(j + 1);
    if (sorted[j] - candidate > 0.0) theta = candidate;
  }
  std::vector<double> z(v.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    z[i] = std::max(v[i] - theta, 0.0);
    sum += z[i];
  }
  // Exact renormalization guards the 1e-12 simplex invariant.
  for (double& value : z) value /= sum;
  return MixtureWeights(std::move(z));
}

}  // namespace msa
