#ifndef MSA_CORE_HPP
#define MSA_CORE_HPP

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace msa {

// Error raised for file/stream problems; everything else uses
// std::invalid_argument (broken preconditions) or NumericError.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Error raised when a numeric procedure cannot make progress.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class LossModel { kRegression, kProbability };
enum class LossKind { kSquared, kCrossEntropy };

struct Sample {
  std::vector<double> x;
  std::optional<double> y;
  std::optional<int> domain;
};

// Immutable collection of samples with a fixed feature dimension and a
// domain count p. Insertion order is preserved; all reductions over a
// Dataset are sequential left-to-right.
class Dataset {
 public:
  Dataset(std::vector<Sample> samples, int num_domains);

  const std::vector<Sample>& samples() const { return samples_; }
  const Sample& operator[](std::size_t i) const { return samples_[i]; }
  std::size_t size() const { return samples_.size(); }
  int dim() const { return dim_; }
  int num_domains() const { return num_domains_; }

  bool fully_labeled() const;
  bool fully_domain_labeled() const;

  // Feature vectors of the samples carrying domain index k.
  std::vector<std::vector<double>> domain_points(int k) const;

 private:
  std::vector<Sample> samples_;
  int dim_ = 0;
  int num_domains_ = 0;
};

struct LossSpec {
  LossModel model = LossModel::kRegression;
  LossKind kind = LossKind::kSquared;
  double bound = 50.0;  // M, cap applied to every point loss

  static LossSpec squared(double bound = 50.0);
  static LossSpec cross_entropy(double bound = 50.0);
  void validate() const;
};

// Point on the probability simplex; entries nonnegative, summing to 1
// within 1e-12.
class MixtureWeights {
 public:
  explicit MixtureWeights(std::vector<double> z);
  static MixtureWeights uniform(int p);
  static MixtureWeights vertex(int p, int k);

  const std::vector<double>& values() const { return z_; }
  double operator[](int k) const { return z_[static_cast<std::size_t>(k)]; }
  int size() const { return static_cast<int>(z_.size()); }

 private:
  std::vector<double> z_;
};

struct PointLoss {
  double value = 0.0;
  bool clamped = false;
};

// Squared loss (h(x) - y)^2, clamped to [0, M].
PointLoss point_loss(const LossSpec& spec, double prediction, double label);
// Cross-entropy -log h(x, y); probability 0 at the true label clamps to M.
PointLoss point_loss(const LossSpec& spec, std::span<const double> prediction,
                     int label);

using RegressionFn = std::function<double(std::span<const double>)>;
using ProbabilityFn =
    std::function<std::vector<double>(std::span<const double>)>;

double empirical_loss(const Dataset& data, const RegressionFn& predictor,
                      const LossSpec& spec, std::size_t* clamp_count = nullptr);
double empirical_loss(const Dataset& data, const ProbabilityFn& predictor,
                      const LossSpec& spec, std::size_t* clamp_count = nullptr);

// Euclidean projection onto the simplex.
MixtureWeights project_to_simplex(std::span<const double> v);

// CSV with header x0,...,x{d-1},y,domain; y and domain values may be empty.
Dataset load_dataset_csv(const std::string& path);
void save_dataset_csv(const Dataset& data, const std::string& path);

}  // namespace msa

#endif  // MSA_CORE_HPP
