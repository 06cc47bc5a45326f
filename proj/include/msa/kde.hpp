#ifndef MSA_KDE_HPP
#define MSA_KDE_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "msa/core.hpp"

namespace msa {

// Isotropic Gaussian kernel density (2 pi sigma^2)^{-d/2} exp(-||x-x'||^2 / 2 sigma^2).
double kernel_value(std::span<const double> x, std::span<const double> x_prime,
                    double sigma);

// Gaussian KDE with one bandwidth. Centers are stored sorted
// lexicographically, fixing the summation order regardless of input order.
class KdeModel {
 public:
  KdeModel(std::vector<std::vector<double>> centers, double sigma);

  double sigma() const { return sigma_; }
  int dim() const { return dim_; }
  std::size_t center_count() const { return count_; }
  std::vector<std::vector<double>> centers() const;

  // (1/m) sum_i K_sigma(x, x_i); may underflow to 0 far from all centers.
  double density(std::span<const double> x) const;
  // log density via log-sum-exp; finite even where density() underflows.
  double log_density(std::span<const double> x) const;

 private:
  std::vector<double> flat_centers_;  // count x dim, row-major, sorted
  double sigma_ = 1.0;
  int dim_ = 0;
  std::size_t count_ = 0;
};

KdeModel kde_fit(const std::vector<std::vector<double>>& samples, double sigma);

struct BandwidthSelection {
  double sigma = 0.0;
  std::vector<double> cv_scores;  // mean held-out log density per grid point
};

// Five-fold cross-validated bandwidth: maximizes mean held-out log density;
// ties break toward the larger (smoother) sigma. Deterministic given seed.
BandwidthSelection select_bandwidth_cv(const std::vector<std::vector<double>>& samples,
                                       std::span<const double> grid, int folds = 5,
                                       std::uint64_t seed = 0);

struct KappaReport {
  double kappa = 1.0;      // max K(x,x') / K(x,x'') over the evaluation points
  double log_kappa = 0.0;
  bool unbounded_in_theory = true;  // the true sup is unbounded for Gaussians
};

// Finite-grid lower bound of the kernel-ratio constant.
KappaReport estimate_kappa(const KdeModel& model,
                           const std::vector<std::vector<double>>& eval_points);

}  // namespace msa

#endif  // MSA_KDE_HPP
