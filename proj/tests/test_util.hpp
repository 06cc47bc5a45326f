#ifndef MSA_TEST_UTIL_HPP
#define MSA_TEST_UTIL_HPP

#include <cmath>
#include <vector>

#include "msa/core.hpp"
#include "msa/renyi.hpp"
#include "msa/rng.hpp"

namespace msa::test {

// Dirichlet(1,...,1) draw: normalized exponentials.
inline std::vector<double> random_simplex_point(Rng& rng, int size) {
  std::vector<double> v(static_cast<std::size_t>(size));
  double sum = 0.0;
  for (double& value : v) {
    value = -std::log(rng.uniform01_open());
    sum += value;
  }
  for (double& value : v) value /= sum;
  return v;
}

inline FiniteDistribution random_distribution(Rng& rng, int size) {
  return FiniteDistribution(random_simplex_point(rng, size));
}

inline Dataset make_labeled_1d(const std::vector<double>& xs,
                               const std::vector<double>& ys, int num_domains = 0,
                               const std::vector<int>* domains = nullptr) {
  std::vector<Sample> samples;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    Sample s;
    s.x = {xs[i]};
    if (i < ys.size()) s.y = ys[i];
    if (domains) s.domain = (*domains)[i];
    samples.push_back(std::move(s));
  }
  return Dataset(std::move(samples), num_domains);
}

}  // namespace msa::test

#endif  // MSA_TEST_UTIL_HPP
