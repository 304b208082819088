#pragma once

#include <cmath>
#include <random>

#include "icapath/dataset.hpp"
#include "icapath/family.hpp"

namespace testutil {

inline icapath::Matrix gaussian_matrix(int n, int p, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  icapath::Matrix x(n, p);
  for (int j = 0; j < p; ++j)
    for (int i = 0; i < n; ++i) x(i, j) = nd(rng);
  return x;
}

// Random GLM data drawn at the given coefficients.
inline icapath::Dataset glm_data(const icapath::FamilySpec& fam, int n,
                                 const icapath::Vector& beta,
                                 std::mt19937_64& rng) {
  icapath::Matrix x = gaussian_matrix(n, static_cast<int>(beta.size()), rng);
  icapath::Vector y = icapath::sample_response(fam, x * beta, rng);
  return icapath::Dataset(std::move(x), std::move(y));
}

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max(1.0, std::abs(b));
}

}  // namespace testutil
