#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "extrans/prng.hpp"
#include "extrans/stats/ols.hpp"

namespace extrans::testing {

inline double normal(Prng& rng) {
  const double u1 = 1.0 - rng.uniform01();
  const double u2 = rng.uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Independent oracle: solve X'X b = X'y by Gaussian elimination with
/// partial pivoting on plain arrays.
inline std::vector<double> normal_equations(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  const auto n = static_cast<std::size_t>(x.rows());
  const auto k = static_cast<std::size_t>(x.cols());
  std::vector<std::vector<double>> a(k, std::vector<double>(k + 1, 0.0));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      for (std::size_t r = 0; r < n; ++r) a[i][j] += x(Eigen::Index(r), Eigen::Index(i)) * x(Eigen::Index(r), Eigen::Index(j));
    }
    for (std::size_t r = 0; r < n; ++r) a[i][k] += x(Eigen::Index(r), Eigen::Index(i)) * y(Eigen::Index(r));
  }
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t pivot = c;
    for (std::size_t r = c + 1; r < k; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[pivot][c])) pivot = r;
    }
    std::swap(a[c], a[pivot]);
    for (std::size_t r = c + 1; r < k; ++r) {
      const double f = a[r][c] / a[c][c];
      for (std::size_t j = c; j <= k; ++j) a[r][j] -= f * a[c][j];
    }
  }
  std::vector<double> b(k);
  for (std::size_t c = k; c-- > 0;) {
    double s = a[c][k];
    for (std::size_t j = c + 1; j < k; ++j) s -= a[c][j] * b[j];
    b[c] = s / a[c][c];
  }
  return b;
}

struct RandomInstance {
  Eigen::VectorXd y;
  stats::DesignMatrix x;
};

inline RandomInstance random_instance(std::uint64_t seed) {
  Prng rng(seed);
  const int k = 1 + static_cast<int>(rng.bounded(8));
  const int n = k + 2 + static_cast<int>(rng.bounded(static_cast<std::uint64_t>(199 - k)));
  RandomInstance inst;
  inst.x.x.resize(n, k);
  for (int j = 0; j < k; ++j) inst.x.names.push_back("x" + std::to_string(j));
  for (int i = 0; i < n; ++i) {
    inst.x.x(i, 0) = 1.0;
    for (int j = 1; j < k; ++j) inst.x.x(i, j) = normal(rng) * (1 + j);
  }
  inst.y.resize(n);
  for (int i = 0; i < n; ++i) {
    inst.y(i) = 0.5 + normal(rng);
    for (int j = 1; j < k; ++j) inst.y(i) += 0.3 * j * inst.x.x(i, j);
  }
  return inst;
}

}  // namespace extrans::testing
