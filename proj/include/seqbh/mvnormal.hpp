#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "seqbh/errors.hpp"

namespace seqbh {

// Dense row-major square matrix; sized for the covariance matrices in play
// (a handful of streams), not for linear-algebra workloads.
using Matrix = std::vector<std::vector<double>>;

inline void check_square_symmetric(const Matrix& m) {
  const std::size_t k = m.size();
  if (k == 0) throw std::invalid_argument("cholesky_factor: empty matrix");
  for (const auto& row : m)
    if (row.size() != k) throw std::invalid_argument("cholesky_factor: matrix is not square");
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) {
      const double scale = 1.0 + std::abs(m[i][j]) + std::abs(m[j][i]);
      if (std::abs(m[i][j] - m[j][i]) > 1e-12 * scale)
        throw std::invalid_argument("cholesky_factor: matrix is not symmetric at (" +
                                    std::to_string(i + 1) + "," + std::to_string(j + 1) + ")");
    }
}

// Lower-triangular L with L L^T = M. Pivots are reported 1-based.
inline Matrix cholesky_factor(const Matrix& m) {
  check_square_symmetric(m);
  const std::size_t k = m.size();
  Matrix l(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double sum = m[i][j];
      for (std::size_t t = 0; t < j; ++t) sum -= l[i][t] * l[j][t];
      if (i == j) {
        if (!(sum > 0.0)) throw not_positive_definite(static_cast<int>(i + 1));
        l[i][i] = std::sqrt(sum);
      } else {
        l[i][j] = sum / l[j][j];
      }
    }
  }
  return l;
}

// theta + L z for a standard-normal vector z.
inline std::vector<double> correlated_row(const std::vector<double>& theta, const Matrix& l,
                                          const std::vector<double>& z) {
  const std::size_t k = theta.size();
  if (l.size() != k || z.size() != k)
    throw std::invalid_argument("correlated_row: dimension mismatch");
  std::vector<double> x(k);
  for (std::size_t i = 0; i < k; ++i) {
    double v = theta[i];
    for (std::size_t j = 0; j <= i; ++j) v += l[i][j] * z[j];
    x[i] = v;
  }
  return x;
}

}  // namespace seqbh
