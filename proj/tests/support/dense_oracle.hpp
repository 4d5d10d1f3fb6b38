#pragma once

// Dense reference computations for the banded fusion solver. Everything here is
// O(n^3) and independent of the library code paths it checks.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace oracle
{

using Matrix = std::vector<std::vector<double>>;

inline Matrix zeros(std::size_t rows, std::size_t cols)
{
  return Matrix(rows, std::vector<double>(cols, 0.0));
}

inline Matrix transpose(const Matrix& a)
{
  Matrix t = zeros(a.empty() ? 0 : a[0].size(), a.size());
  for (std::size_t r = 0; r < a.size(); ++r)
    for (std::size_t c = 0; c < a[r].size(); ++c)
      t[c][r] = a[r][c];
  return t;
}

inline Matrix multiply(const Matrix& a, const Matrix& b)
{
  Matrix out = zeros(a.size(), b.empty() ? 0 : b[0].size());
  for (std::size_t r = 0; r < a.size(); ++r)
    for (std::size_t k = 0; k < b.size(); ++k)
      for (std::size_t c = 0; c < b[k].size(); ++c)
        out[r][c] += a[r][k] * b[k][c];
  return out;
}

inline std::vector<double> multiply(const Matrix& a, const std::vector<double>& x)
{
  std::vector<double> out(a.size(), 0.0);
  for (std::size_t r = 0; r < a.size(); ++r)
    for (std::size_t c = 0; c < x.size(); ++c)
      out[r] += a[r][c] * x[c];
  return out;
}

/// Dense (n-1) x n forward difference matrix.
inline Matrix difference_matrix(std::size_t n)
{
  Matrix d = zeros(n - 1, n);
  for (std::size_t k = 0; k + 1 < n; ++k)
  {
    d[k][k] = -1.0;
    d[k][k + 1] = 1.0;
  }
  return d;
}

inline Matrix diagonal(const std::vector<double>& v)
{
  Matrix m = zeros(v.size(), v.size());
  for (std::size_t k = 0; k < v.size(); ++k)
    m[k][k] = v[k];
  return m;
}

/// diag(beta_p) + D' diag(beta_i) D by explicit products.
inline Matrix precision_matrix(const std::vector<double>& beta_p, const std::vector<double>& beta_i)
{
  const Matrix d = difference_matrix(beta_p.size());
  Matrix out = multiply(multiply(transpose(d), diagonal(beta_i)), d);
  for (std::size_t k = 0; k < beta_p.size(); ++k)
    out[k][k] += beta_p[k];
  return out;
}

/// beta_p * p + D' diag(beta_i) v.
inline std::vector<double> right_hand_side(const std::vector<double>& beta_p,
                                           const std::vector<double>& beta_i,
                                           const std::vector<double>& p,
                                           const std::vector<double>& v)
{
  const Matrix dt = transpose(difference_matrix(p.size()));
  std::vector<double> weighted(v.size());
  for (std::size_t k = 0; k < v.size(); ++k)
    weighted[k] = beta_i[k] * v[k];
  std::vector<double> out = multiply(dt, weighted);
  for (std::size_t k = 0; k < p.size(); ++k)
    out[k] += beta_p[k] * p[k];
  return out;
}

/// Gauss-Jordan inverse with full pivoting.
inline Matrix inverse(Matrix a)
{
  const std::size_t n = a.size();
  Matrix inv = zeros(n, n);
  for (std::size_t k = 0; k < n; ++k)
    inv[k][k] = 1.0;
  std::vector<std::size_t> col_perm(n);
  for (std::size_t k = 0; k < n; ++k)
    col_perm[k] = k;

  for (std::size_t k = 0; k < n; ++k)
  {
    std::size_t pr = k, pc = k;
    double best = 0.0;
    for (std::size_t r = k; r < n; ++r)
      for (std::size_t c = k; c < n; ++c)
        if (std::abs(a[r][c]) > best)
        {
          best = std::abs(a[r][c]);
          pr = r;
          pc = c;
        }
    if (best == 0.0)
      throw std::runtime_error("singular matrix");
    std::swap(a[k], a[pr]);
    std::swap(inv[k], inv[pr]);
    if (pc != k)
    {
      for (std::size_t r = 0; r < n; ++r)
        std::swap(a[r][k], a[r][pc]);
      std::swap(col_perm[k], col_perm[pc]);
    }
    const double pivot = a[k][k];
    for (std::size_t c = 0; c < n; ++c)
    {
      a[k][c] /= pivot;
      inv[k][c] /= pivot;
    }
    for (std::size_t r = 0; r < n; ++r)
    {
      if (r == k || a[r][k] == 0.0)
        continue;
      const double f = a[r][k];
      for (std::size_t c = 0; c < n; ++c)
      {
        a[r][c] -= f * a[k][c];
        inv[r][c] -= f * inv[k][c];
      }
    }
  }
  // Column swaps of A permute the rows of its inverse.
  Matrix out = zeros(n, n);
  for (std::size_t k = 0; k < n; ++k)
    out[col_perm[k]] = inv[k];
  return out;
}

inline double determinant(Matrix a)
{
  const std::size_t n = a.size();
  double det = 1.0;
  for (std::size_t k = 0; k < n; ++k)
  {
    std::size_t pr = k, pc = k;
    double best = 0.0;
    for (std::size_t r = k; r < n; ++r)
      for (std::size_t c = k; c < n; ++c)
        if (std::abs(a[r][c]) > best)
        {
          best = std::abs(a[r][c]);
          pr = r;
          pc = c;
        }
    if (best == 0.0)
      return 0.0;
    if (pr != k)
    {
      std::swap(a[k], a[pr]);
      det = -det;
    }
    if (pc != k)
    {
      for (std::size_t r = 0; r < n; ++r)
        std::swap(a[r][k], a[r][pc]);
      det = -det;
    }
    det *= a[k][k];
    for (std::size_t r = k + 1; r < n; ++r)
    {
      const double f = a[r][k] / a[k][k];
      for (std::size_t c = k; c < n; ++c)
        a[r][c] -= f * a[k][c];
    }
  }
  return det;
}

/// Fused estimate Sigma * rhs with Sigma from the dense inverse.
inline std::vector<double> fused_estimate(const std::vector<double>& beta_p,
                                          const std::vector<double>& beta_i,
                                          const std::vector<double>& p, const std::vector<double>& v)
{
  return multiply(inverse(precision_matrix(beta_p, beta_i)),
                  right_hand_side(beta_p, beta_i, p, v));
}

} // namespace oracle
