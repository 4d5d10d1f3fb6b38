#pragma once

#include "hybridgaze/trace.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace hybridgaze
{

/// Default lower bound on the position weight. Keeps the precision matrix
/// invertible when the position channel carries no information.
inline constexpr double kDefaultWeightFloor = 1e-8;

/// Forward first difference, (n-1) x n. Row k has -1 at column k and +1 at k+1.
class DifferenceOperator
{
public:
  explicit DifferenceOperator(std::size_t n);

  std::size_t rows() const noexcept { return n_ - 1; }
  std::size_t cols() const noexcept { return n_; }

  std::vector<double> apply(std::span<const double> v) const;
  std::vector<double> apply_transpose(std::span<const double> e) const;

private:
  std::size_t n_;
};

/// Per-sample position weights and per-edge velocity weights (1/variance).
struct WeightSchedule
{
  std::vector<double> beta_p;
  std::vector<double> beta_i;
  double floor = kDefaultWeightFloor;
  /// Optional per-sample confidence reported with the result. When empty it is
  /// derived from the weights.
  std::vector<double> confidence;

  static WeightSchedule constant(std::size_t n, double beta_p, double beta_i,
                                 double floor = kDefaultWeightFloor);
};

/// Symmetric tridiagonal precision matrix diag(beta_p) + D' diag(beta_i) D
/// with one right-hand side per axis. Both axes share the matrix.
struct FusionSystem
{
  double t0 = 0.0;
  double dt = 1.0;
  std::vector<double> diag;
  std::vector<double> offdiag;
  std::vector<double> rhs_x;
  std::vector<double> rhs_y;
  std::vector<double> confidence;

  std::size_t size() const noexcept { return diag.size(); }
};

struct FusionResult
{
  ChannelTrace hybrid;
  std::vector<double> variance;
  std::vector<double> overall_confidence;
};

/// LDL' factorization of a symmetric tridiagonal matrix.
class TridiagonalFactorization
{
public:
  /// Throws Error(Singular) with the index of the first non-positive pivot.
  TridiagonalFactorization(std::span<const double> diag, std::span<const double> offdiag);

  std::size_t size() const noexcept { return pivots_.size(); }
  const std::vector<double>& pivots() const noexcept { return pivots_; }

  std::vector<double> solve(std::span<const double> rhs) const;

  /// Diagonal of the inverse by the backward recurrence
  /// inv[k] = 1/d[k] + l[k]^2 inv[k+1].
  std::vector<double> inverse_diagonal() const;

private:
  std::vector<double> pivots_;
  std::vector<double> multipliers_;
};

FusionSystem assemble_system(const ChannelTrace& position, const VelocityTrace& velocity,
                             const WeightSchedule& weights);

FusionResult solve(const FusionSystem& system);

/// Fused position from an absolute channel and a velocity channel. Any
/// constant offset of the integrated velocity has no effect on the result.
FusionResult fuse(const ChannelTrace& position, const VelocityTrace& velocity,
                  const WeightSchedule& weights);

/// clamp(beta_p[k] + mean of adjacent beta_i, 0, 1).
std::vector<double> derive_confidence(const WeightSchedule& weights);

} // namespace hybridgaze
