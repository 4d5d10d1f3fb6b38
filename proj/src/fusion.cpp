#include "hybridgaze/fusion.hpp"

#include "hybridgaze/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace hybridgaze
{

namespace
{

// Residual bound relative to the right-hand side, checked after every solve.
constexpr double kResidualTolerance = 1e-9;

double max_abs(std::span<const double> v)
{
  double m = 0.0;
  for (double x : v)
    m = std::max(m, std::abs(x));
  return m;
}

std::vector<double> multiply(const FusionSystem& system, std::span<const double> x)
{
  const std::size_t n = system.size();
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k)
  {
    double acc = system.diag[k] * x[k];
    if (k > 0)
      acc += system.offdiag[k - 1] * x[k - 1];
    if (k + 1 < n)
      acc += system.offdiag[k] * x[k + 1];
    out[k] = acc;
  }
  return out;
}

void check_residual(const FusionSystem& system, std::span<const double> x,
                    std::span<const double> rhs)
{
  const std::vector<double> ax = multiply(system, x);
  double worst = 0.0;
  std::size_t worst_index = 0;
  for (std::size_t k = 0; k < ax.size(); ++k)
  {
    const double r = std::abs(ax[k] - rhs[k]);
    if (!(r <= worst))
    {
      worst = r;
      worst_index = k;
    }
  }
  // Relative to the rhs, or to |A| |x| when the system is stiff enough that
  // evaluating A x itself carries more rounding than the rhs scale.
  double a_norm = 0.0;
  const std::size_t n = system.size();
  for (std::size_t k = 0; k < n; ++k)
  {
    double row = std::abs(system.diag[k]);
    if (k > 0)
      row += std::abs(system.offdiag[k - 1]);
    if (k + 1 < n)
      row += std::abs(system.offdiag[k]);
    a_norm = std::max(a_norm, row);
  }
  const double scale = std::max(max_abs(rhs), a_norm * max_abs(x));
  if (!(worst <= kResidualTolerance * scale))
    throw Error(ErrorCode::Singular,
                "fusion residual " + std::to_string(worst) + " exceeds tolerance at sample " +
                    std::to_string(worst_index),
                worst_index);
}

} // namespace

DifferenceOperator::DifferenceOperator(std::size_t n) : n_(n)
{
  if (n < 2)
    throw Error(ErrorCode::InvalidLength,
                "difference operator needs at least 2 samples, got " + std::to_string(n));
}

std::vector<double> DifferenceOperator::apply(std::span<const double> v) const
{
  if (v.size() != n_)
    throw Error(ErrorCode::Dimension, "difference operator input length mismatch");
  std::vector<double> out(n_ - 1);
  for (std::size_t k = 0; k + 1 < n_; ++k)
    out[k] = v[k + 1] - v[k];
  return out;
}

std::vector<double> DifferenceOperator::apply_transpose(std::span<const double> e) const
{
  if (e.size() != n_ - 1)
    throw Error(ErrorCode::Dimension, "difference operator transpose input length mismatch");
  std::vector<double> out(n_, 0.0);
  for (std::size_t k = 0; k + 1 < n_; ++k)
  {
    out[k] -= e[k];
    out[k + 1] += e[k];
  }
  return out;
}

WeightSchedule WeightSchedule::constant(std::size_t n, double beta_p, double beta_i, double floor)
{
  WeightSchedule w;
  w.beta_p.assign(n, std::max(beta_p, floor));
  w.beta_i.assign(n > 0 ? n - 1 : 0, beta_i);
  w.floor = floor;
  return w;
}

std::vector<double> derive_confidence(const WeightSchedule& weights)
{
  const std::size_t n = weights.beta_p.size();
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k)
  {
    double sum = 0.0;
    int count = 0;
    if (k > 0 && k - 1 < weights.beta_i.size())
    {
      sum += weights.beta_i[k - 1];
      ++count;
    }
    if (k < weights.beta_i.size())
    {
      sum += weights.beta_i[k];
      ++count;
    }
    const double mean_i = count > 0 ? sum / count : 0.0;
    out[k] = std::clamp(weights.beta_p[k] + mean_i, 0.0, 1.0);
  }
  return out;
}

TridiagonalFactorization::TridiagonalFactorization(std::span<const double> diag,
                                                   std::span<const double> offdiag)
{
  const std::size_t n = diag.size();
  if (n == 0 || offdiag.size() + 1 != n)
    throw Error(ErrorCode::Dimension, "tridiagonal band lengths are inconsistent");

  pivots_.resize(n);
  multipliers_.resize(n - 1);
  pivots_[0] = diag[0];
  for (std::size_t k = 0;; ++k)
  {
    // The determinant is the product of the pivots; a vanishing pivot means the
    // precision matrix lost rank (all position weights at zero).
    if (!(pivots_[k] > 0.0) || !std::isfinite(pivots_[k]))
      throw Error(ErrorCode::Singular,
                  "precision matrix is not positive definite at sample " + std::to_string(k), k);
    if (k + 1 == n)
      break;
    multipliers_[k] = offdiag[k] / pivots_[k];
    pivots_[k + 1] = diag[k + 1] - multipliers_[k] * offdiag[k];
  }
}

std::vector<double> TridiagonalFactorization::solve(std::span<const double> rhs) const
{
  const std::size_t n = size();
  if (rhs.size() != n)
    throw Error(ErrorCode::Dimension, "right-hand side length mismatch");

  std::vector<double> x(rhs.begin(), rhs.end());
  for (std::size_t k = 1; k < n; ++k)
    x[k] -= multipliers_[k - 1] * x[k - 1];
  for (std::size_t k = 0; k < n; ++k)
    x[k] /= pivots_[k];
  for (std::size_t k = n - 1; k-- > 0;)
    x[k] -= multipliers_[k] * x[k + 1];
  return x;
}

std::vector<double> TridiagonalFactorization::inverse_diagonal() const
{
  const std::size_t n = size();
  std::vector<double> inv(n);
  inv[n - 1] = 1.0 / pivots_[n - 1];
  for (std::size_t k = n - 1; k-- > 0;)
    inv[k] = 1.0 / pivots_[k] + multipliers_[k] * multipliers_[k] * inv[k + 1];
  return inv;
}

FusionSystem assemble_system(const ChannelTrace& position, const VelocityTrace& velocity,
                             const WeightSchedule& weights)
{
  const std::size_t n = position.size();
  const DifferenceOperator difference(n);
  if (velocity.size() != n - 1)
    throw Error(ErrorCode::Dimension, "velocity has " + std::to_string(velocity.size()) +
                                          " edges, expected " + std::to_string(n - 1));
  if (weights.beta_p.size() != n || weights.beta_i.size() != n - 1)
    throw Error(ErrorCode::Dimension, "weight schedule length mismatch");
  if (!weights.confidence.empty() && weights.confidence.size() != n)
    throw Error(ErrorCode::Dimension, "weight confidence length mismatch");
  if (!(weights.floor > 0.0))
    throw Error(ErrorCode::WeightFloor, "weight floor must be positive");
  for (std::size_t k = 0; k < n; ++k)
  {
    if (!(weights.beta_p[k] >= weights.floor))
      throw Error(ErrorCode::WeightFloor,
                  "position weight below floor at sample " + std::to_string(k), k);
  }
  for (std::size_t k = 0; k + 1 < n; ++k)
  {
    if (!(weights.beta_i[k] >= 0.0))
      throw Error(ErrorCode::WeightFloor, "negative velocity weight at edge " + std::to_string(k),
                  k);
  }

  FusionSystem system;
  system.t0 = position.t0;
  system.dt = position.dt;
  system.diag = weights.beta_p;
  system.offdiag.resize(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k)
  {
    system.diag[k] += weights.beta_i[k];
    system.diag[k + 1] += weights.beta_i[k];
    system.offdiag[k] = -weights.beta_i[k];
  }

  // Only velocities enter the right-hand side: D' diag(beta_i) v.
  std::vector<double> weighted_x(n - 1);
  std::vector<double> weighted_y(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k)
  {
    weighted_x[k] = weights.beta_i[k] * velocity.edges[k].x;
    weighted_y[k] = weights.beta_i[k] * velocity.edges[k].y;
  }
  system.rhs_x = difference.apply_transpose(weighted_x);
  system.rhs_y = difference.apply_transpose(weighted_y);
  for (std::size_t k = 0; k < n; ++k)
  {
    system.rhs_x[k] += weights.beta_p[k] * position.samples[k].x;
    system.rhs_y[k] += weights.beta_p[k] * position.samples[k].y;
  }

  system.confidence = weights.confidence.empty() ? derive_confidence(weights) : weights.confidence;
  return system;
}

FusionResult solve(const FusionSystem& system)
{
  const std::size_t n = system.size();
  if (n < 2 || system.offdiag.size() != n - 1 || system.rhs_x.size() != n ||
      system.rhs_y.size() != n)
    throw Error(ErrorCode::Dimension, "fusion system is malformed");

  const TridiagonalFactorization factorization(system.diag, system.offdiag);
  const std::vector<double> hx = factorization.solve(system.rhs_x);
  const std::vector<double> hy = factorization.solve(system.rhs_y);
  check_residual(system, hx, system.rhs_x);
  check_residual(system, hy, system.rhs_y);

  FusionResult result;
  result.hybrid.t0 = system.t0;
  result.hybrid.dt = system.dt;
  result.hybrid.samples.resize(n);
  for (std::size_t k = 0; k < n; ++k)
    result.hybrid.samples[k] = {hx[k], hy[k]};
  result.overall_confidence = system.confidence.size() == n ? system.confidence
                                                            : std::vector<double>(n, 1.0);
  result.hybrid.confidence = result.overall_confidence;
  result.variance = factorization.inverse_diagonal();
  return result;
}

FusionResult fuse(const ChannelTrace& position, const VelocityTrace& velocity,
                  const WeightSchedule& weights)
{
  return solve(assemble_system(position, velocity, weights));
}

} // namespace hybridgaze
