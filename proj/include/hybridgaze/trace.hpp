#pragma once

#include <cstddef>
#include <vector>

namespace hybridgaze
{

struct Vec2
{
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Vec2 a, Vec2 b) = default;
};

/// Uniformly sampled 2D position channel with per-sample confidence in [0, 1].
struct ChannelTrace
{
  double t0 = 0.0;
  double dt = 1.0;
  std::vector<Vec2> samples;
  std::vector<double> confidence;

  std::size_t size() const noexcept { return samples.size(); }
  double time(std::size_t k) const noexcept { return t0 + dt * static_cast<double>(k); }

  std::vector<double> xs() const;
  std::vector<double> ys() const;

  /// Throws Error(Dimension/InvalidLength) when dt <= 0, confidence length
  /// differs from samples or any confidence lies outside [0, 1].
  void validate() const;

  /// Trace with confidence 1 everywhere.
  static ChannelTrace from_samples(double t0, double dt, std::vector<Vec2> samples);
};

/// Per-frame-pair velocity; edge k spans samples (k, k+1), units per frame.
struct VelocityTrace
{
  double t0 = 0.0;
  double dt = 1.0;
  std::vector<Vec2> edges;
  std::vector<int> n_matches;

  std::size_t size() const noexcept { return edges.size(); }

  std::vector<double> xs() const;
  std::vector<double> ys() const;

  void validate() const;

  /// Edges with an unlimited match count.
  static VelocityTrace from_edges(double t0, double dt, std::vector<Vec2> edges);
};

/// Adjacent differences of a position trace, as a velocity trace.
VelocityTrace differentiate(const ChannelTrace& trace);

/// Cumulative sum of velocity edges anchored at `origin`.
ChannelTrace integrate(const VelocityTrace& velocity, Vec2 origin);

} // namespace hybridgaze
