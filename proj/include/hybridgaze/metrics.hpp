#pragma once

#include "hybridgaze/trace.hpp"

#include <cstddef>
#include <limits>

namespace hybridgaze
{

/// Half-open sample range [begin, end).
struct IndexWindow
{
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const noexcept { return end > begin ? end - begin : 0; }
  friend bool operator==(const IndexWindow&, const IndexWindow&) = default;
};

struct PrecisionReport
{
  double s2s_rms = 0.0;
  double std = 0.0;
  std::size_t n_samples = 0;
  IndexWindow window;
};

/// Root mean square of adjacent-sample Euclidean displacement; the divisor is
/// the number of differences. Throws Error(InvalidWindow) for < 2 samples.
double s2s_rms(const ChannelTrace& trace, IndexWindow window);

/// sqrt((var_x + var_y) / 2) with population variances.
double std_precision(const ChannelTrace& trace, IndexWindow window);

PrecisionReport precision(const ChannelTrace& trace, IndexWindow window);

inline constexpr double kFixationSpanMs = 450.0;

/// Window of `span_ms` starting at or after `onset` (seconds) with the least
/// dispersion (x extent plus y extent). Candidate windows must end by
/// `search_end` (seconds). Ties go to the earliest start.
IndexWindow fixation_window(const ChannelTrace& trace, double onset, double span_ms = kFixationSpanMs,
                            double search_end = std::numeric_limits<double>::infinity());

/// Fixation dispersion of one window: (max - min) of x plus (max - min) of y.
double dispersion(const ChannelTrace& trace, IndexWindow window);

struct AccuracyResult
{
  Vec2 offset;           ///< target - mean gaze
  std::size_t excluded = 0; ///< zero-confidence samples left out of the mean
};

AccuracyResult accuracy(const ChannelTrace& trace, IndexWindow window, Vec2 target);

/// One constant-velocity stimulus leg.
struct StimulusRamp
{
  double t_start = 0.0; ///< seconds
  double t_end = 0.0;   ///< direction change, seconds
  Vec2 origin;          ///< stimulus position at t_start
  Vec2 velocity;        ///< units per second

  Vec2 at(double t) const { return origin + (t - t_start) * velocity; }
};

struct PursuitConfig
{
  /// Starting point is searched within this leading fraction of the leg.
  double search_fraction = 0.5;
  /// Half width, in samples, of the centered difference used for gaze velocity.
  std::size_t velocity_half_window = 5;
};

struct PursuitSegment
{
  std::size_t start_index = 0;
  std::size_t end_index = 0; ///< inclusive
  Vec2 start_point;
  Vec2 end_point;
  Vec2 trend_slope; ///< units per second of the removed line
  ChannelTrace detrended;
};

/// Removes the line through the gaze at the starting point (closest to the
/// stimulus in both position and velocity) and the last sample before the
/// direction change. Throws Error(InvalidSegment) when fewer than 4 samples remain.
PursuitSegment detrend_pursuit(const ChannelTrace& trace, const StimulusRamp& stimulus,
                               const PursuitConfig& cfg = {});

} // namespace hybridgaze
