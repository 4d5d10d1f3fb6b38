#pragma once

#include "hybridgaze/trace.hpp"

#include <array>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace hybridgaze
{

/// Full quadratic map per output axis over the basis [1, u, v, uv, u^2, v^2].
struct PolyCalibration
{
  std::array<double, 6> x{0, 1, 0, 0, 0, 0};
  std::array<double, 6> y{0, 0, 1, 0, 0, 0};
  double rms_residual = 0.0;

  Vec2 apply(Vec2 raw) const;
  static std::array<double, 6> basis(Vec2 raw);
};

/// Linear map from raw displacement to degrees.
struct VelocityCalibration
{
  std::array<std::array<double, 2>, 2> m{{{1.0, 0.0}, {0.0, 1.0}}};
  double rms_residual = 0.0;
  double condition_number = 1.0;

  Vec2 apply(Vec2 raw) const;
};

struct CalibrationTarget
{
  double onset = 0.0; ///< seconds
  Vec2 position;      ///< degrees
};

/// One raw observation and the target it should map to.
struct CalibrationPoint
{
  Vec2 raw;
  Vec2 target;
};

/// Throws Error(DegenerateCalibration) when fewer than six points are given or
/// the design matrix is rank deficient.
PolyCalibration fit_poly(std::span<const CalibrationPoint> points);

/// Least-squares 2x2 map target = M raw over displacement pairs.
/// Throws Error(DegenerateCalibration) when the raw displacements span < 2 dims.
VelocityCalibration fit_velocity_map(std::span<const CalibrationPoint> displacements);

struct SaccadeExtractionConfig
{
  double pad = 0.030;            ///< seconds integrated before onset and after landing
  double landing_fraction = 0.2; ///< landing when speed drops below this fraction of peak
};

/// For each consecutive target pair, locate the saccade in the raw velocity
/// channel between the two onsets, integrate it over [onset - pad,
/// landing + pad] and pair it with the target displacement.
std::vector<CalibrationPoint> extract_saccade_displacements(
    const VelocityTrace& raw_velocity, std::span<const CalibrationTarget> targets,
    const SaccadeExtractionConfig& cfg = {});

/// Affine display-delay model in ms.
struct DisplayDelayModel
{
  double per_x = 21.4;
  double per_y = 4.26;
  double offset = -2.35;

  double operator()(double x, double y) const { return per_x * x + per_y * y + offset; }
};

double display_delay(double x, double y, const DisplayDelayModel& model = {});

struct CalibratedChannels
{
  ChannelTrace position;
  VelocityTrace velocity;
};

CalibratedChannels apply_calibration(const ChannelTrace& position, const VelocityTrace& velocity,
                                     const PolyCalibration& poly,
                                     const VelocityCalibration& velocity_map);

struct CalibrationFile
{
  PolyCalibration poly;
  VelocityCalibration velocity;
};

std::string to_json(const CalibrationFile& calibration);
/// Throws Error(Schema) on malformed documents.
CalibrationFile calibration_from_json(const std::string& text);

} // namespace hybridgaze
