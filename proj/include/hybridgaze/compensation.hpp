#pragma once

#include "hybridgaze/trace.hpp"

#include <span>

namespace hybridgaze
{

struct Glint
{
  Vec2 center;
  bool valid = true;
};

enum class CrFitQuality
{
  CircleFit, ///< three or more valid glints, algebraic circle fit
  Centroid,  ///< one or two glints, or collinear glints
};

struct CrEstimate
{
  Vec2 center;
  CrFitQuality quality = CrFitQuality::Centroid;
};

/// Corneal-reflection center of one frame. Invalid glints are ignored.
/// Throws Error(MissingCr) when no valid glint remains.
CrEstimate combine_glints(std::span<const Glint> glints);

struct CompensatedChannels
{
  ChannelTrace position;
  VelocityTrace velocity;
};

/// position - cr and velocity - head_velocity. Position confidence is the
/// pointwise minimum of the two inputs; match counts come from the iris channel.
CompensatedChannels compensate(const ChannelTrace& position, const ChannelTrace& cr,
                               const VelocityTrace& velocity, const VelocityTrace& head_velocity);

} // namespace hybridgaze
