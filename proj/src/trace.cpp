#include "hybridgaze/trace.hpp"

#include "hybridgaze/error.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace hybridgaze
{

std::vector<double> ChannelTrace::xs() const
{
  std::vector<double> out(samples.size());
  for (std::size_t k = 0; k < samples.size(); ++k)
    out[k] = samples[k].x;
  return out;
}

std::vector<double> ChannelTrace::ys() const
{
  std::vector<double> out(samples.size());
  for (std::size_t k = 0; k < samples.size(); ++k)
    out[k] = samples[k].y;
  return out;
}

void ChannelTrace::validate() const
{
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw Error(ErrorCode::InvalidLength, "sampling interval must be positive");
  if (confidence.size() != samples.size())
    throw Error(ErrorCode::Dimension, "confidence length " + std::to_string(confidence.size()) +
                                          " differs from sample count " +
                                          std::to_string(samples.size()));
  for (std::size_t k = 0; k < confidence.size(); ++k)
  {
    if (!(confidence[k] >= 0.0 && confidence[k] <= 1.0))
      throw Error(ErrorCode::Dimension, "confidence outside [0, 1]", k);
  }
}

ChannelTrace ChannelTrace::from_samples(double t0, double dt, std::vector<Vec2> samples)
{
  ChannelTrace trace;
  trace.t0 = t0;
  trace.dt = dt;
  trace.confidence.assign(samples.size(), 1.0);
  trace.samples = std::move(samples);
  return trace;
}

std::vector<double> VelocityTrace::xs() const
{
  std::vector<double> out(edges.size());
  for (std::size_t k = 0; k < edges.size(); ++k)
    out[k] = edges[k].x;
  return out;
}

std::vector<double> VelocityTrace::ys() const
{
  std::vector<double> out(edges.size());
  for (std::size_t k = 0; k < edges.size(); ++k)
    out[k] = edges[k].y;
  return out;
}

void VelocityTrace::validate() const
{
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw Error(ErrorCode::InvalidLength, "sampling interval must be positive");
  if (n_matches.size() != edges.size())
    throw Error(ErrorCode::Dimension, "match count length differs from edge count");
  for (std::size_t k = 0; k < n_matches.size(); ++k)
  {
    if (n_matches[k] < 0)
      throw Error(ErrorCode::Dimension, "negative match count", k);
  }
}

VelocityTrace VelocityTrace::from_edges(double t0, double dt, std::vector<Vec2> edges)
{
  VelocityTrace trace;
  trace.t0 = t0;
  trace.dt = dt;
  trace.n_matches.assign(edges.size(), std::numeric_limits<int>::max());
  trace.edges = std::move(edges);
  return trace;
}

VelocityTrace differentiate(const ChannelTrace& trace)
{
  std::vector<Vec2> edges;
  if (trace.size() > 1)
  {
    edges.reserve(trace.size() - 1);
    for (std::size_t k = 0; k + 1 < trace.size(); ++k)
      edges.push_back(trace.samples[k + 1] - trace.samples[k]);
  }
  return VelocityTrace::from_edges(trace.t0, trace.dt, std::move(edges));
}

ChannelTrace integrate(const VelocityTrace& velocity, Vec2 origin)
{
  std::vector<Vec2> samples;
  samples.reserve(velocity.size() + 1);
  samples.push_back(origin);
  for (const Vec2& e : velocity.edges)
    samples.push_back(samples.back() + e);
  return ChannelTrace::from_samples(velocity.t0, velocity.dt, std::move(samples));
}

} // namespace hybridgaze
