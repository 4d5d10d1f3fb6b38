#include "hybridgaze/compensation.hpp"

#include "hybridgaze/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

namespace hybridgaze
{

namespace
{

// Solves a symmetric 3x3 system by Cramer's rule. Returns false when the
// determinant is negligible relative to the matrix scale.
bool solve3(const std::array<std::array<double, 3>, 3>& a, const std::array<double, 3>& b,
            std::array<double, 3>& x)
{
  auto det3 = [](const std::array<std::array<double, 3>, 3>& m) {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
           m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  };
  const double det = det3(a);
  double scale = 0.0;
  for (const auto& row : a)
    for (double v : row)
      scale = std::max(scale, std::abs(v));
  if (!(std::abs(det) > 1e-12 * scale * scale * scale))
    return false;
  for (int c = 0; c < 3; ++c)
  {
    auto m = a;
    for (int r = 0; r < 3; ++r)
      m[r][c] = b[r];
    x[c] = det3(m) / det;
  }
  return true;
}

} // namespace

CrEstimate combine_glints(std::span<const Glint> glints)
{
  std::vector<Vec2> points;
  for (const Glint& g : glints)
  {
    if (g.valid)
      points.push_back(g.center);
  }
  if (points.empty())
    throw Error(ErrorCode::MissingCr, "no valid corneal reflection in frame");

  Vec2 centroid;
  for (const Vec2& p : points)
    centroid = centroid + p;
  centroid = (1.0 / static_cast<double>(points.size())) * centroid;

  if (points.size() < 3)
    return {centroid, CrFitQuality::Centroid};

  // Kasa fit on centered coordinates: minimize sum (x^2 + y^2 + a x + b y + c)^2.
  std::array<std::array<double, 3>, 3> normal{};
  std::array<double, 3> rhs{};
  for (const Vec2& p : points)
  {
    const Vec2 q = p - centroid;
    const std::array<double, 3> row{q.x, q.y, 1.0};
    const double z = -(q.x * q.x + q.y * q.y);
    for (int r = 0; r < 3; ++r)
    {
      for (int c = 0; c < 3; ++c)
        normal[r][c] += row[r] * row[c];
      rhs[r] += row[r] * z;
    }
  }

  std::array<double, 3> coeffs{};
  if (!solve3(normal, rhs, coeffs))
    return {centroid, CrFitQuality::Centroid};

  return {centroid + Vec2{-coeffs[0] / 2.0, -coeffs[1] / 2.0}, CrFitQuality::CircleFit};
}

CompensatedChannels compensate(const ChannelTrace& position, const ChannelTrace& cr,
                               const VelocityTrace& velocity, const VelocityTrace& head_velocity)
{
  if (position.size() != cr.size())
    throw Error(ErrorCode::Dimension, "position and corneal-reflection lengths differ");
  if (velocity.size() != head_velocity.size())
    throw Error(ErrorCode::Dimension, "iris and head velocity lengths differ");
  if (position.confidence.size() != position.size() || cr.confidence.size() != cr.size())
    throw Error(ErrorCode::Dimension, "confidence length mismatch");

  CompensatedChannels out;
  out.position.t0 = position.t0;
  out.position.dt = position.dt;
  out.position.samples.resize(position.size());
  out.position.confidence.resize(position.size());
  for (std::size_t k = 0; k < position.size(); ++k)
  {
    out.position.samples[k] = position.samples[k] - cr.samples[k];
    out.position.confidence[k] = std::min(position.confidence[k], cr.confidence[k]);
  }

  out.velocity.t0 = velocity.t0;
  out.velocity.dt = velocity.dt;
  out.velocity.n_matches = velocity.n_matches;
  out.velocity.edges.resize(velocity.size());
  for (std::size_t k = 0; k < velocity.size(); ++k)
    out.velocity.edges[k] = velocity.edges[k] - head_velocity.edges[k];
  return out;
}

} // namespace hybridgaze
