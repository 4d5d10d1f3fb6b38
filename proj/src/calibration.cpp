#include "hybridgaze/calibration.hpp"

#include "hybridgaze/error.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace hybridgaze
{

std::array<double, 6> PolyCalibration::basis(Vec2 raw)
{
  return {1.0, raw.x, raw.y, raw.x * raw.y, raw.x * raw.x, raw.y * raw.y};
}

Vec2 PolyCalibration::apply(Vec2 raw) const
{
  const auto b = basis(raw);
  Vec2 out;
  for (std::size_t j = 0; j < 6; ++j)
  {
    out.x += x[j] * b[j];
    out.y += y[j] * b[j];
  }
  return out;
}

Vec2 VelocityCalibration::apply(Vec2 raw) const
{
  return {m[0][0] * raw.x + m[0][1] * raw.y, m[1][0] * raw.x + m[1][1] * raw.y};
}

PolyCalibration fit_poly(std::span<const CalibrationPoint> points)
{
  const auto n = static_cast<Eigen::Index>(points.size());
  if (n < 6)
    throw Error(ErrorCode::DegenerateCalibration,
                "polynomial calibration needs at least 6 points, got " + std::to_string(n));

  // Normalize inputs so the quadratic columns have comparable magnitude.
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (const auto& p : points)
    mean += Eigen::Vector2d(p.raw.x, p.raw.y);
  mean /= static_cast<double>(n);
  double scale = 0.0;
  for (const auto& p : points)
    scale = std::max({scale, std::abs(p.raw.x - mean.x()), std::abs(p.raw.y - mean.y())});
  if (!(scale > 0.0))
    throw Error(ErrorCode::DegenerateCalibration, "calibration inputs are all identical");

  Eigen::MatrixXd design(n, 6);
  Eigen::MatrixXd targets(n, 2);
  for (Eigen::Index r = 0; r < n; ++r)
  {
    const auto& p = points[static_cast<std::size_t>(r)];
    const Vec2 q{(p.raw.x - mean.x()) / scale, (p.raw.y - mean.y()) / scale};
    const auto b = PolyCalibration::basis(q);
    for (Eigen::Index c = 0; c < 6; ++c)
      design(r, c) = b[static_cast<std::size_t>(c)];
    targets(r, 0) = p.target.x;
    targets(r, 1) = p.target.y;
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-10);
  if (qr.rank() < 6)
    throw Error(ErrorCode::DegenerateCalibration,
                "calibration design matrix is rank deficient (rank " + std::to_string(qr.rank()) +
                    ")");
  const Eigen::MatrixXd normalized = qr.solve(targets);

  // Expand the polynomial in normalized coordinates back to raw coordinates:
  // q = (raw - mean) / s.
  const double mx = mean.x();
  const double my = mean.y();
  const double s = scale;
  PolyCalibration out;
  auto expand = [&](Eigen::Index axis, std::array<double, 6>& c) {
    const double a0 = normalized(0, axis);
    const double a1 = normalized(1, axis) / s;
    const double a2 = normalized(2, axis) / s;
    const double a3 = normalized(3, axis) / (s * s);
    const double a4 = normalized(4, axis) / (s * s);
    const double a5 = normalized(5, axis) / (s * s);
    c[0] = a0 - a1 * mx - a2 * my + a3 * mx * my + a4 * mx * mx + a5 * my * my;
    c[1] = a1 - a3 * my - 2.0 * a4 * mx;
    c[2] = a2 - a3 * mx - 2.0 * a5 * my;
    c[3] = a3;
    c[4] = a4;
    c[5] = a5;
  };
  expand(0, out.x);
  expand(1, out.y);

  double ss = 0.0;
  for (const auto& p : points)
  {
    const Vec2 e = out.apply(p.raw) - p.target;
    ss += e.x * e.x + e.y * e.y;
  }
  out.rms_residual = std::sqrt(ss / static_cast<double>(n));
  return out;
}

VelocityCalibration fit_velocity_map(std::span<const CalibrationPoint> displacements)
{
  if (displacements.size() < 2)
    throw Error(ErrorCode::DegenerateCalibration,
                "velocity calibration needs at least 2 displacement pairs");

  Eigen::Matrix2d gram = Eigen::Matrix2d::Zero();
  Eigen::Matrix2d cross = Eigen::Matrix2d::Zero();
  for (const auto& d : displacements)
  {
    const Eigen::Vector2d r(d.raw.x, d.raw.y);
    const Eigen::Vector2d t(d.target.x, d.target.y);
    gram += r * r.transpose();
    cross += t * r.transpose();
  }

  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(gram);
  const double lo = eig.eigenvalues()(0);
  const double hi = eig.eigenvalues()(1);
  if (!(hi > 0.0) || !(lo > 1e-12 * hi))
    throw Error(ErrorCode::DegenerateCalibration,
                "saccade displacements do not span two directions");

  const Eigen::Matrix2d m = cross * gram.inverse();

  VelocityCalibration out;
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c)
      out.m[r][c] = m(r, c);

  double ss = 0.0;
  for (const auto& d : displacements)
  {
    const Vec2 e = out.apply(d.raw) - d.target;
    ss += e.x * e.x + e.y * e.y;
  }
  out.rms_residual = std::sqrt(ss / static_cast<double>(displacements.size()));

  const Eigen::JacobiSVD<Eigen::Matrix2d> svd(m);
  const double smin = svd.singularValues()(1);
  out.condition_number = smin > 0.0 ? svd.singularValues()(0) / smin
                                    : std::numeric_limits<double>::infinity();
  return out;
}

std::vector<CalibrationPoint> extract_saccade_displacements(
    const VelocityTrace& raw_velocity, std::span<const CalibrationTarget> targets,
    const SaccadeExtractionConfig& cfg)
{
  for (std::size_t j = 1; j < targets.size(); ++j)
  {
    if (!(targets[j].onset > targets[j - 1].onset))
      throw Error(ErrorCode::Schema, "calibration target onsets must increase", j);
  }

  const std::size_t edges = raw_velocity.size();
  const double dt = raw_velocity.dt;
  auto edge_at = [&](double t) {
    const double k = std::ceil((t - raw_velocity.t0) / dt - 1e-9);
    return static_cast<std::size_t>(std::clamp(k, 0.0, static_cast<double>(edges)));
  };
  auto speed = [&](std::size_t k) { return std::hypot(raw_velocity.edges[k].x, raw_velocity.edges[k].y); };
  const auto pad = static_cast<std::size_t>(std::lround(cfg.pad / dt));

  std::vector<CalibrationPoint> out;
  for (std::size_t j = 1; j < targets.size(); ++j)
  {
    const std::size_t begin = edge_at(targets[j].onset);
    const std::size_t end = j + 1 < targets.size() ? edge_at(targets[j + 1].onset) : edges;
    if (begin >= end)
      continue;

    std::size_t peak = begin;
    for (std::size_t k = begin; k < end; ++k)
    {
      if (speed(k) > speed(peak))
        peak = k;
    }
    const double peak_speed = speed(peak);
    if (!(peak_speed > 0.0))
      continue;

    const double level = cfg.landing_fraction * peak_speed;
    std::size_t onset = peak;
    while (onset > begin && speed(onset - 1) >= level)
      --onset;
    std::size_t landing = peak;
    while (landing + 1 < end && speed(landing) >= level)
      ++landing;

    const std::size_t from = onset > pad ? onset - pad : 0;
    const std::size_t to = std::min(landing + pad, edges - 1);
    Vec2 displacement;
    for (std::size_t k = from; k <= to; ++k)
      displacement = displacement + raw_velocity.edges[k];
    out.push_back({displacement, targets[j].position - targets[j - 1].position});
  }
  return out;
}

double display_delay(double x, double y, const DisplayDelayModel& model)
{
  return model(x, y);
}

CalibratedChannels apply_calibration(const ChannelTrace& position, const VelocityTrace& velocity,
                                     const PolyCalibration& poly,
                                     const VelocityCalibration& velocity_map)
{
  CalibratedChannels out{position, velocity};
  for (auto& s : out.position.samples)
    s = poly.apply(s);
  for (auto& e : out.velocity.edges)
    e = velocity_map.apply(e);
  return out;
}

std::string to_json(const CalibrationFile& calibration)
{
  nlohmann::ordered_json doc;
  doc["poly"]["x"] = calibration.poly.x;
  doc["poly"]["y"] = calibration.poly.y;
  doc["velocity"] = calibration.velocity.m;
  doc["residuals"]["poly_rms"] = calibration.poly.rms_residual;
  doc["residuals"]["velocity_rms"] = calibration.velocity.rms_residual;
  doc["velocity_condition_number"] = calibration.velocity.condition_number;
  return doc.dump(2) + "\n";
}

CalibrationFile calibration_from_json(const std::string& text)
{
  try
  {
    const auto doc = nlohmann::json::parse(text);
    CalibrationFile out;
    out.poly.x = doc.at("poly").at("x").get<std::array<double, 6>>();
    out.poly.y = doc.at("poly").at("y").get<std::array<double, 6>>();
    out.velocity.m = doc.at("velocity").get<std::array<std::array<double, 2>, 2>>();
    if (doc.contains("residuals"))
    {
      out.poly.rms_residual = doc["residuals"].value("poly_rms", 0.0);
      out.velocity.rms_residual = doc["residuals"].value("velocity_rms", 0.0);
    }
    out.velocity.condition_number = doc.value("velocity_condition_number", 1.0);
    return out;
  }
  catch (const nlohmann::json::exception& e)
  {
    throw Error(ErrorCode::Schema, std::string("malformed calibration file: ") + e.what());
  }
}

} // namespace hybridgaze
