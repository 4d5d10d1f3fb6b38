#include "hybridgaze/metrics.hpp"

#include "hybridgaze/error.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>
#include <vector>

namespace hybridgaze
{

namespace
{

void check_window(const ChannelTrace& trace, IndexWindow window)
{
  if (window.end > trace.size() || window.size() < 2)
    throw Error(ErrorCode::InvalidWindow,
                "window [" + std::to_string(window.begin) + ", " + std::to_string(window.end) +
                    ") needs at least 2 samples inside a trace of " +
                    std::to_string(trace.size()));
}

std::size_t first_index_at(const ChannelTrace& trace, double t)
{
  if (t <= trace.t0)
    return 0;
  const double k = std::ceil((t - trace.t0) / trace.dt - 1e-9);
  return static_cast<std::size_t>(std::min(k, static_cast<double>(trace.size())));
}

// Sliding extremum over a fixed-length window using a monotonic deque.
class SlidingExtremum
{
public:
  explicit SlidingExtremum(bool maximum) : maximum_(maximum) {}

  void push(std::size_t k, double v)
  {
    while (!q_.empty() && (maximum_ ? q_.back().second <= v : q_.back().second >= v))
      q_.pop_back();
    q_.emplace_back(k, v);
  }

  void expire_before(std::size_t k)
  {
    while (!q_.empty() && q_.front().first < k)
      q_.pop_front();
  }

  double value() const { return q_.front().second; }

private:
  bool maximum_;
  std::deque<std::pair<std::size_t, double>> q_;
};

} // namespace

double s2s_rms(const ChannelTrace& trace, IndexWindow window)
{
  check_window(trace, window);
  double ss = 0.0;
  for (std::size_t k = window.begin + 1; k < window.end; ++k)
  {
    const Vec2 d = trace.samples[k] - trace.samples[k - 1];
    ss += d.x * d.x + d.y * d.y;
  }
  return std::sqrt(ss / static_cast<double>(window.size() - 1));
}

double std_precision(const ChannelTrace& trace, IndexWindow window)
{
  check_window(trace, window);
  const double n = static_cast<double>(window.size());
  Vec2 mean;
  for (std::size_t k = window.begin; k < window.end; ++k)
    mean = mean + trace.samples[k];
  mean = (1.0 / n) * mean;
  double vx = 0.0;
  double vy = 0.0;
  for (std::size_t k = window.begin; k < window.end; ++k)
  {
    const Vec2 d = trace.samples[k] - mean;
    vx += d.x * d.x;
    vy += d.y * d.y;
  }
  return std::sqrt((vx / n + vy / n) / 2.0);
}

PrecisionReport precision(const ChannelTrace& trace, IndexWindow window)
{
  return {s2s_rms(trace, window), std_precision(trace, window), window.size(), window};
}

double dispersion(const ChannelTrace& trace, IndexWindow window)
{
  check_window(trace, window);
  double xmin = trace.samples[window.begin].x;
  double xmax = xmin;
  double ymin = trace.samples[window.begin].y;
  double ymax = ymin;
  for (std::size_t k = window.begin; k < window.end; ++k)
  {
    xmin = std::min(xmin, trace.samples[k].x);
    xmax = std::max(xmax, trace.samples[k].x);
    ymin = std::min(ymin, trace.samples[k].y);
    ymax = std::max(ymax, trace.samples[k].y);
  }
  return (xmax - xmin) + (ymax - ymin);
}

IndexWindow fixation_window(const ChannelTrace& trace, double onset, double span_ms,
                            double search_end)
{
  const auto length = static_cast<std::size_t>(std::lround(span_ms / 1000.0 / trace.dt));
  if (length < 2)
    throw Error(ErrorCode::InvalidWindow, "fixation span shorter than two samples");

  const std::size_t first = first_index_at(trace, onset);
  const std::size_t limit = std::isfinite(search_end)
                                ? std::min(trace.size(), first_index_at(trace, search_end))
                                : trace.size();
  if (first + length > limit)
    throw Error(ErrorCode::InvalidWindow, "trace does not cover onset plus fixation span");

  SlidingExtremum xmax(true), xmin(false), ymax(true), ymin(false);
  IndexWindow best{first, first + length};
  double best_dispersion = std::numeric_limits<double>::infinity();
  for (std::size_t k = first; k < limit; ++k)
  {
    const Vec2 s = trace.samples[k];
    xmax.push(k, s.x);
    xmin.push(k, s.x);
    ymax.push(k, s.y);
    ymin.push(k, s.y);
    if (k + 1 < first + length)
      continue;
    const std::size_t start = k + 1 - length;
    xmax.expire_before(start);
    xmin.expire_before(start);
    ymax.expire_before(start);
    ymin.expire_before(start);
    const double d = (xmax.value() - xmin.value()) + (ymax.value() - ymin.value());
    if (d < best_dispersion)
    {
      best_dispersion = d;
      best = {start, k + 1};
    }
  }
  return best;
}

AccuracyResult accuracy(const ChannelTrace& trace, IndexWindow window, Vec2 target)
{
  if (window.end > trace.size() || window.size() == 0)
    throw Error(ErrorCode::InvalidWindow, "accuracy window is empty or outside the trace");
  const bool has_conf = trace.confidence.size() == trace.size();

  AccuracyResult out;
  Vec2 sum;
  std::size_t used = 0;
  for (std::size_t k = window.begin; k < window.end; ++k)
  {
    if (has_conf && trace.confidence[k] <= 0.0)
    {
      ++out.excluded;
      continue;
    }
    sum = sum + trace.samples[k];
    ++used;
  }
  if (used == 0)
    throw Error(ErrorCode::InvalidWindow, "every sample in the accuracy window has zero confidence");
  out.offset = target - (1.0 / static_cast<double>(used)) * sum;
  return out;
}

PursuitSegment detrend_pursuit(const ChannelTrace& trace, const StimulusRamp& stimulus,
                               const PursuitConfig& cfg)
{
  const std::size_t begin = first_index_at(trace, stimulus.t_start);
  const std::size_t end = first_index_at(trace, stimulus.t_end); // exclusive
  if (end <= begin || end - begin < 4)
    throw Error(ErrorCode::InvalidSegment, "pursuit leg shorter than 4 samples");

  const std::size_t n = end - begin;
  const std::size_t h = std::max<std::size_t>(cfg.velocity_half_window, 1);
  auto gaze_velocity = [&](std::size_t k) {
    const std::size_t lo = k >= begin + h ? k - h : begin;
    const std::size_t hi = std::min(k + h, end - 1);
    const double span = static_cast<double>(hi - lo) * trace.dt;
    return (1.0 / span) * (trace.samples[hi] - trace.samples[lo]);
  };

  const auto search =
      std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(cfg.search_fraction * n)), 1, n);
  std::vector<double> pos_err(search);
  std::vector<double> vel_err(search);
  for (std::size_t j = 0; j < search; ++j)
  {
    const std::size_t k = begin + j;
    const Vec2 dp = trace.samples[k] - stimulus.at(trace.time(k));
    const Vec2 dv = gaze_velocity(k) - stimulus.velocity;
    pos_err[j] = std::hypot(dp.x, dp.y);
    vel_err[j] = std::hypot(dv.x, dv.y);
  }

  auto standardize = [](std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v)
      mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v)
      var += (x - mean) * (x - mean);
    const double sd = std::sqrt(var / static_cast<double>(v.size()));
    for (double& x : v)
      x = sd > 0.0 ? (x - mean) / sd : 0.0;
  };
  standardize(pos_err);
  standardize(vel_err);

  std::size_t best = 0;
  for (std::size_t j = 1; j < search; ++j)
  {
    if (pos_err[j] + vel_err[j] < pos_err[best] + vel_err[best])
      best = j;
  }

  PursuitSegment out;
  out.start_index = begin + best;
  out.end_index = end - 1;
  if (out.end_index - out.start_index + 1 < 4)
    throw Error(ErrorCode::InvalidSegment, "detrended pursuit segment shorter than 4 samples",
                out.start_index);

  out.start_point = trace.samples[out.start_index];
  out.end_point = trace.samples[out.end_index];
  const double t_s = trace.time(out.start_index);
  const double duration = static_cast<double>(out.end_index - out.start_index) * trace.dt;
  out.trend_slope = (1.0 / duration) * (out.end_point - out.start_point);

  out.detrended.t0 = t_s;
  out.detrended.dt = trace.dt;
  const std::size_t m = out.end_index - out.start_index + 1;
  out.detrended.samples.resize(m);
  out.detrended.confidence.assign(m, 1.0);
  const std::size_t last = m - 1;
  for (std::size_t j = 0; j < m; ++j)
  {
    const std::size_t k = out.start_index + j;
    // Convex combination so both endpoints reproduce the gaze exactly.
    const double u = static_cast<double>(j) / static_cast<double>(last);
    const Vec2 line = (1.0 - u) * out.start_point + u * out.end_point;
    out.detrended.samples[j] = trace.samples[k] - line;
    if (trace.confidence.size() == trace.size())
      out.detrended.confidence[j] = trace.confidence[k];
  }
  return out;
}

} // namespace hybridgaze
