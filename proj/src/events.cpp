#include "hybridgaze/events.hpp"

#include "hybridgaze/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

namespace hybridgaze
{

void EventConfig::validate() const
{
  if (!(tv_lambda > 0.0))
    throw Error(ErrorCode::Schema, "tv_lambda must be positive");
  if (!(window_start_ms < window_end_ms))
    throw Error(ErrorCode::Schema, "event window start must precede its end");
  if (!(max_amplitude > 0.0))
    throw Error(ErrorCode::Schema, "max_amplitude must be positive");
  if (gmm_components != 2)
    throw Error(ErrorCode::Schema, "only two-component mixtures are supported");
  if (!(em_tolerance > 0.0) || em_max_iterations < 1)
    throw Error(ErrorCode::Schema, "EM tolerance and iteration limit must be positive");
}

std::vector<double> tv_denoise(std::span<const double> input, double lambda)
{
  const auto width = static_cast<std::ptrdiff_t>(input.size());
  std::vector<double> output(input.size());
  if (width == 0)
    return output;

  // The minimizer is the constant mean exactly when every partial sum of the
  // centered signal fits inside [-lambda, lambda]. Checking this first avoids
  // the cancellation the tube bookkeeping suffers when lambda dwarfs the data.
  double mean = 0.0;
  for (double v : input)
    mean += v;
  mean /= static_cast<double>(width);
  double partial = 0.0;
  bool flat = true;
  for (std::ptrdiff_t j = 0; j + 1 < width && flat; ++j)
  {
    partial += input[j] - mean;
    flat = std::abs(partial) <= lambda;
  }
  if (flat)
  {
    std::fill(output.begin(), output.end(), mean);
    return output;
  }

  // Condat's direct algorithm: extend the current segment while a constant value
  // inside the tube [vmin, vmax] stays feasible; emit it when the tube breaks.
  std::ptrdiff_t k = 0, k0 = 0, kplus = 0, kminus = 0;
  double umin = lambda, umax = -lambda;
  double vmin = input[0] - lambda, vmax = input[0] + lambda;
  const double twolambda = 2.0 * lambda;
  const double minlambda = -lambda;

  for (;;)
  {
    while (k == width - 1)
    {
      if (umin < 0.0)
      {
        do
          output[k0++] = vmin;
        while (k0 <= kminus);
        k = kminus = k0;
        vmin = input[k];
        umin = lambda;
        umax = vmin + umin - vmax;
      }
      else if (umax > 0.0)
      {
        do
          output[k0++] = vmax;
        while (k0 <= kplus);
        k = kplus = k0;
        vmax = input[k];
        umax = minlambda;
        umin = vmax + umax - vmin;
      }
      else
      {
        vmin += umin / static_cast<double>(k - k0 + 1);
        do
          output[k0++] = vmin;
        while (k0 <= k);
        return output;
      }
    }

    umin += input[k + 1] - vmin;
    if (umin < minlambda)
    {
      do
        output[k0++] = vmin;
      while (k0 <= kminus);
      k = kplus = kminus = k0;
      vmin = input[k];
      vmax = vmin + twolambda;
      umin = lambda;
      umax = minlambda;
      continue;
    }
    umax += input[k + 1] - vmax;
    if (umax > lambda)
    {
      do
        output[k0++] = vmax;
      while (k0 <= kplus);
      k = kplus = kminus = k0;
      vmax = input[k];
      vmin = vmax - twolambda;
      umin = lambda;
      umax = minlambda;
      continue;
    }
    ++k;
    if (umin >= lambda)
    {
      kminus = k;
      vmin += (umin - lambda) / static_cast<double>(kminus - k0 + 1);
      umin = lambda;
    }
    if (umax <= minlambda)
    {
      kplus = k;
      vmax += (umax + lambda) / static_cast<double>(kplus - k0 + 1);
      umax = minlambda;
    }
  }
}

namespace
{

double log_normal_pdf(double x, double mean, double sigma)
{
  const double z = (x - mean) / sigma;
  return -0.5 * z * z - std::log(sigma) - 0.5 * std::log(2.0 * std::numbers::pi);
}

double log_sum_exp(double a, double b)
{
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// Root of w1 N(x; m1, s1) = w2 N(x; m2, s2) strictly between m1 < m2, if any.
bool density_crossing(const MixtureFit& fit, double& root)
{
  const double m1 = fit.mean[0], m2 = fit.mean[1];
  const double s1 = fit.sigma[0], s2 = fit.sigma[1];
  const double a = 0.5 / (s2 * s2) - 0.5 / (s1 * s1);
  const double b = m1 / (s1 * s1) - m2 / (s2 * s2);
  const double c = -0.5 * m1 * m1 / (s1 * s1) + 0.5 * m2 * m2 / (s2 * s2) +
                   std::log(fit.weight[0] / s1) - std::log(fit.weight[1] / s2);

  double roots[2];
  int count = 0;
  if (std::abs(a) <= 1e-14 * (std::abs(b) * std::max(std::abs(m1), std::abs(m2)) + std::abs(c)))
  {
    if (b != 0.0)
      roots[count++] = -c / b;
  }
  else
  {
    const double disc = b * b - 4.0 * a * c;
    if (disc >= 0.0)
    {
      const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
      if (q != 0.0)
      {
        roots[count++] = q / a;
        roots[count++] = c / q;
      }
      else
      {
        roots[count++] = 0.0;
      }
    }
  }

  bool found = false;
  for (int i = 0; i < count; ++i)
  {
    if (roots[i] > m1 && roots[i] < m2 && (!found || roots[i] < root))
    {
      root = roots[i];
      found = true;
    }
  }
  return found;
}

} // namespace

MixtureFit fit_speed_mixture(std::span<const double> speeds, const EventConfig& cfg)
{
  cfg.validate();
  const std::size_t n = speeds.size();
  if (n < 50)
    throw Error(ErrorCode::DegenerateDistribution,
                "mixture fit needs at least 50 samples, got " + std::to_string(n));
  const auto [lo_it, hi_it] = std::minmax_element(speeds.begin(), speeds.end());
  if (!(*hi_it > *lo_it))
    throw Error(ErrorCode::DegenerateDistribution, "speed distribution is constant");

  double mean_all = 0.0;
  for (double s : speeds)
    mean_all += s;
  mean_all /= static_cast<double>(n);
  double var_all = 0.0;
  for (double s : speeds)
    var_all += (s - mean_all) * (s - mean_all);
  var_all /= static_cast<double>(n);
  const double var_floor = 1e-12 * var_all;

  // k-means++ seeding.
  std::mt19937_64 rng(cfg.seed);
  double centers[2];
  centers[0] = speeds[std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)];
  {
    std::vector<double> d2(n);
    double total = 0.0;
    for (std::size_t k = 0; k < n; ++k)
    {
      d2[k] = (speeds[k] - centers[0]) * (speeds[k] - centers[0]);
      total += d2[k];
    }
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng) * total;
    double acc = 0.0;
    std::size_t pick = n - 1;
    for (std::size_t k = 0; k < n; ++k)
    {
      acc += d2[k];
      if (acc > u && d2[k] > 0.0)
      {
        pick = k;
        break;
      }
    }
    centers[1] = speeds[pick];
    if (centers[1] == centers[0])
      centers[1] = centers[0] == *lo_it ? *hi_it : *lo_it;
  }
  if (centers[0] > centers[1])
    std::swap(centers[0], centers[1]);

  // Hard assignment to the nearest center gives the starting components.
  MixtureFit fit;
  {
    double sum[2] = {0, 0}, sum2[2] = {0, 0};
    double count[2] = {0, 0};
    for (double s : speeds)
    {
      const int c = std::abs(s - centers[0]) <= std::abs(s - centers[1]) ? 0 : 1;
      sum[c] += s;
      sum2[c] += s * s;
      count[c] += 1.0;
    }
    for (int c = 0; c < 2; ++c)
    {
      fit.weight[c] = count[c] / static_cast<double>(n);
      fit.mean[c] = sum[c] / count[c];
      fit.sigma[c] = std::sqrt(std::max(sum2[c] / count[c] - fit.mean[c] * fit.mean[c], var_floor));
    }
  }

  std::vector<double> resp(n);
  double previous = -std::numeric_limits<double>::infinity();
  for (int it = 1; it <= cfg.em_max_iterations; ++it)
  {
    // E step.
    double ll = 0.0;
    for (std::size_t k = 0; k < n; ++k)
    {
      const double a = std::log(fit.weight[0]) + log_normal_pdf(speeds[k], fit.mean[0], fit.sigma[0]);
      const double b = std::log(fit.weight[1]) + log_normal_pdf(speeds[k], fit.mean[1], fit.sigma[1]);
      const double total = log_sum_exp(a, b);
      resp[k] = std::exp(b - total);
      ll += total;
    }
    fit.log_likelihood = ll;
    fit.iterations = it;
    if (std::abs(ll - previous) < cfg.em_tolerance)
      break;
    previous = ll;

    // M step.
    double nk[2] = {0, 0}, sum[2] = {0, 0};
    for (std::size_t k = 0; k < n; ++k)
    {
      nk[1] += resp[k];
      nk[0] += 1.0 - resp[k];
      sum[1] += resp[k] * speeds[k];
      sum[0] += (1.0 - resp[k]) * speeds[k];
    }
    if (!(nk[0] > 0.0) || !(nk[1] > 0.0))
      break;
    for (int c = 0; c < 2; ++c)
      fit.mean[c] = sum[c] / nk[c];
    double ss[2] = {0, 0};
    for (std::size_t k = 0; k < n; ++k)
    {
      const double d0 = speeds[k] - fit.mean[0];
      const double d1 = speeds[k] - fit.mean[1];
      ss[0] += (1.0 - resp[k]) * d0 * d0;
      ss[1] += resp[k] * d1 * d1;
    }
    for (int c = 0; c < 2; ++c)
    {
      fit.sigma[c] = std::sqrt(std::max(ss[c] / nk[c], var_floor));
      fit.weight[c] = nk[c] / static_cast<double>(n);
    }
  }

  if (fit.mean[0] > fit.mean[1])
  {
    std::swap(fit.mean[0], fit.mean[1]);
    std::swap(fit.sigma[0], fit.sigma[1]);
    std::swap(fit.weight[0], fit.weight[1]);
  }

  double root = 0.0;
  fit.crossing = density_crossing(fit, root);
  fit.threshold = fit.crossing ? root : fit.mean[0] + 3.0 * fit.sigma[0];
  return fit;
}

double adaptive_threshold(std::span<const double> speeds, const EventConfig& cfg)
{
  return fit_speed_mixture(speeds, cfg).threshold;
}

std::vector<EventRecord> ivt_detect(std::span<const double> velocity, double t0, double dt,
                                    double threshold, const EventConfig& cfg)
{
  if (!(threshold > 0.0))
    throw Error(ErrorCode::Schema, "I-VT threshold must be positive");

  std::vector<EventRecord> events;
  std::size_t k = 0;
  while (k < velocity.size())
  {
    if (!(std::abs(velocity[k]) > threshold))
    {
      ++k;
      continue;
    }
    EventRecord e;
    e.onset = k;
    double displacement = 0.0;
    while (k < velocity.size() && std::abs(velocity[k]) > threshold)
    {
      e.peak_velocity = std::max(e.peak_velocity, std::abs(velocity[k]));
      displacement += velocity[k] * dt;
      ++k;
    }
    e.offset = k - 1;
    e.onset_time = t0 + static_cast<double>(e.onset) * dt;
    e.offset_time = t0 + static_cast<double>(e.offset) * dt;
    e.amplitude = std::abs(displacement);
    e.kind = e.amplitude < cfg.max_amplitude ? EventKind::Microsaccade : EventKind::Saccade;
    events.push_back(e);
  }
  return events;
}

std::vector<WindowCount> count_in_windows(std::span<const EventRecord> events,
                                          std::span<const double> onsets, const EventConfig& cfg)
{
  std::vector<WindowCount> out(onsets.size());
  for (std::size_t j = 0; j < onsets.size(); ++j)
  {
    const double lo = onsets[j] + cfg.window_start_ms / 1000.0;
    const double hi = onsets[j] + cfg.window_end_ms / 1000.0;
    int found = 0;
    for (const EventRecord& e : events)
    {
      // Small slack absorbs rounding of onset + offset.
      if (e.kind == EventKind::Microsaccade && e.onset_time >= lo - 1e-9 &&
          e.onset_time <= hi + 1e-9)
        ++found;
    }
    out[j].count = found > 0 ? 1 : 0;
    out[j].extras = found > 0 ? found - 1 : 0;
  }
  return out;
}

MicrosaccadeDetection detect_microsaccades(std::span<const double> velocity_per_frame, double t0,
                                           double dt, const EventConfig& cfg)
{
  cfg.validate();
  MicrosaccadeDetection out;
  out.denoised = tv_denoise(velocity_per_frame, cfg.tv_lambda);

  std::vector<double> velocity_dps(out.denoised.size());
  std::vector<double> speeds(out.denoised.size());
  for (std::size_t k = 0; k < out.denoised.size(); ++k)
  {
    velocity_dps[k] = out.denoised[k] / dt;
    speeds[k] = std::abs(velocity_dps[k]);
  }
  out.threshold = adaptive_threshold(speeds, cfg);
  out.events = ivt_detect(velocity_dps, t0, dt, out.threshold, cfg);
  return out;
}

} // namespace hybridgaze
