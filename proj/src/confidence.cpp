#include "hybridgaze/confidence.hpp"

#include "hybridgaze/error.hpp"

#include <algorithm>
#include <cmath>

namespace hybridgaze
{

void ConfidenceConfig::validate() const
{
  if (min_matches < 1)
    throw Error(ErrorCode::Schema, "min_matches must be >= 1");
  if (!(conf_threshold >= 0.0 && conf_threshold <= 1.0))
    throw Error(ErrorCode::Schema, "conf_threshold must lie in [0, 1]");
  if (!(beta_cap > 0.0 && beta_cap <= 1.0))
    throw Error(ErrorCode::Schema, "beta_cap must lie in (0, 1]");
  if (decay_span < 0)
    throw Error(ErrorCode::Schema, "decay_span must be >= 0");
  if (!(floor > 0.0))
    throw Error(ErrorCode::Schema, "weight_floor must be positive");
}

double iris_weight(int n_matches, const ConfidenceConfig& cfg)
{
  const double n = std::max(n_matches, 0);
  return std::min(cfg.beta_cap, cfg.beta_cap * n / cfg.min_matches);
}

std::vector<double> apply_linear_decay(std::span<const double> raw, const ConfidenceConfig& cfg)
{
  std::vector<double> out(raw.begin(), raw.end());
  if (cfg.decay_span <= 0)
    return out;

  const auto n = static_cast<std::ptrdiff_t>(raw.size());
  const auto span = static_cast<std::ptrdiff_t>(cfg.decay_span);
  for (std::ptrdiff_t j = 0; j < n; ++j)
  {
    const double low = raw[j];
    if (!(low < cfg.beta_cap))
      continue;
    for (std::ptrdiff_t d = 1; d < span; ++d)
    {
      const double ramp = low + (cfg.beta_cap - low) * static_cast<double>(d) / span;
      if (j - d >= 0)
        out[j - d] = std::min(out[j - d], ramp);
      if (j + d < n)
        out[j + d] = std::min(out[j + d], ramp);
    }
  }
  return out;
}

std::vector<BlinkRecord> classify_blinks(std::span<const double> pupil_conf,
                                         std::span<const int> n_matches,
                                         const ConfidenceConfig& cfg)
{
  const std::size_t n = pupil_conf.size();
  if (n == 0)
    return {};
  if (n_matches.size() + 1 != n)
    throw Error(ErrorCode::Dimension, "match counts must have one entry per sample pair");

  auto low = [&](std::size_t k) { return pupil_conf[k] < cfg.conf_threshold; };

  std::vector<BlinkRecord> blinks;
  for (std::size_t k = 0; k < n; ++k)
  {
    if (!low(k))
      continue;

    const bool has_prev = k > 0;
    const bool has_next = k + 1 < n;
    const bool prev_low = has_prev && low(k - 1);
    const bool next_low = has_next && low(k + 1);

    bool complete = true;
    if (prev_low || next_low)
    {
      if (prev_low && n_matches[k - 1] > 0)
        complete = false;
      if (next_low && n_matches[k] > 0)
        complete = false;
    }
    else
    {
      if (has_prev && n_matches[k - 1] > 0)
        complete = false;
      if (has_next && n_matches[k] > 0)
        complete = false;
    }

    const BlinkKind kind = complete ? BlinkKind::Complete : BlinkKind::Partial;
    if (!blinks.empty() && blinks.back().end + 1 == k && blinks.back().kind == kind)
      blinks.back().end = k;
    else
      blinks.push_back({k, k, kind});
  }
  return blinks;
}

WeightSchedule build_weight_schedule(std::span<const double> pupil_conf,
                                     std::span<const int> n_matches,
                                     std::span<const BlinkRecord> blinks,
                                     const ConfidenceConfig& cfg)
{
  cfg.validate();
  const std::size_t n = pupil_conf.size();
  if (n < 2 || n_matches.size() + 1 != n)
    throw Error(ErrorCode::Dimension, "weight schedule needs n samples and n-1 match counts");

  std::vector<double> raw(n - 1);
  for (std::size_t j = 0; j + 1 < n; ++j)
    raw[j] = iris_weight(n_matches[j], cfg);

  WeightSchedule w;
  w.floor = cfg.floor;
  w.beta_i = apply_linear_decay(raw, cfg);

  std::vector<bool> in_complete(n, false);
  for (const BlinkRecord& b : blinks)
  {
    if (b.start > b.end || b.end >= n)
      throw Error(ErrorCode::Dimension, "blink interval outside trace", b.start);
    if (b.kind != BlinkKind::Complete)
      continue;
    for (std::size_t k = b.start; k <= b.end; ++k)
      in_complete[k] = true;
    for (std::size_t j = b.start; j < b.end; ++j)
      w.beta_i[j] = 0.0;
  }

  w.beta_p.resize(n);
  w.confidence.resize(n);
  for (std::size_t k = 0; k < n; ++k)
  {
    double sum = 0.0;
    int count = 0;
    if (k > 0)
    {
      sum += w.beta_i[k - 1];
      ++count;
    }
    if (k + 1 < n)
    {
      sum += w.beta_i[k];
      ++count;
    }
    const double mean_i = sum / count;

    if (in_complete[k])
    {
      w.beta_p[k] = cfg.floor;
      w.confidence[k] = 0.0;
    }
    else
    {
      w.beta_p[k] = std::max(1.0 - mean_i, cfg.floor);
      w.confidence[k] = std::clamp(w.beta_p[k] + mean_i, 0.0, 1.0);
    }
  }
  return w;
}

} // namespace hybridgaze
