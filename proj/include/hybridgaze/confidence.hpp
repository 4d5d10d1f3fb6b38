#pragma once

#include "hybridgaze/fusion.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace hybridgaze
{

struct ConfidenceConfig
{
  int min_matches = 50;
  double conf_threshold = 0.3;
  double beta_cap = 0.9;
  int decay_span = 2;
  double floor = kDefaultWeightFloor;

  /// Throws Error(Schema) on out-of-range fields.
  void validate() const;
};

enum class BlinkKind
{
  Partial,
  Complete,
};

/// Inclusive sample interval.
struct BlinkRecord
{
  std::size_t start = 0;
  std::size_t end = 0;
  BlinkKind kind = BlinkKind::Partial;

  friend bool operator==(const BlinkRecord&, const BlinkRecord&) = default;
};

/// min(cap, cap * n / min_matches).
double iris_weight(int n_matches, const ConfidenceConfig& cfg);

/// Every edge below the cap pulls its neighbours within `decay_span` edges onto
/// a linear ramp back up to the cap. Result is the pointwise minimum of the
/// input and all ramps.
std::vector<double> apply_linear_decay(std::span<const double> raw, const ConfidenceConfig& cfg);

/// A sample is blinked when its pupil confidence is below threshold. It is a
/// complete blink when the iris has no matches on its adjacent edges: the edges
/// shared with other blinked samples when it has blinked neighbours, otherwise
/// both adjacent edges. Runs of equal kind merge into one record.
std::vector<BlinkRecord> classify_blinks(std::span<const double> pupil_conf,
                                         std::span<const int> n_matches,
                                         const ConfidenceConfig& cfg);

/// Weights that sum to one (beta_p plus the mean of adjacent beta_i) outside
/// complete blinks. Inside a complete blink beta_p sits at the floor, interior
/// edges carry no velocity weight and the reported confidence is 0.
WeightSchedule build_weight_schedule(std::span<const double> pupil_conf,
                                     std::span<const int> n_matches,
                                     std::span<const BlinkRecord> blinks,
                                     const ConfidenceConfig& cfg);

} // namespace hybridgaze
