#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace hybridgaze
{

struct EventConfig
{
  double tv_lambda = 0.05;        ///< regularization, in units of the per-frame velocity
  double window_start_ms = 100.0; ///< counting window after each target onset
  double window_end_ms = 500.0;
  double max_amplitude = 0.5;     ///< degrees; at or above this an event is a saccade
  int gmm_components = 2;
  std::uint64_t seed = 0;         ///< k-means++ seeding of the mixture fit
  double em_tolerance = 1e-8;     ///< log-likelihood change that ends EM
  int em_max_iterations = 500;

  /// Throws Error(Schema) on out-of-range fields.
  void validate() const;
};

enum class EventKind
{
  Microsaccade,
  Saccade,
};

struct EventRecord
{
  std::size_t onset = 0;  ///< first velocity sample above threshold
  std::size_t offset = 0; ///< last velocity sample above threshold (inclusive)
  double onset_time = 0.0;
  double offset_time = 0.0;
  double peak_velocity = 0.0; ///< deg/s
  double amplitude = 0.0;     ///< deg
  EventKind kind = EventKind::Microsaccade;
};

/// Exact minimizer of 0.5 * |u - v|^2 + lambda * sum |u[k+1] - u[k]| (direct
/// taut-string method, linear time in practice).
std::vector<double> tv_denoise(std::span<const double> signal, double lambda);

struct MixtureFit
{
  double mean[2] = {0.0, 0.0}; ///< ascending
  double sigma[2] = {0.0, 0.0};
  double weight[2] = {0.0, 0.0};
  double log_likelihood = 0.0;
  int iterations = 0;
  double threshold = 0.0;
  bool crossing = false; ///< false when the mean + 3 sigma fallback was used
};

/// Two-component 1D Gaussian mixture by EM with k-means++ initialization.
/// Throws Error(DegenerateDistribution) for fewer than 50 samples or constant input.
MixtureFit fit_speed_mixture(std::span<const double> speeds, const EventConfig& cfg = {});

/// Speed where the weighted component densities cross between the two means.
double adaptive_threshold(std::span<const double> speeds, const EventConfig& cfg = {});

/// Velocity-threshold identification on signed velocity (deg/s). Each maximal
/// run with |v| > threshold is one event.
std::vector<EventRecord> ivt_detect(std::span<const double> velocity, double t0, double dt,
                                    double threshold, const EventConfig& cfg = {});

struct WindowCount
{
  int count = 0;  ///< 1 when a microsaccade starts inside the window
  int extras = 0; ///< further microsaccades in the same window
};

/// Microsaccade onsets inside [onset + window_start, onset + window_end] per
/// target onset (seconds).
std::vector<WindowCount> count_in_windows(std::span<const EventRecord> events,
                                          std::span<const double> onsets,
                                          const EventConfig& cfg = {});

struct MicrosaccadeDetection
{
  std::vector<double> denoised; ///< per-frame velocity
  double threshold = 0.0;       ///< deg/s
  std::vector<EventRecord> events;
};

/// Denoise a per-frame horizontal velocity, fit the adaptive threshold on the
/// denoised speed in deg/s and run I-VT.
MicrosaccadeDetection detect_microsaccades(std::span<const double> velocity_per_frame, double t0,
                                           double dt, const EventConfig& cfg = {});

} // namespace hybridgaze
