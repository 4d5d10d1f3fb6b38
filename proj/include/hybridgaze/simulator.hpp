#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

namespace hybridgaze
{

/// Square wave followed by a sine, observed through a noisy position channel
/// and a noisy velocity channel.
struct SimConfig
{
  double fs = 250.0;
  double square_hz = 2.0;
  double square_amplitude = 3.0;
  double square_seconds = 2.0;
  double sine_hz = 1.0;
  double sine_amplitude = 2.0;
  double sine_seconds = 2.0;
  double sigma_pos = 0.03;
  double sigma_vel = 0.01;
  int trials = 100;
  std::uint64_t seed = 0;
  /// Fusion weights; non-positive means 1 / sigma^2 of the generating noise.
  double beta_p = 0.0;
  double beta_i = 0.0;

  /// Throws Error(Schema) on non-positive fields.
  void validate() const;
  double effective_beta_p() const;
  double effective_beta_i() const;
};

/// Noise-free reference: square wave starting in its high phase, then the sine.
std::vector<double> make_original(const SimConfig& cfg);

struct SimTrial
{
  std::vector<double> position;  ///< original + N(0, sigma_pos^2)
  std::vector<double> velocity;  ///< diff(original) + N(0, sigma_vel^2), one per edge
};

SimTrial make_trial(std::span<const double> original, const SimConfig& cfg, std::mt19937_64& rng);

/// Per-trial generator derived from the study seed and trial index.
std::mt19937_64 trial_rng(std::uint64_t seed, int trial);

struct ErrorMetrics
{
  double mse_o = 0.0; ///< signal domain
  double mse_t = 0.0; ///< gradient domain
  double r2_o = 0.0;
  double r2_t = 0.0;
};

/// MSE and R^2 = 1 - SS_res / SS_tot of `estimate` and of its adjacent
/// differences against the original.
ErrorMetrics score(std::span<const double> estimate, std::span<const double> original);

struct MeanStd
{
  double mean = 0.0;
  double std = 0.0; ///< sample standard deviation over trials
};

struct SignalSummary
{
  MeanStd mse_o;
  MeanStd mse_t;
  MeanStd r2_o;
  MeanStd r2_t;
};

struct TrialOutcome
{
  ErrorMetrics noise;  ///< position channel alone
  ErrorMetrics drift;  ///< integrated velocity channel
  ErrorMetrics fused;
};

struct SimReport
{
  SignalSummary noise;
  SignalSummary drift;
  SignalSummary fused;
  std::vector<TrialOutcome> trials;
  /// Trials where the fused signal beat the position channel on MSEo and the
  /// velocity channel on MSEt.
  int fused_better_o = 0;
  int fused_better_t = 0;
};

struct TrialSignals
{
  int trial = 0;
  const std::vector<double>& original;
  const std::vector<double>& noise;
  const std::vector<double>& drift;
  const std::vector<double>& fused;
};

using TrialSink = std::function<void(const TrialSignals&)>;

/// Monte-Carlo study. `sink`, when set, receives every trial's signals in order.
SimReport run_study(const SimConfig& cfg, const TrialSink& sink = {});

} // namespace hybridgaze
