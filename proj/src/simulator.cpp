#include "hybridgaze/simulator.hpp"

#include "hybridgaze/error.hpp"
#include "hybridgaze/fusion.hpp"

#include <cmath>
#include <numbers>

namespace hybridgaze
{

void SimConfig::validate() const
{
  if (!(fs > 0.0) || !(square_hz > 0.0) || !(square_amplitude > 0.0) ||
      !(square_seconds > 0.0) || !(sine_hz > 0.0) || !(sine_amplitude > 0.0) ||
      !(sine_seconds > 0.0))
    throw Error(ErrorCode::Schema, "simulation signal parameters must be positive");
  if (!(sigma_pos >= 0.0) || !(sigma_vel >= 0.0))
    throw Error(ErrorCode::Schema, "simulation noise levels must be non-negative");
  if (trials < 1)
    throw Error(ErrorCode::Schema, "simulation needs at least one trial");
  if (!(effective_beta_p() > 0.0) || !(effective_beta_i() > 0.0) ||
      !std::isfinite(effective_beta_p()) || !std::isfinite(effective_beta_i()))
    throw Error(ErrorCode::Schema,
                "fusion weights must be positive; set beta_p/beta_i when a noise level is zero");
}

double SimConfig::effective_beta_p() const
{
  return beta_p > 0.0 ? beta_p : 1.0 / (sigma_pos * sigma_pos);
}

double SimConfig::effective_beta_i() const
{
  return beta_i > 0.0 ? beta_i : 1.0 / (sigma_vel * sigma_vel);
}

std::vector<double> make_original(const SimConfig& cfg)
{
  const auto n_square = static_cast<std::size_t>(std::lround(cfg.square_seconds * cfg.fs));
  const auto n_sine = static_cast<std::size_t>(std::lround(cfg.sine_seconds * cfg.fs));
  std::vector<double> out;
  out.reserve(n_square + n_sine);
  for (std::size_t k = 0; k < n_square; ++k)
  {
    const double cycles = static_cast<double>(k) * cfg.square_hz / cfg.fs;
    const double phase = cycles - std::floor(cycles);
    out.push_back(phase < 0.5 ? cfg.square_amplitude : -cfg.square_amplitude);
  }
  for (std::size_t k = 0; k < n_sine; ++k)
  {
    const double t = static_cast<double>(k) / cfg.fs;
    out.push_back(cfg.sine_amplitude * std::sin(2.0 * std::numbers::pi * cfg.sine_hz * t));
  }
  return out;
}

std::mt19937_64 trial_rng(std::uint64_t seed, int trial)
{
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial)};
  return std::mt19937_64(seq);
}

SimTrial make_trial(std::span<const double> original, const SimConfig& cfg, std::mt19937_64& rng)
{
  std::normal_distribution<double> unit(0.0, 1.0);
  SimTrial trial;
  trial.position.resize(original.size());
  for (std::size_t k = 0; k < original.size(); ++k)
    trial.position[k] = original[k] + cfg.sigma_pos * unit(rng);
  if (original.size() > 1)
  {
    trial.velocity.resize(original.size() - 1);
    for (std::size_t k = 0; k + 1 < original.size(); ++k)
      trial.velocity[k] = (original[k + 1] - original[k]) + cfg.sigma_vel * unit(rng);
  }
  return trial;
}

ErrorMetrics score(std::span<const double> estimate, std::span<const double> original)
{
  if (estimate.size() != original.size() || original.size() < 3)
    throw Error(ErrorCode::Dimension, "scored signals must match and have at least 3 samples");

  auto mse_r2 = [](auto value, auto reference, std::size_t n, double& mse, double& r2) {
    double mean = 0.0;
    for (std::size_t k = 0; k < n; ++k)
      mean += reference(k);
    mean /= static_cast<double>(n);
    double ss_res = 0.0;
    double ss_tot = 0.0;
    for (std::size_t k = 0; k < n; ++k)
    {
      const double e = value(k) - reference(k);
      const double d = reference(k) - mean;
      ss_res += e * e;
      ss_tot += d * d;
    }
    mse = ss_res / static_cast<double>(n);
    r2 = 1.0 - ss_res / ss_tot;
  };

  ErrorMetrics m;
  mse_r2([&](std::size_t k) { return estimate[k]; }, [&](std::size_t k) { return original[k]; },
         original.size(), m.mse_o, m.r2_o);
  mse_r2([&](std::size_t k) { return estimate[k + 1] - estimate[k]; },
         [&](std::size_t k) { return original[k + 1] - original[k]; }, original.size() - 1, m.mse_t,
         m.r2_t);
  return m;
}

namespace
{

SignalSummary summarize(const std::vector<TrialOutcome>& trials, ErrorMetrics TrialOutcome::*field)
{
  auto stats = [&](double ErrorMetrics::*metric) {
    MeanStd out;
    const double n = static_cast<double>(trials.size());
    for (const auto& t : trials)
      out.mean += (t.*field).*metric;
    out.mean /= n;
    if (trials.size() > 1)
    {
      double ss = 0.0;
      for (const auto& t : trials)
      {
        const double d = (t.*field).*metric - out.mean;
        ss += d * d;
      }
      out.std = std::sqrt(ss / (n - 1.0));
    }
    return out;
  };
  return {stats(&ErrorMetrics::mse_o), stats(&ErrorMetrics::mse_t), stats(&ErrorMetrics::r2_o),
          stats(&ErrorMetrics::r2_t)};
}

} // namespace

SimReport run_study(const SimConfig& cfg, const TrialSink& sink)
{
  cfg.validate();
  const std::vector<double> original = make_original(cfg);
  const std::size_t n = original.size();
  const double dt = 1.0 / cfg.fs;
  const WeightSchedule weights =
      WeightSchedule::constant(n, cfg.effective_beta_p(), cfg.effective_beta_i());

  SimReport report;
  report.trials.reserve(static_cast<std::size_t>(cfg.trials));
  for (int trial = 0; trial < cfg.trials; ++trial)
  {
    std::mt19937_64 rng = trial_rng(cfg.seed, trial);
    const SimTrial signals = make_trial(original, cfg, rng);

    std::vector<double> drift(n);
    drift[0] = original[0];
    for (std::size_t k = 1; k < n; ++k)
      drift[k] = drift[k - 1] + signals.velocity[k - 1];

    std::vector<Vec2> position(n);
    for (std::size_t k = 0; k < n; ++k)
      position[k] = {signals.position[k], 0.0};
    std::vector<Vec2> velocity(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k)
      velocity[k] = {signals.velocity[k], 0.0};

    const FusionResult result =
        fuse(ChannelTrace::from_samples(0.0, dt, std::move(position)),
             VelocityTrace::from_edges(0.0, dt, std::move(velocity)), weights);
    const std::vector<double> fused = result.hybrid.xs();

    TrialOutcome outcome{score(signals.position, original), score(drift, original),
                         score(fused, original)};
    if (outcome.fused.mse_o < outcome.noise.mse_o)
      ++report.fused_better_o;
    if (outcome.fused.mse_t < outcome.drift.mse_t)
      ++report.fused_better_t;
    report.trials.push_back(outcome);

    if (sink)
      sink(TrialSignals{trial, original, signals.position, drift, fused});
  }

  report.noise = summarize(report.trials, &TrialOutcome::noise);
  report.drift = summarize(report.trials, &TrialOutcome::drift);
  report.fused = summarize(report.trials, &TrialOutcome::fused);
  return report;
}

} // namespace hybridgaze
