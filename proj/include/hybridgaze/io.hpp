#pragma once

#include "hybridgaze/calibration.hpp"
#include "hybridgaze/confidence.hpp"
#include "hybridgaze/events.hpp"
#include "hybridgaze/metrics.hpp"
#include "hybridgaze/simulator.hpp"
#include "hybridgaze/trace.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hybridgaze::io
{

/// Nine significant digits; NaN becomes an empty cell.
std::string format_number(double value);

/// Empty cells parse as NaN. Throws Error(Schema) on anything non-numeric.
double parse_number(std::string_view cell, std::size_t line);

std::vector<std::string_view> split(std::string_view line, char separator);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

/// One eye's recording on a uniform time grid.
struct EyeRecording
{
  ChannelTrace pupil; ///< confidence = pupil confidence, 0 where CR or pupil is missing
  ChannelTrace cr;
  VelocityTrace iris;
  VelocityTrace head;
  std::vector<std::string> warnings;
};

/// Parses a trace CSV (see README for the column layout) and resamples it onto
/// a uniform grid by nearest sample. Throws Error(Schema) with the offending
/// line number.
EyeRecording parse_trace(const std::string& text);

struct GazeData
{
  ChannelTrace trace; ///< confidence column
  std::vector<double> variance;
  std::string units;
  std::string eye;
};

std::string format_gaze(const ChannelTrace& hybrid, const std::vector<double>& variance,
                        const std::string& units, const std::string& eye);
GazeData parse_gaze(const std::string& text);

struct TargetRow
{
  double onset_ms = 0.0;
  Vec2 position;
  std::optional<Vec2> stimulus; ///< display coordinates for the delay model
};

/// Columns onset_ms, x_deg, y_deg and optionally stim_x, stim_y.
std::vector<TargetRow> parse_targets(const std::string& text);

std::string format_events(const std::vector<EventRecord>& events);

/// All module settings with their defaults.
struct RunConfig
{
  ConfidenceConfig confidence;
  EventConfig events;
  SimConfig sim;
  SaccadeExtractionConfig saccades;
  DisplayDelayModel display_delay;
  double fixation_span_ms = kFixationSpanMs;
  PursuitConfig pursuit;
};

/// Strict JSON loader: unknown keys and out-of-range values raise Error(Schema).
RunConfig parse_run_config(const std::string& text);
std::string format_run_config(const RunConfig& config);

} // namespace hybridgaze::io
