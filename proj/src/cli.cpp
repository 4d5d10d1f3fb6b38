#include "hybridgaze/cli.hpp"

#include "hybridgaze/calibration.hpp"
#include "hybridgaze/compensation.hpp"
#include "hybridgaze/confidence.hpp"
#include "hybridgaze/error.hpp"
#include "hybridgaze/events.hpp"
#include "hybridgaze/fusion.hpp"
#include "hybridgaze/io.hpp"
#include "hybridgaze/metrics.hpp"
#include "hybridgaze/simulator.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

namespace hybridgaze::cli
{

namespace
{

struct CommonOptions
{
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string output;
  std::string eye = "left";
};

io::RunConfig load_config(const CommonOptions& common)
{
  io::RunConfig cfg =
      common.config_path.empty() ? io::RunConfig{} : io::parse_run_config(io::read_file(common.config_path));
  if (common.seed)
  {
    cfg.sim.seed = *common.seed;
    cfg.events.seed = *common.seed;
  }
  return cfg;
}

void emit(const std::string& path, const std::string& contents)
{
  if (path.empty() || path == "-")
    std::cout << contents << std::flush;
  else
    io::write_file(path, contents);
}

void warn(const std::vector<std::string>& warnings, const std::string& source)
{
  for (const auto& w : warnings)
    std::cerr << "warning: " << source << ": " << w << '\n';
}

// Target onsets in seconds, shifted by the display delay when stimulus
// coordinates are present.
std::vector<CalibrationTarget> corrected_targets(const std::vector<io::TargetRow>& rows,
                                                 const DisplayDelayModel& delay)
{
  std::vector<CalibrationTarget> out;
  for (const auto& row : rows)
  {
    double onset_ms = row.onset_ms;
    if (row.stimulus)
      onset_ms += display_delay(row.stimulus->x, row.stimulus->y, delay);
    out.push_back({onset_ms / 1000.0, row.position});
  }
  for (std::size_t j = 1; j < out.size(); ++j)
  {
    if (!(out[j].onset > out[j - 1].onset))
      throw Error(ErrorCode::Schema, "delay-corrected target onsets are not increasing", j);
  }
  return out;
}

FusionResult fuse_eye(const std::string& path, const std::optional<CalibrationFile>& calibration,
                      const io::RunConfig& cfg)
{
  const io::EyeRecording rec = io::parse_trace(io::read_file(path));
  warn(rec.warnings, path);

  CompensatedChannels channels = compensate(rec.pupil, rec.cr, rec.iris, rec.head);
  if (calibration)
  {
    CalibratedChannels mapped = apply_calibration(channels.position, channels.velocity,
                                                  calibration->poly, calibration->velocity);
    channels.position = std::move(mapped.position);
    channels.velocity = std::move(mapped.velocity);
  }

  const auto blinks =
      classify_blinks(channels.position.confidence, channels.velocity.n_matches, cfg.confidence);
  const WeightSchedule weights = build_weight_schedule(
      channels.position.confidence, channels.velocity.n_matches, blinks, cfg.confidence);
  return fuse(channels.position, channels.velocity, weights);
}

int cmd_fuse(const CommonOptions& common, const std::string& trace,
             const std::vector<std::string>& cyclopean, const std::vector<std::string>& calibrations,
             bool uncalibrated)
{
  const io::RunConfig cfg = load_config(common);
  const bool binocular = !cyclopean.empty();
  const std::vector<std::string> traces = binocular ? cyclopean : std::vector<std::string>{trace};
  if (traces.empty() || traces.front().empty())
    throw Error(ErrorCode::Schema, "no trace file given");

  std::vector<std::optional<CalibrationFile>> cal(traces.size());
  if (!uncalibrated)
  {
    if (calibrations.size() != traces.size())
      throw Error(ErrorCode::Schema, "expected " + std::to_string(traces.size()) +
                                         " calibration file(s) or --uncalibrated");
    for (std::size_t e = 0; e < traces.size(); ++e)
      cal[e] = calibration_from_json(io::read_file(calibrations[e]));
  }

  std::vector<FusionResult> eyes;
  for (std::size_t e = 0; e < traces.size(); ++e)
    eyes.push_back(fuse_eye(traces[e], cal[e], cfg));

  FusionResult out = eyes.front();
  if (binocular)
  {
    const FusionResult& other = eyes[1];
    if (other.hybrid.size() != out.hybrid.size() ||
        std::abs(other.hybrid.t0 - out.hybrid.t0) > 0.5 * out.hybrid.dt ||
        std::abs(other.hybrid.dt - out.hybrid.dt) > 1e-9 * out.hybrid.dt)
      throw Error(ErrorCode::Dimension, "left and right traces are not on the same time grid");
    for (std::size_t k = 0; k < out.hybrid.size(); ++k)
    {
      out.hybrid.samples[k] = 0.5 * (out.hybrid.samples[k] + other.hybrid.samples[k]);
      out.variance[k] = 0.25 * (out.variance[k] + other.variance[k]);
      out.overall_confidence[k] = std::min(out.overall_confidence[k], other.overall_confidence[k]);
      out.hybrid.confidence[k] = out.overall_confidence[k];
    }
  }

  emit(common.output, io::format_gaze(out.hybrid, out.variance, uncalibrated ? "raw" : "deg",
                                      binocular ? "cyclopean" : common.eye));
  return kExitOk;
}

int cmd_calibrate(const CommonOptions& common, const std::string& trace,
                  const std::string& targets_path)
{
  const io::RunConfig cfg = load_config(common);
  const io::EyeRecording rec = io::parse_trace(io::read_file(trace));
  warn(rec.warnings, trace);
  const auto targets = corrected_targets(io::parse_targets(io::read_file(targets_path)),
                                         cfg.display_delay);

  const CompensatedChannels channels = compensate(rec.pupil, rec.cr, rec.iris, rec.head);

  std::vector<CalibrationPoint> fixations;
  for (std::size_t j = 0; j < targets.size(); ++j)
  {
    const double next = j + 1 < targets.size() ? targets[j + 1].onset
                                               : std::numeric_limits<double>::infinity();
    const IndexWindow window =
        fixation_window(channels.position, targets[j].onset, cfg.fixation_span_ms, next);
    const AccuracyResult mean = accuracy(channels.position, window, {0.0, 0.0});
    fixations.push_back({{-mean.offset.x, -mean.offset.y}, targets[j].position});
  }

  CalibrationFile out;
  out.poly = fit_poly(fixations);
  const auto displacements =
      extract_saccade_displacements(channels.velocity, targets, cfg.saccades);
  out.velocity = fit_velocity_map(displacements);
  emit(common.output, to_json(out));
  return kExitOk;
}

int cmd_metrics(const CommonOptions& common, const std::string& gaze_path,
                const std::string& targets_path, const std::string& task, std::string trace_id)
{
  const io::RunConfig cfg = load_config(common);
  const io::GazeData gaze = io::parse_gaze(io::read_file(gaze_path));
  const auto targets = corrected_targets(io::parse_targets(io::read_file(targets_path)),
                                         cfg.display_delay);
  if (trace_id.empty())
    trace_id = std::filesystem::path(gaze_path).stem().string();
  const std::string eye = gaze.eye.empty() ? common.eye : gaze.eye;

  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  if (task == "fixation")
  {
    for (std::size_t j = 0; j < targets.size(); ++j)
    {
      const double next = j + 1 < targets.size() ? targets[j + 1].onset
                                                 : std::numeric_limits<double>::infinity();
      const IndexWindow window =
          fixation_window(gaze.trace, targets[j].onset, cfg.fixation_span_ms, next);
      const PrecisionReport p = precision(gaze.trace, window);
      const AccuracyResult a = accuracy(gaze.trace, window, targets[j].position);
      rows.push_back({{"trace_id", trace_id}, {"task", task}, {"eye", eye}, {"target", j},
                      {"window_start", window.begin}, {"window_end", window.end},
                      {"s2s_rms_deg", p.s2s_rms}, {"std_deg", p.std},
                      {"acc_x_deg", a.offset.x}, {"acc_y_deg", a.offset.y},
                      {"excluded", a.excluded}});
    }
  }
  else if (task == "pursuit")
  {
    if (targets.size() < 2)
      throw Error(ErrorCode::Schema, "pursuit needs at least two ramp points");
    for (std::size_t j = 0; j + 1 < targets.size(); ++j)
    {
      const double duration = targets[j + 1].onset - targets[j].onset;
      const StimulusRamp ramp{targets[j].onset, targets[j + 1].onset, targets[j].position,
                              (1.0 / duration) * (targets[j + 1].position - targets[j].position)};
      const PursuitSegment seg = detrend_pursuit(gaze.trace, ramp, cfg.pursuit);
      const IndexWindow all{0, seg.detrended.size()};
      const PrecisionReport p = precision(seg.detrended, all);
      rows.push_back({{"trace_id", trace_id}, {"task", task}, {"eye", eye}, {"target", j},
                      {"window_start", seg.start_index}, {"window_end", seg.end_index + 1},
                      {"s2s_rms_deg", p.s2s_rms}, {"std_deg", p.std},
                      {"acc_x_deg", nullptr}, {"acc_y_deg", nullptr}, {"excluded", 0}});
    }
  }
  else
  {
    throw Error(ErrorCode::Schema, "unknown task '" + task + "' (fixation or pursuit)");
  }

  const bool json_out = std::filesystem::path(common.output).extension() == ".json";
  if (json_out)
  {
    emit(common.output, rows.dump(2) + "\n");
    return kExitOk;
  }
  std::string csv = "trace_id,task,eye,target,window_start,window_end,s2s_rms_deg,std_deg,"
                    "acc_x_deg,acc_y_deg,excluded\n";
  auto number = [](const nlohmann::ordered_json& v) {
    return v.is_null() ? std::string() : io::format_number(v.get<double>());
  };
  for (const auto& r : rows)
  {
    csv += r["trace_id"].get<std::string>() + ',' + r["task"].get<std::string>() + ',' +
           r["eye"].get<std::string>() + ',' + std::to_string(r["target"].get<std::size_t>()) +
           ',' + std::to_string(r["window_start"].get<std::size_t>()) + ',' +
           std::to_string(r["window_end"].get<std::size_t>()) + ',' + number(r["s2s_rms_deg"]) +
           ',' + number(r["std_deg"]) + ',' + number(r["acc_x_deg"]) + ',' +
           number(r["acc_y_deg"]) + ',' + std::to_string(r["excluded"].get<std::size_t>()) + '\n';
  }
  emit(common.output, csv);
  return kExitOk;
}

int cmd_detect(const CommonOptions& common, const std::string& gaze_path,
               const std::string& onsets_path, const std::string& counts_path)
{
  const io::RunConfig cfg = load_config(common);
  const io::GazeData gaze = io::parse_gaze(io::read_file(gaze_path));
  const auto targets = corrected_targets(io::parse_targets(io::read_file(onsets_path)),
                                         cfg.display_delay);

  // Horizontal component only.
  const std::vector<double> x = gaze.trace.xs();
  std::vector<double> velocity(x.size() - 1);
  for (std::size_t k = 0; k + 1 < x.size(); ++k)
    velocity[k] = x[k + 1] - x[k];

  const MicrosaccadeDetection detection =
      detect_microsaccades(velocity, gaze.trace.t0, gaze.trace.dt, cfg.events);
  emit(common.output, io::format_events(detection.events));

  std::vector<double> onsets;
  for (const auto& t : targets)
    onsets.push_back(t.onset);
  const auto counts = count_in_windows(detection.events, onsets, cfg.events);
  int detected = 0;
  for (const auto& c : counts)
    detected += c.count;
  std::cerr << "threshold " << io::format_number(detection.threshold) << " deg/s, " << detected
            << " of " << counts.size() << " windows with a microsaccade\n";

  if (!counts_path.empty())
  {
    std::string csv = "onset_ms,count,extras\n";
    for (std::size_t j = 0; j < counts.size(); ++j)
      csv += io::format_number(1000.0 * onsets[j]) + ',' + std::to_string(counts[j].count) + ',' +
             std::to_string(counts[j].extras) + '\n';
    io::write_file(counts_path, csv);
  }
  return kExitOk;
}

nlohmann::ordered_json summary_json(const SignalSummary& s)
{
  auto ms = [](const MeanStd& m) { return nlohmann::ordered_json{{"mean", m.mean}, {"std", m.std}}; };
  return {{"mse_o", ms(s.mse_o)}, {"mse_t", ms(s.mse_t)}, {"r2_o", ms(s.r2_o)}, {"r2_t", ms(s.r2_t)}};
}

std::string format_table(const SimReport& r)
{
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%-14s %18s %18s %18s\n", "", "A_noise", "B_drift", "pi_t");
  out += line;
  auto mse_row = [&](const char* name, MeanStd SignalSummary::*m) {
    std::snprintf(line, sizeof line, "%-14s %9.2f +- %-6.2f %9.2f +- %-6.2f %9.2f +- %-6.2f\n", name,
                  (r.noise.*m).mean * 1e4, (r.noise.*m).std * 1e4, (r.drift.*m).mean * 1e4,
                  (r.drift.*m).std * 1e4, (r.fused.*m).mean * 1e4, (r.fused.*m).std * 1e4);
    out += line;
  };
  auto r2_row = [&](const char* name, MeanStd SignalSummary::*m) {
    std::snprintf(line, sizeof line, "%-14s %18.4f %18.4f %18.4f\n", name, (r.noise.*m).mean,
                  (r.drift.*m).mean, (r.fused.*m).mean);
    out += line;
  };
  mse_row("MSEo (1e-4)", &SignalSummary::mse_o);
  mse_row("MSEt (1e-4)", &SignalSummary::mse_t);
  r2_row("R2o", &SignalSummary::r2_o);
  r2_row("R2t", &SignalSummary::r2_t);
  return out;
}

int cmd_simulate(const CommonOptions& common, const std::string& dump_path)
{
  const io::RunConfig cfg = load_config(common);

  std::string dump = "trial,index,original,a_noise,b_drift,pi_t\n";
  TrialSink sink;
  if (!dump_path.empty())
  {
    sink = [&](const TrialSignals& s) {
      for (std::size_t k = 0; k < s.original.size(); ++k)
        dump += std::to_string(s.trial) + ',' + std::to_string(k) + ',' +
                io::format_number(s.original[k]) + ',' + io::format_number(s.noise[k]) + ',' +
                io::format_number(s.drift[k]) + ',' + io::format_number(s.fused[k]) + '\n';
    };
  }
  const SimReport report = run_study(cfg.sim, sink);

  nlohmann::ordered_json doc;
  doc["trials"] = cfg.sim.trials;
  doc["seed"] = cfg.sim.seed;
  doc["signals"]["A_noise"] = summary_json(report.noise);
  doc["signals"]["B_drift"] = summary_json(report.drift);
  doc["signals"]["pi_t"] = summary_json(report.fused);
  doc["fused_better_mse_o"] = report.fused_better_o;
  doc["fused_better_mse_t"] = report.fused_better_t;

  if (common.output.empty() || common.output == "-")
  {
    std::cout << format_table(report) << doc.dump(2) << '\n' << std::flush;
  }
  else
  {
    std::cout << format_table(report) << std::flush;
    io::write_file(common.output, doc.dump(2) + "\n");
  }
  if (!dump_path.empty())
    io::write_file(dump_path, dump);
  return kExitOk;
}

} // namespace

int run(const std::vector<std::string>& args)
{
  CLI::App app{"Hybrid gaze fusion of pupil position and iris velocity"};
  app.require_subcommand(1);

  CommonOptions common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "JSON run configuration");
    sub->add_option("--seed", common.seed, "Override every random seed");
    sub->add_option("--output", common.output, "Output path (default stdout)");
    sub->add_option("--eye", common.eye, "Eye label")->check(CLI::IsMember({"left", "right"}));
  };

  std::string trace, targets, gaze, counts, task = "fixation", trace_id, dump;
  std::vector<std::string> cyclopean, calibrations;
  bool uncalibrated = false;

  CLI::App* fuse_cmd = app.add_subcommand("fuse", "Fuse pupil position with iris velocity");
  add_common(fuse_cmd);
  fuse_cmd->add_option("trace", trace, "Trace CSV");
  auto* cyc = fuse_cmd->add_option("--cyclopean", cyclopean, "Left and right trace CSVs")
                  ->expected(2);
  auto* cal = fuse_cmd->add_option("--calibration", calibrations,
                                   "Calibration JSON (one per eye)");
  auto* unc = fuse_cmd->add_flag("--uncalibrated", uncalibrated, "Fuse in raw units");
  unc->excludes(cal);
  (void)cyc;

  CLI::App* calibrate_cmd = app.add_subcommand("calibrate", "Fit the position and velocity maps");
  add_common(calibrate_cmd);
  calibrate_cmd->add_option("trace", trace, "Trace CSV")->required();
  calibrate_cmd->add_option("--targets", targets, "Targets CSV")->required();

  CLI::App* metrics_cmd = app.add_subcommand("metrics", "Accuracy and precision per target");
  add_common(metrics_cmd);
  metrics_cmd->add_option("gaze", gaze, "Gaze CSV from fuse")->required();
  metrics_cmd->add_option("--targets", targets, "Targets CSV")->required();
  metrics_cmd->add_option("--task", task, "fixation or pursuit")
      ->check(CLI::IsMember({"fixation", "pursuit"}));
  metrics_cmd->add_option("--trace-id", trace_id, "Row label (default file stem)");

  CLI::App* detect_cmd = app.add_subcommand("detect", "Microsaccade detection");
  add_common(detect_cmd);
  detect_cmd->add_option("gaze", gaze, "Gaze CSV from fuse")->required();
  detect_cmd->add_option("--onsets", targets, "Targets CSV with onset_ms")->required();
  detect_cmd->add_option("--counts", counts, "Per-onset window counts CSV");

  CLI::App* simulate_cmd = app.add_subcommand("simulate", "Monte-Carlo simulation study");
  add_common(simulate_cmd);
  simulate_cmd->add_option("--dump-trials", dump, "Per-trial signals CSV");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try
  {
    app.parse(reversed);
  }
  catch (const CLI::ParseError& e)
  {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try
  {
    if (fuse_cmd->parsed())
      return cmd_fuse(common, trace, cyclopean, calibrations, uncalibrated);
    if (calibrate_cmd->parsed())
      return cmd_calibrate(common, trace, targets);
    if (metrics_cmd->parsed())
      return cmd_metrics(common, gaze, targets, task, trace_id);
    if (detect_cmd->parsed())
      return cmd_detect(common, gaze, targets, counts);
    if (simulate_cmd->parsed())
      return cmd_simulate(common, dump);
  }
  catch (const Error& e)
  {
    std::cerr << "error: " << e.what() << '\n';
    return e.numerical() ? kExitNumerical : kExitInput;
  }
  return kExitInput;
}

int run(int argc, char** argv)
{
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i)
    args.emplace_back(argv[i]);
  return run(args);
}

} // namespace hybridgaze::cli
