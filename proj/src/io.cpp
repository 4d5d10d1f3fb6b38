#include "hybridgaze/io.hpp"

#include "hybridgaze/compensation.hpp"
#include "hybridgaze/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <map>
#include <sstream>

namespace hybridgaze::io
{

namespace
{

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct CsvTable
{
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers; ///< 1-based source line of each row
  std::vector<std::string> comments;
};

std::string_view trim(std::string_view s)
{
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

CsvTable parse_csv(const std::string& text)
{
  CsvTable table;
  std::size_t line_number = 0;
  std::size_t pos = 0;
  bool have_header = false;
  while (pos <= text.size())
  {
    const std::size_t next = text.find('\n', pos);
    const std::string_view line =
        trim(std::string_view(text).substr(pos, next == std::string::npos ? std::string::npos
                                                                          : next - pos));
    ++line_number;
    pos = next == std::string::npos ? text.size() + 1 : next + 1;
    if (line.empty())
      continue;
    if (line.front() == '#')
    {
      table.comments.emplace_back(line.substr(1));
      continue;
    }
    std::vector<std::string> cells;
    for (auto cell : split(line, ','))
      cells.emplace_back(trim(cell));
    if (!have_header)
    {
      table.header = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != table.header.size())
      throw Error(ErrorCode::Schema,
                  "line " + std::to_string(line_number) + ": expected " +
                      std::to_string(table.header.size()) + " fields, found " +
                      std::to_string(cells.size()),
                  line_number);
    table.rows.push_back(std::move(cells));
    table.line_numbers.push_back(line_number);
  }
  if (!have_header)
    throw Error(ErrorCode::Schema, "input is empty", 1);
  return table;
}

std::map<std::string, std::size_t> column_index(const CsvTable& table,
                                                std::initializer_list<const char*> required)
{
  std::map<std::string, std::size_t> index;
  for (std::size_t c = 0; c < table.header.size(); ++c)
    index[table.header[c]] = c;
  for (const char* name : required)
  {
    if (!index.contains(name))
      throw Error(ErrorCode::Schema, std::string("missing column '") + name + "'", 1);
  }
  return index;
}

// Linear interpolation over NaN gaps; ends hold the nearest valid value.
void fill_gaps(std::vector<double>& v)
{
  std::size_t first_valid = v.size();
  for (std::size_t k = 0; k < v.size(); ++k)
  {
    if (!std::isnan(v[k]))
    {
      first_valid = k;
      break;
    }
  }
  if (first_valid == v.size())
  {
    std::fill(v.begin(), v.end(), 0.0);
    return;
  }
  for (std::size_t k = 0; k < first_valid; ++k)
    v[k] = v[first_valid];
  std::size_t last = first_valid;
  for (std::size_t k = first_valid + 1; k < v.size(); ++k)
  {
    if (std::isnan(v[k]))
      continue;
    for (std::size_t j = last + 1; j < k; ++j)
    {
      const double u = static_cast<double>(j - last) / static_cast<double>(k - last);
      v[j] = (1.0 - u) * v[last] + u * v[k];
    }
    last = k;
  }
  for (std::size_t k = last + 1; k < v.size(); ++k)
    v[k] = v[last];
}

std::vector<Glint> parse_glints(std::string_view cell, std::size_t line)
{
  std::vector<Glint> glints;
  if (cell.empty())
    return glints;
  for (auto item : split(cell, ';'))
  {
    item = trim(item);
    if (item.empty())
      continue;
    const auto parts = split(item, ':');
    if (parts.size() < 2 || parts.size() > 3)
      throw Error(ErrorCode::Schema,
                  "line " + std::to_string(line) + ": glint must be x:y or x:y:valid", line);
    Glint g;
    g.center = {parse_number(parts[0], line), parse_number(parts[1], line)};
    if (std::isnan(g.center.x) || std::isnan(g.center.y))
      throw Error(ErrorCode::Schema, "line " + std::to_string(line) + ": empty glint coordinate",
                  line);
    if (parts.size() == 3)
      g.valid = parse_number(parts[2], line) != 0.0;
    glints.push_back(g);
  }
  return glints;
}

} // namespace

std::string format_number(double value)
{
  if (std::isnan(value))
    return {};
  if (value == 0.0)
    return "0";
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.9g", value);
  return buffer;
}

double parse_number(std::string_view cell, std::size_t line)
{
  cell = trim(cell);
  if (cell.empty())
    return kNaN;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(value))
    throw Error(ErrorCode::Schema,
                "line " + std::to_string(line) + ": '" + std::string(cell) + "' is not a number",
                line);
  return value;
}

std::vector<std::string_view> split(std::string_view line, char separator)
{
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;)
  {
    const std::size_t next = line.find(separator, start);
    if (next == std::string_view::npos)
    {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, next - start));
    start = next + 1;
  }
}

std::string read_file(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, const std::string& contents)
{
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw Error(ErrorCode::Io, "cannot write '" + path + "'");
  out << contents;
  if (!out)
    throw Error(ErrorCode::Io, "write to '" + path + "' failed");
}

EyeRecording parse_trace(const std::string& text)
{
  const CsvTable table = parse_csv(text);
  auto col = column_index(table, {"timestamp_ms", "pupil_x", "pupil_y", "pupil_conf", "cr_x",
                                  "cr_y", "iris_vx", "iris_vy", "n_matches", "head_vx",
                                  "head_vy"});
  const bool has_glints = col.contains("glints");
  const std::size_t rows = table.rows.size();
  if (rows < 2)
    throw Error(ErrorCode::Schema, "trace has fewer than 2 samples",
                rows == 0 ? 1 : table.line_numbers[0]);

  std::vector<double> t(rows), px(rows), py(rows), pconf(rows), crx(rows), cry(rows);
  std::vector<double> ivx(rows), ivy(rows), hvx(rows), hvy(rows);
  std::vector<int> matches(rows);
  std::vector<bool> cr_valid(rows, false);
  bool any_cr = false;

  EyeRecording rec;
  for (std::size_t r = 0; r < rows; ++r)
  {
    const auto& cells = table.rows[r];
    const std::size_t line = table.line_numbers[r];
    auto num = [&](const char* name) { return parse_number(cells[col.at(name)], line); };

    t[r] = num("timestamp_ms");
    if (std::isnan(t[r]))
      throw Error(ErrorCode::Schema, "line " + std::to_string(line) + ": missing timestamp", line);
    if (r > 0 && !(t[r] > t[r - 1]))
      throw Error(ErrorCode::Schema,
                  "line " + std::to_string(line) + ": timestamps must strictly increase", line);

    px[r] = num("pupil_x");
    py[r] = num("pupil_y");
    const double conf = num("pupil_conf");
    if (!std::isnan(conf) && !(conf >= 0.0 && conf <= 1.0))
      throw Error(ErrorCode::Schema,
                  "line " + std::to_string(line) + ": pupil_conf outside [0, 1]", line);
    const bool pupil_missing = std::isnan(px[r]) || std::isnan(py[r]);
    pconf[r] = pupil_missing ? 0.0 : (std::isnan(conf) ? 1.0 : conf);
    if (pupil_missing)
      px[r] = py[r] = kNaN;

    crx[r] = num("cr_x");
    cry[r] = num("cr_y");
    if (std::isnan(crx[r]) || std::isnan(cry[r]))
    {
      crx[r] = cry[r] = kNaN;
      if (has_glints)
      {
        const auto glints = parse_glints(cells[col.at("glints")], line);
        if (!glints.empty())
        {
          try
          {
            const CrEstimate cr = combine_glints(glints);
            crx[r] = cr.center.x;
            cry[r] = cr.center.y;
          }
          catch (const Error& e)
          {
            if (e.code() != ErrorCode::MissingCr)
              throw;
          }
        }
      }
    }
    cr_valid[r] = !std::isnan(crx[r]);
    any_cr = any_cr || cr_valid[r];

    ivx[r] = num("iris_vx");
    ivy[r] = num("iris_vy");
    const double m = num("n_matches");
    if (!std::isnan(m) && m < 0.0)
      throw Error(ErrorCode::Schema, "line " + std::to_string(line) + ": negative n_matches", line);
    const bool iris_missing = std::isnan(ivx[r]) || std::isnan(ivy[r]);
    matches[r] = iris_missing || std::isnan(m) ? 0 : static_cast<int>(std::lround(m));
    if (iris_missing)
      ivx[r] = ivy[r] = 0.0;

    hvx[r] = num("head_vx");
    hvy[r] = num("head_vy");
    if (std::isnan(hvx[r]) || std::isnan(hvy[r]))
      hvx[r] = hvy[r] = 0.0;
  }

  if (!any_cr)
  {
    rec.warnings.emplace_back("no corneal reflection recorded; position is not compensated");
    std::fill(crx.begin(), crx.end(), 0.0);
    std::fill(cry.begin(), cry.end(), 0.0);
    std::fill(cr_valid.begin(), cr_valid.end(), true);
  }
  for (std::size_t r = 0; r < rows; ++r)
  {
    if (!cr_valid[r])
      pconf[r] = 0.0;
  }
  fill_gaps(px);
  fill_gaps(py);
  fill_gaps(crx);
  fill_gaps(cry);

  // Uniform grid at the median interval, nearest source row per grid point.
  std::vector<double> diffs(rows - 1);
  for (std::size_t r = 0; r + 1 < rows; ++r)
    diffs[r] = t[r + 1] - t[r];
  std::vector<double> sorted = diffs;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2),
                   sorted.end());
  const double dt_ms = sorted[sorted.size() / 2];
  for (std::size_t r = 0; r + 1 < rows; ++r)
  {
    if (diffs[r] > 2.0 * dt_ms)
      rec.warnings.push_back("gap of " + format_number(diffs[r]) + " ms before line " +
                             std::to_string(table.line_numbers[r + 1]));
  }

  const auto grid = static_cast<std::size_t>(std::floor((t.back() - t.front()) / dt_ms + 0.5)) + 1;
  std::vector<std::size_t> source(grid);
  std::size_t r = 0;
  for (std::size_t j = 0; j < grid; ++j)
  {
    const double tj = t.front() + static_cast<double>(j) * dt_ms;
    while (r + 1 < rows && std::abs(t[r + 1] - tj) < std::abs(t[r] - tj))
      ++r;
    source[j] = r;
  }

  const double t0 = t.front() / 1000.0;
  const double dt = dt_ms / 1000.0;
  rec.pupil.t0 = rec.cr.t0 = rec.iris.t0 = rec.head.t0 = t0;
  rec.pupil.dt = rec.cr.dt = rec.iris.dt = rec.head.dt = dt;
  for (std::size_t j = 0; j < grid; ++j)
  {
    const std::size_t s = source[j];
    rec.pupil.samples.push_back({px[s], py[s]});
    rec.pupil.confidence.push_back(pconf[s]);
    rec.cr.samples.push_back({crx[s], cry[s]});
    rec.cr.confidence.push_back(1.0);
    if (j > 0)
    {
      // Velocity cells describe the motion from the previous frame into this one.
      rec.iris.edges.push_back({ivx[s], ivy[s]});
      rec.iris.n_matches.push_back(matches[s]);
      rec.head.edges.push_back({hvx[s], hvy[s]});
      rec.head.n_matches.push_back(matches[s]);
    }
  }
  return rec;
}

std::string format_gaze(const ChannelTrace& hybrid, const std::vector<double>& variance,
                        const std::string& units, const std::string& eye)
{
  std::string out = "# hybridgaze units=" + units + " eye=" + eye + "\n";
  out += "timestamp_ms,x,y,variance,confidence\n";
  for (std::size_t k = 0; k < hybrid.size(); ++k)
  {
    out += format_number(1000.0 * hybrid.time(k));
    out += ',';
    out += format_number(hybrid.samples[k].x);
    out += ',';
    out += format_number(hybrid.samples[k].y);
    out += ',';
    out += format_number(k < variance.size() ? variance[k] : kNaN);
    out += ',';
    out += format_number(k < hybrid.confidence.size() ? hybrid.confidence[k] : 1.0);
    out += '\n';
  }
  return out;
}

GazeData parse_gaze(const std::string& text)
{
  const CsvTable table = parse_csv(text);
  auto col = column_index(table, {"timestamp_ms", "x", "y"});
  const std::size_t rows = table.rows.size();
  if (rows < 2)
    throw Error(ErrorCode::Schema, "gaze file has fewer than 2 samples",
                rows == 0 ? 1 : table.line_numbers[0]);

  GazeData out;
  for (const auto& comment : table.comments)
  {
    std::istringstream words(comment);
    std::string word;
    while (words >> word)
    {
      if (word.rfind("units=", 0) == 0)
        out.units = word.substr(6);
      else if (word.rfind("eye=", 0) == 0)
        out.eye = word.substr(4);
    }
  }

  std::vector<double> t(rows);
  for (std::size_t r = 0; r < rows; ++r)
  {
    const auto& cells = table.rows[r];
    const std::size_t line = table.line_numbers[r];
    t[r] = parse_number(cells[col.at("timestamp_ms")], line);
    if (std::isnan(t[r]) || (r > 0 && !(t[r] > t[r - 1])))
      throw Error(ErrorCode::Schema,
                  "line " + std::to_string(line) + ": timestamps must strictly increase", line);
    const double x = parse_number(cells[col.at("x")], line);
    const double y = parse_number(cells[col.at("y")], line);
    if (std::isnan(x) || std::isnan(y))
      throw Error(ErrorCode::Schema, "line " + std::to_string(line) + ": missing gaze value", line);
    out.trace.samples.push_back({x, y});
    double conf = 1.0;
    if (col.contains("confidence"))
    {
      const double c = parse_number(cells[col.at("confidence")], line);
      conf = std::isnan(c) ? 1.0 : c;
    }
    out.trace.confidence.push_back(std::clamp(conf, 0.0, 1.0));
    if (col.contains("variance"))
      out.variance.push_back(parse_number(cells[col.at("variance")], line));
  }
  out.trace.t0 = t.front() / 1000.0;
  out.trace.dt = (t.back() - t.front()) / 1000.0 / static_cast<double>(rows - 1);
  return out;
}

std::vector<TargetRow> parse_targets(const std::string& text)
{
  const CsvTable table = parse_csv(text);
  auto col = column_index(table, {"onset_ms", "x_deg", "y_deg"});
  const bool has_stim = col.contains("stim_x") && col.contains("stim_y");
  if (table.rows.empty())
    throw Error(ErrorCode::Schema, "targets file lists no targets", 1);

  std::vector<TargetRow> out;
  for (std::size_t r = 0; r < table.rows.size(); ++r)
  {
    const auto& cells = table.rows[r];
    const std::size_t line = table.line_numbers[r];
    TargetRow row;
    row.onset_ms = parse_number(cells[col.at("onset_ms")], line);
    row.position = {parse_number(cells[col.at("x_deg")], line),
                    parse_number(cells[col.at("y_deg")], line)};
    if (std::isnan(row.onset_ms) || std::isnan(row.position.x) || std::isnan(row.position.y))
      throw Error(ErrorCode::Schema, "line " + std::to_string(line) + ": incomplete target", line);
    if (!out.empty() && !(row.onset_ms > out.back().onset_ms))
      throw Error(ErrorCode::Schema,
                  "line " + std::to_string(line) + ": target onsets must strictly increase", line);
    if (has_stim)
    {
      const Vec2 s{parse_number(cells[col.at("stim_x")], line),
                   parse_number(cells[col.at("stim_y")], line)};
      if (!std::isnan(s.x) && !std::isnan(s.y))
        row.stimulus = s;
    }
    out.push_back(row);
  }
  return out;
}

std::string format_events(const std::vector<EventRecord>& events)
{
  std::string out = "onset_ms,offset_ms,peak_vel_dps,amplitude_deg,kind\n";
  for (const auto& e : events)
  {
    out += format_number(1000.0 * e.onset_time) + ',' + format_number(1000.0 * e.offset_time) +
           ',' + format_number(e.peak_velocity) + ',' + format_number(e.amplitude) + ',' +
           (e.kind == EventKind::Microsaccade ? "microsaccade" : "saccade") + '\n';
  }
  return out;
}

namespace
{

using nlohmann::json;

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where)
{
  if (!obj.is_object())
    throw Error(ErrorCode::Schema, "config section '" + where + "' must be an object");
  for (const auto& [key, value] : obj.items())
  {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* a) { return key == a; });
    if (!known)
      throw Error(ErrorCode::Schema, "unknown config key '" + where + "." + key + "'");
  }
}

template <class T>
void read(const json& obj, const char* key, T& field, const std::string& where)
{
  if (!obj.contains(key))
    return;
  try
  {
    field = obj.at(key).get<T>();
  }
  catch (const json::exception&)
  {
    throw Error(ErrorCode::Schema, "config key '" + where + "." + key + "' has the wrong type");
  }
}

} // namespace

RunConfig parse_run_config(const std::string& text)
{
  json doc;
  try
  {
    doc = json::parse(text);
  }
  catch (const json::exception& e)
  {
    throw Error(ErrorCode::Schema, std::string("config is not valid JSON: ") + e.what());
  }

  RunConfig cfg;
  check_keys(doc, {"confidence", "events", "sim", "calibration", "metrics"}, "config");

  if (doc.contains("confidence"))
  {
    const json& c = doc["confidence"];
    check_keys(c, {"min_matches", "conf_threshold", "beta_cap", "decay_span", "weight_floor"},
               "confidence");
    read(c, "min_matches", cfg.confidence.min_matches, "confidence");
    read(c, "conf_threshold", cfg.confidence.conf_threshold, "confidence");
    read(c, "beta_cap", cfg.confidence.beta_cap, "confidence");
    read(c, "decay_span", cfg.confidence.decay_span, "confidence");
    read(c, "weight_floor", cfg.confidence.floor, "confidence");
  }
  if (doc.contains("events"))
  {
    const json& e = doc["events"];
    check_keys(e, {"tv_lambda", "window_start_ms", "window_end_ms", "max_amplitude_deg",
                   "gmm_components", "seed", "em_tolerance", "em_max_iterations"},
               "events");
    read(e, "tv_lambda", cfg.events.tv_lambda, "events");
    read(e, "window_start_ms", cfg.events.window_start_ms, "events");
    read(e, "window_end_ms", cfg.events.window_end_ms, "events");
    read(e, "max_amplitude_deg", cfg.events.max_amplitude, "events");
    read(e, "gmm_components", cfg.events.gmm_components, "events");
    read(e, "seed", cfg.events.seed, "events");
    read(e, "em_tolerance", cfg.events.em_tolerance, "events");
    read(e, "em_max_iterations", cfg.events.em_max_iterations, "events");
  }
  if (doc.contains("sim"))
  {
    const json& s = doc["sim"];
    check_keys(s, {"fs", "square_hz", "square_amplitude", "square_seconds", "sine_hz",
                   "sine_amplitude", "sine_seconds", "sigma_pos", "sigma_vel", "trials", "seed",
                   "beta_p", "beta_i"},
               "sim");
    read(s, "fs", cfg.sim.fs, "sim");
    read(s, "square_hz", cfg.sim.square_hz, "sim");
    read(s, "square_amplitude", cfg.sim.square_amplitude, "sim");
    read(s, "square_seconds", cfg.sim.square_seconds, "sim");
    read(s, "sine_hz", cfg.sim.sine_hz, "sim");
    read(s, "sine_amplitude", cfg.sim.sine_amplitude, "sim");
    read(s, "sine_seconds", cfg.sim.sine_seconds, "sim");
    read(s, "sigma_pos", cfg.sim.sigma_pos, "sim");
    read(s, "sigma_vel", cfg.sim.sigma_vel, "sim");
    read(s, "trials", cfg.sim.trials, "sim");
    read(s, "seed", cfg.sim.seed, "sim");
    read(s, "beta_p", cfg.sim.beta_p, "sim");
    read(s, "beta_i", cfg.sim.beta_i, "sim");
  }
  if (doc.contains("calibration"))
  {
    const json& c = doc["calibration"];
    check_keys(c, {"saccade_pad_ms", "landing_fraction", "display_delay"}, "calibration");
    double pad_ms = cfg.saccades.pad * 1000.0;
    read(c, "saccade_pad_ms", pad_ms, "calibration");
    cfg.saccades.pad = pad_ms / 1000.0;
    read(c, "landing_fraction", cfg.saccades.landing_fraction, "calibration");
    if (c.contains("display_delay"))
    {
      const json& d = c["display_delay"];
      check_keys(d, {"per_x", "per_y", "offset"}, "calibration.display_delay");
      read(d, "per_x", cfg.display_delay.per_x, "calibration.display_delay");
      read(d, "per_y", cfg.display_delay.per_y, "calibration.display_delay");
      read(d, "offset", cfg.display_delay.offset, "calibration.display_delay");
    }
    if (!(cfg.saccades.pad >= 0.0) || !(cfg.saccades.landing_fraction > 0.0 &&
                                        cfg.saccades.landing_fraction < 1.0))
      throw Error(ErrorCode::Schema, "calibration saccade settings out of range");
  }
  if (doc.contains("metrics"))
  {
    const json& m = doc["metrics"];
    check_keys(m, {"fixation_span_ms", "pursuit_search_fraction", "pursuit_velocity_half_window"},
               "metrics");
    read(m, "fixation_span_ms", cfg.fixation_span_ms, "metrics");
    read(m, "pursuit_search_fraction", cfg.pursuit.search_fraction, "metrics");
    read(m, "pursuit_velocity_half_window", cfg.pursuit.velocity_half_window, "metrics");
    if (!(cfg.fixation_span_ms > 0.0) ||
        !(cfg.pursuit.search_fraction > 0.0 && cfg.pursuit.search_fraction <= 1.0))
      throw Error(ErrorCode::Schema, "metrics settings out of range");
  }

  cfg.confidence.validate();
  cfg.events.validate();
  cfg.sim.validate();
  return cfg;
}

std::string format_run_config(const RunConfig& cfg)
{
  nlohmann::ordered_json doc;
  doc["confidence"] = {{"min_matches", cfg.confidence.min_matches},
                       {"conf_threshold", cfg.confidence.conf_threshold},
                       {"beta_cap", cfg.confidence.beta_cap},
                       {"decay_span", cfg.confidence.decay_span},
                       {"weight_floor", cfg.confidence.floor}};
  doc["events"] = {{"tv_lambda", cfg.events.tv_lambda},
                   {"window_start_ms", cfg.events.window_start_ms},
                   {"window_end_ms", cfg.events.window_end_ms},
                   {"max_amplitude_deg", cfg.events.max_amplitude},
                   {"gmm_components", cfg.events.gmm_components},
                   {"seed", cfg.events.seed},
                   {"em_tolerance", cfg.events.em_tolerance},
                   {"em_max_iterations", cfg.events.em_max_iterations}};
  doc["sim"] = {{"fs", cfg.sim.fs},
                {"square_hz", cfg.sim.square_hz},
                {"square_amplitude", cfg.sim.square_amplitude},
                {"square_seconds", cfg.sim.square_seconds},
                {"sine_hz", cfg.sim.sine_hz},
                {"sine_amplitude", cfg.sim.sine_amplitude},
                {"sine_seconds", cfg.sim.sine_seconds},
                {"sigma_pos", cfg.sim.sigma_pos},
                {"sigma_vel", cfg.sim.sigma_vel},
                {"trials", cfg.sim.trials},
                {"seed", cfg.sim.seed},
                {"beta_p", cfg.sim.beta_p},
                {"beta_i", cfg.sim.beta_i}};
  doc["calibration"] = {{"saccade_pad_ms", cfg.saccades.pad * 1000.0},
                        {"landing_fraction", cfg.saccades.landing_fraction},
                        {"display_delay",
                         {{"per_x", cfg.display_delay.per_x},
                          {"per_y", cfg.display_delay.per_y},
                          {"offset", cfg.display_delay.offset}}}};
  doc["metrics"] = {{"fixation_span_ms", cfg.fixation_span_ms},
                    {"pursuit_search_fraction", cfg.pursuit.search_fraction},
                    {"pursuit_velocity_half_window", cfg.pursuit.velocity_half_window}};
  return doc.dump(2) + "\n";
}

} // namespace hybridgaze::io
