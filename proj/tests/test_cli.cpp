#include "hybridgaze/cli.hpp"
#include "hybridgaze/io.hpp"

#include "support/random.hpp"

#include <doctest.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <unistd.h>

using namespace hybridgaze;
namespace fs = std::filesystem;

namespace
{

const std::string kData = HYBRIDGAZE_TEST_DATA;

struct TempDir
{
  fs::path path;
  TempDir()
  {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("hybridgaze_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

// Runs the CLI with stdout and stderr captured.
struct Run
{
  int code = -1;
  std::string out;
  std::string err;
};

Run run_cli(const std::vector<std::string>& args)
{
  std::ostringstream out, err;
  auto* old_out = std::cout.rdbuf(out.rdbuf());
  auto* old_err = std::cerr.rdbuf(err.rdbuf());
  Run r;
  r.code = cli::run(args);
  std::cout.rdbuf(old_out);
  std::cerr.rdbuf(old_err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string gaze_file(const std::vector<Vec2>& samples, double dt = 0.004)
{
  const auto trace = ChannelTrace::from_samples(0.0, dt, samples);
  return io::format_gaze(trace, std::vector<double>(samples.size(), 1e-4), "deg", "left");
}

std::vector<std::string> split_lines(const std::string& s)
{
  std::vector<std::string> lines;
  std::istringstream in(s);
  for (std::string line; std::getline(in, line);)
    lines.push_back(line);
  return lines;
}

} // namespace

TEST_CASE("fuse golden fixture")
{
  TempDir tmp;
  const auto r = run_cli({"fuse", kData + "/golden_trace.csv", "--uncalibrated", "--output", tmp.file("out.csv")});
  REQUIRE(r.code == cli::kExitOk);
  CHECK(io::read_file(tmp.file("out.csv")) == io::read_file(kData + "/golden_fuse.csv"));
}

TEST_CASE("fuse input contract")
{
  TempDir tmp;
  CHECK(run_cli({"fuse", kData + "/empty_trace.csv", "--uncalibrated"}).code == cli::kExitInput);
  CHECK(run_cli({"fuse", tmp.file("missing.csv"), "--uncalibrated"}).code == cli::kExitInput);
  // Neither a calibration nor --uncalibrated.
  CHECK(run_cli({"fuse", kData + "/golden_trace.csv"}).code == cli::kExitInput);

  const auto raw = run_cli({"fuse", kData + "/golden_trace.csv", "--uncalibrated"});
  REQUIRE(raw.code == cli::kExitOk);
  CHECK(raw.out.rfind("# hybridgaze units=raw eye=left\n", 0) == 0);

  io::write_file(tmp.file("identity.json"), to_json(CalibrationFile{}));
  const auto deg = run_cli({"fuse", kData + "/golden_trace.csv", "--calibration", tmp.file("identity.json"),
                            "--eye", "right"});
  REQUIRE(deg.code == cli::kExitOk);
  CHECK(deg.out.rfind("# hybridgaze units=deg eye=right\n", 0) == 0);
  // Identity calibration leaves the numbers alone.
  CHECK(deg.out.substr(deg.out.find('\n')) == raw.out.substr(raw.out.find('\n')));

  const auto cyc = run_cli({"fuse", "--cyclopean", kData + "/golden_trace.csv", kData + "/golden_trace.csv",
                            "--uncalibrated"});
  REQUIRE(cyc.code == cli::kExitOk);
  CHECK(cyc.out.rfind("# hybridgaze units=raw eye=cyclopean\n", 0) == 0);
  const auto a = io::parse_gaze(raw.out), b = io::parse_gaze(cyc.out);
  for (std::size_t k = 0; k < a.trace.size(); ++k)
  {
    CHECK(b.trace.samples[k].x == doctest::Approx(a.trace.samples[k].x).epsilon(1e-8));
    CHECK(b.variance[k] == doctest::Approx(0.5 * a.variance[k]).epsilon(1e-8));
  }

  CHECK(run_cli({"fuse", kData + "/golden_trace.csv", "--uncalibrated", "--eye", "middle"}).code == cli::kExitInput);
  io::write_file(tmp.file("bad.json"), R"({"confidence":{"nope":1}})");
  CHECK(run_cli({"fuse", kData + "/golden_trace.csv", "--uncalibrated", "--config", tmp.file("bad.json")}).code ==
        cli::kExitInput);
}

TEST_CASE("metrics fixtures")
{
  TempDir tmp;
  const std::size_t n = 500;
  io::write_file(tmp.file("targets.csv"), "onset_ms,x_deg,y_deg\n0,1,-1\n1000,0,0\n");

  SUBCASE("gaze on target")
  {
    io::write_file(tmp.file("still.csv"), gaze_file(std::vector<Vec2>(n, {1, -1})));
    const auto r = run_cli({"metrics", tmp.file("still.csv"), "--targets", tmp.file("targets.csv")});
    REQUIRE(r.code == cli::kExitOk);
    const auto lines = split_lines(r.out);
    REQUIRE(lines.size() == 3);
    CHECK(lines[0] == "trace_id,task,eye,target,window_start,window_end,s2s_rms_deg,std_deg,acc_x_deg,acc_y_deg,excluded");
    CHECK(lines[1] == "still,fixation,left,0,0,113,0,0,0,0,0");
  }
  SUBCASE("alternating gaze")
  {
    std::vector<Vec2> s(n);
    for (std::size_t k = 0; k < n; ++k)
      s[k] = {k % 2 == 0 ? 0.0 : 1.0, 0.0};
    io::write_file(tmp.file("alt.csv"), gaze_file(s));
    const auto r = run_cli({"metrics", tmp.file("alt.csv"), "--targets", tmp.file("targets.csv"), "--output",
                            tmp.file("report.json")});
    REQUIRE(r.code == cli::kExitOk);
    const auto doc = nlohmann::json::parse(io::read_file(tmp.file("report.json")));
    REQUIRE(doc.size() == 2);
    CHECK(doc[0]["s2s_rms_deg"].get<double>() == doctest::Approx(1.0));
    // 113 samples: 57 zeros and 56 ones.
    const double p = 56.0 / 113.0;
    CHECK(doc[0]["std_deg"].get<double>() == doctest::Approx(std::sqrt(p * (1 - p) / 2)));
    CHECK(doc[0]["acc_x_deg"].get<double>() == doctest::Approx(1.0 - p));
    CHECK(doc[0]["acc_y_deg"].get<double>() == doctest::Approx(-1.0));
  }
  SUBCASE("noisy gaze matches a direct evaluation")
  {
    testing_support::Rng rng(3);
    std::vector<Vec2> s(n);
    for (auto& p : s)
      p = {rng.normal(0.1), rng.normal(0.1)};
    io::write_file(tmp.file("noisy.csv"), gaze_file(s));
    const auto r = run_cli({"metrics", tmp.file("noisy.csv"), "--targets", tmp.file("targets.csv"), "--output",
                            tmp.file("report.json"), "--trace-id", "n1"});
    REQUIRE(r.code == cli::kExitOk);
    const auto doc = nlohmann::json::parse(io::read_file(tmp.file("report.json")));
    CHECK(doc[1]["trace_id"] == "n1");
    const auto b = doc[1]["window_start"].get<std::size_t>();
    const auto e = doc[1]["window_end"].get<std::size_t>();
    REQUIRE(e - b == 113);
    // Gaze values went through the 9-digit file format.
    const auto g = io::parse_gaze(io::read_file(tmp.file("noisy.csv")));
    double sq = 0.0, mx = 0.0, my = 0.0;
    for (std::size_t k = b; k < e; ++k)
    {
      mx += g.trace.samples[k].x;
      my += g.trace.samples[k].y;
      if (k > b)
      {
        const double dx = g.trace.samples[k].x - g.trace.samples[k - 1].x;
        const double dy = g.trace.samples[k].y - g.trace.samples[k - 1].y;
        sq += dx * dx + dy * dy;
      }
    }
    CHECK(doc[1]["s2s_rms_deg"].get<double>() == doctest::Approx(std::sqrt(sq / 112.0)).epsilon(1e-12));
    CHECK(doc[1]["acc_x_deg"].get<double>() == doctest::Approx(0.0 - mx / 113.0).epsilon(1e-12));
    CHECK(doc[1]["acc_y_deg"].get<double>() == doctest::Approx(0.0 - my / 113.0).epsilon(1e-12));
  }
  SUBCASE("missing or empty targets")
  {
    io::write_file(tmp.file("still.csv"), gaze_file(std::vector<Vec2>(n, {1, -1})));
    CHECK(run_cli({"metrics", tmp.file("still.csv"), "--targets", tmp.file("none.csv")}).code == cli::kExitInput);
    io::write_file(tmp.file("empty.csv"), "onset_ms,x_deg,y_deg\n");
    CHECK(run_cli({"metrics", tmp.file("still.csv"), "--targets", tmp.file("empty.csv")}).code == cli::kExitInput);
    CHECK(run_cli({"metrics", tmp.file("still.csv")}).code == cli::kExitInput);
  }
  SUBCASE("pursuit")
  {
    std::vector<Vec2> s(n);
    for (std::size_t k = 0; k < n; ++k)
      s[k] = {-5.0 + 5.0 * 0.004 * static_cast<double>(k), 0.0};
    io::write_file(tmp.file("ramp.csv"), gaze_file(s));
    io::write_file(tmp.file("ramp_targets.csv"), "onset_ms,x_deg,y_deg\n0,-5,0\n1000,0,0\n");
    const auto r = run_cli({"metrics", tmp.file("ramp.csv"), "--targets", tmp.file("ramp_targets.csv"), "--task",
                            "pursuit"});
    REQUIRE(r.code == cli::kExitOk);
    const auto lines = split_lines(r.out);
    REQUIRE(lines.size() == 2);
    // Gaze on the ramp: nothing left after detrending, no accuracy columns.
    std::vector<std::string> cells;
    std::istringstream row(lines[1]);
    for (std::string cell; std::getline(row, cell, ',');)
      cells.push_back(cell);
    REQUIRE(cells.size() == 11);
    CHECK(std::stod(cells[6]) < 1e-12);
    CHECK(std::stod(cells[7]) < 1e-12);
    CHECK(cells[8].empty());
    CHECK(cells[9].empty());
  }
}

TEST_CASE("calibrate")
{
  TempDir tmp;
  const double dt_ms = 4.0;
  // Nine targets, one per second; raw pupil = 2 * deg + 5, iris moves a quarter
  // of the raw pupil displacement.
  std::vector<Vec2> targets;
  for (int i = -1; i <= 1; ++i)
    for (int j = -1; j <= 1; ++j)
      targets.push_back({10.0 * j, 8.0 * i});
  std::string tcsv = "onset_ms,x_deg,y_deg\n";
  for (std::size_t j = 0; j < targets.size(); ++j)
    tcsv += std::to_string(1000 * j) + ',' + io::format_number(targets[j].x) + ',' +
            io::format_number(targets[j].y) + '\n';
  io::write_file(tmp.file("targets.csv"), tcsv);

  auto raw_at = [&](std::size_t k) {
    const double t = static_cast<double>(k) * dt_ms;
    const auto j = static_cast<std::size_t>(t / 1000.0);
    const double into = t - 1000.0 * static_cast<double>(j);
    Vec2 deg = targets[j];
    if (j > 0 && into < 220.0)
    {
      const double u = std::clamp((into - 200.0) / 20.0, 0.0, 1.0);
      deg = (1.0 - u) * targets[j - 1] + u * targets[j];
    }
    return Vec2{2.0 * deg.x + 5.0, 2.0 * deg.y + 5.0};
  };
  auto write_trace = [&](const std::string& path, bool constant) {
    std::string csv = "timestamp_ms,pupil_x,pupil_y,pupil_conf,cr_x,cr_y,iris_vx,iris_vy,n_matches,head_vx,head_vy\n";
    const std::size_t n = static_cast<std::size_t>(1000.0 * targets.size() / dt_ms);
    for (std::size_t k = 0; k < n; ++k)
    {
      const Vec2 p = constant ? Vec2{5, 5} : raw_at(k);
      const Vec2 v = k > 0 && !constant ? 0.25 * (raw_at(k) - raw_at(k - 1)) : Vec2{};
      csv += io::format_number(dt_ms * static_cast<double>(k)) + ',' + io::format_number(p.x) + ',' +
             io::format_number(p.y) + ",1,0,0," + io::format_number(v.x) + ',' + io::format_number(v.y) +
             ",60,0,0\n";
    }
    io::write_file(path, csv);
  };

  write_trace(tmp.file("cal.csv"), false);
  const auto r = run_cli({"calibrate", tmp.file("cal.csv"), "--targets", tmp.file("targets.csv"), "--output",
                          tmp.file("cal.json")});
  REQUIRE(r.code == cli::kExitOk);
  const auto cal = calibration_from_json(io::read_file(tmp.file("cal.json")));
  for (const Vec2& t : targets)
  {
    const Vec2 mapped = cal.poly.apply({2.0 * t.x + 5.0, 2.0 * t.y + 5.0});
    CHECK(mapped.x == doctest::Approx(t.x).epsilon(1e-6));
    CHECK(mapped.y == doctest::Approx(t.y).epsilon(1e-6));
  }
  CHECK(cal.velocity.m[0][0] == doctest::Approx(2.0).epsilon(0.01));
  CHECK(cal.velocity.m[1][1] == doctest::Approx(2.0).epsilon(0.01));
  CHECK(std::abs(cal.velocity.m[0][1]) < 0.02);

  // Calibrated fusion of the same recording lands on the targets.
  const auto fused = run_cli({"fuse", tmp.file("cal.csv"), "--calibration", tmp.file("cal.json")});
  REQUIRE(fused.code == cli::kExitOk);
  const auto g = io::parse_gaze(fused.out);
  CHECK(g.trace.samples[600].x == doctest::Approx(targets[2].x).epsilon(1e-3));

  // A motionless pupil cannot be calibrated: numerical failure.
  write_trace(tmp.file("flat.csv"), true);
  const auto flat = run_cli({"calibrate", tmp.file("flat.csv"), "--targets", tmp.file("targets.csv")});
  CHECK(flat.code == cli::kExitNumerical);
  CHECK(flat.err.find("error:") == 0);
}

TEST_CASE("detect and simulate")
{
  TempDir tmp;
  testing_support::Rng rng(12);
  const std::size_t n = 2500;
  std::vector<Vec2> s(n);
  double x = 0.0;
  for (std::size_t k = 0; k < n; ++k)
  {
    if (k % 250 >= 75 && k % 250 < 80)
      x += 0.04;
    s[k] = {x + rng.normal(0.004), rng.normal(0.004)};
  }
  io::write_file(tmp.file("gaze.csv"), gaze_file(s));
  std::string onsets = "onset_ms,x_deg,y_deg\n";
  for (int j = 0; j < 10; ++j)
    onsets += std::to_string(1000 * j) + ",0,0\n";
  io::write_file(tmp.file("onsets.csv"), onsets);

  const auto a = run_cli({"detect", tmp.file("gaze.csv"), "--onsets", tmp.file("onsets.csv"), "--counts",
                          tmp.file("counts.csv")});
  REQUIRE(a.code == cli::kExitOk);
  CHECK(a.out.rfind("onset_ms,offset_ms,peak_vel_dps,amplitude_deg,kind\n", 0) == 0);
  const auto counts = io::read_file(tmp.file("counts.csv"));
  const auto b = run_cli({"detect", tmp.file("gaze.csv"), "--onsets", tmp.file("onsets.csv")});
  CHECK(a.out == b.out);
  CHECK(split_lines(counts).size() == 11);

  io::write_file(tmp.file("flat.csv"), gaze_file(std::vector<Vec2>(n)));
  CHECK(run_cli({"detect", tmp.file("flat.csv"), "--onsets", tmp.file("onsets.csv")}).code == cli::kExitNumerical);

  io::write_file(tmp.file("sim.json"), R"({"sim":{"trials":5}})");
  const auto s1 = run_cli({"simulate", "--config", tmp.file("sim.json"), "--seed", "4", "--output", tmp.file("r1.json"),
                           "--dump-trials", tmp.file("d1.csv")});
  const auto s2 = run_cli({"simulate", "--config", tmp.file("sim.json"), "--seed", "4", "--output", tmp.file("r2.json")});
  REQUIRE(s1.code == cli::kExitOk);
  REQUIRE(s2.code == cli::kExitOk);
  CHECK(s1.out == s2.out);
  CHECK(io::read_file(tmp.file("r1.json")) == io::read_file(tmp.file("r2.json")));
  const auto doc = nlohmann::json::parse(io::read_file(tmp.file("r1.json")));
  CHECK(doc["trials"] == 5);
  CHECK(doc["signals"]["pi_t"]["mse_o"]["mean"].get<double>() < 2e-4);
  CHECK(split_lines(io::read_file(tmp.file("d1.csv"))).size() == 5 * 1000 + 1);

  CHECK(run_cli({}).code == cli::kExitInput);
  CHECK(run_cli({"bogus"}).code == cli::kExitInput);
}
