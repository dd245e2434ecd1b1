#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <stdexcept>
#include <vector>

#include "scene.hpp"
#include "stereopipe/pipeline.hpp"

using namespace stereopipe;
using scene::Scene;
using scene::make_scene;
using scene::make_shift_scene;
namespace fs = std::filesystem;

namespace {

std::vector<std::pair<GrayImage, GrayImage>> scene_frames(int n, int w, int h) {
  std::vector<std::pair<GrayImage, GrayImage>> frames;
  for (int i = 0; i < n; ++i) {
    const Scene sc = make_scene(w, h, 0x1000u + i);
    frames.emplace_back(sc.left, sc.right);
  }
  return frames;
}

double exact_fraction(const DisparityMap& d, int shift, int w, int h) {
  long exact = 0, seen = 0;
  for (int v = kDescriptorMargin; v < h - kDescriptorMargin; ++v)
    for (int u = shift + kDescriptorMargin; u < w - kDescriptorMargin; ++u) {
      ++seen;
      if (d.valid(u, v) && d.at(u, v) == shift) ++exact;
    }
  return seen ? double(exact) / double(seen) : 0.0;
}

}  // namespace

TEST_CASE("a uniform shift survives the full pipeline in both modes") {
  const int shift = 7;
  const Scene sc = make_shift_scene(128, 96, shift, 0xc0ffeeu);
  for (Mode mode : {Mode::Interpolated, Mode::Original}) {
    PipelineConfig cfg;
    cfg.mode = mode;
    cfg.match.d_max = 32;
    cfg.interp.c_const = 16;
    cfg.gridvec.c_const = 16;
    auto [d, stats] = run_frame(sc.left, sc.right, cfg);
    CHECK(d.width == 128);
    CHECK(exact_fraction(d, shift, 128, 96) > 0.95);
    CHECK(stats.latency_seconds > 0.0);
  }
}

TEST_CASE("stage timings populate every stage") {
  const Scene sc = make_scene(96, 80, 0xabcdu);
  PipelineConfig cfg;
  auto [d, stats] = run_frame(sc.left, sc.right, cfg);
  for (int s = 0; s < kStageCount; ++s) CHECK(stats.stage_seconds[s] >= 0.0);
  double sum = 0.0;
  for (double t : stats.stage_seconds) sum += t;
  CHECK(stats.latency_seconds >= sum * 0.5);  // same clock, sane ordering
}

TEST_CASE("mismatched stereo pair dimensions are rejected") {
  GrayImage left(64, 48), right(64, 52);
  PipelineConfig cfg;
  CHECK_THROWS_AS(run_frame(left, right, cfg), std::invalid_argument);
}

TEST_CASE("collinear supports fall back to the constant prior") {
  // step 12 on a 16-px-wide frame leaves a single lattice column, so the
  // triangulation can never get three non-collinear supports
  const Scene sc = make_shift_scene(16, 64, 3, 0x600du);
  PipelineConfig cfg;
  cfg.mode = Mode::Original;
  cfg.match.step = 12;
  auto [d, stats] = run_frame(sc.left, sc.right, cfg);
  CHECK(stats.delaunay_fallback);
  CHECK(d.width == 16);
}

TEST_CASE("the grid prior never raises the fallback flag") {
  GrayImage flat_l(64, 48, 100), flat_r(64, 48, 100);
  PipelineConfig cfg;
  cfg.mode = Mode::Interpolated;
  auto [d, stats] = run_frame(flat_l, flat_r, cfg);
  CHECK_FALSE(stats.delaunay_fallback);
}

TEST_CASE("staged streaming reproduces serial outputs bit for bit") {
  const auto frames = scene_frames(5, 96, 72);
  for (Mode mode : {Mode::Interpolated, Mode::Original}) {
    PipelineConfig cfg;
    cfg.mode = mode;
    cfg.staging = Staging::Serial;
    auto [serial, s_stats] = run_stream(frames, cfg);
    cfg.staging = Staging::Staged;
    auto [staged, t_stats] = run_stream(frames, cfg);
    REQUIRE(serial.size() == staged.size());
    for (std::size_t i = 0; i < serial.size(); ++i)
      REQUIRE(serial[i] == staged[i]);
    CHECK(s_stats.frames.size() == 5);
    CHECK(t_stats.frames.size() == 5);
    CHECK(t_stats.fps > 0.0);
  }
}

TEST_CASE("stream outputs stay in input order") {
  // frames with different shifts: output i must carry shift of frame i
  std::vector<std::pair<GrayImage, GrayImage>> frames;
  const std::vector<int> shifts = {3, 9, 5, 12};
  for (int s : shifts) {
    const Scene sc = make_shift_scene(96, 64, s, 0xfeedu + s);
    frames.emplace_back(sc.left, sc.right);
  }
  PipelineConfig cfg;
  cfg.staging = Staging::Staged;
  cfg.match.d_max = 32;
  cfg.interp.c_const = 16;
  cfg.gridvec.c_const = 16;
  auto [outs, stats] = run_stream(frames, cfg);
  REQUIRE(outs.size() == shifts.size());
  for (std::size_t i = 0; i < shifts.size(); ++i)
    CHECK(exact_fraction(outs[i], shifts[i], 96, 64) > 0.9);
}

TEST_CASE("an empty stream is a no-op") {
  PipelineConfig cfg;
  auto [outs, stats] = run_stream({}, cfg);
  CHECK(outs.empty());
  CHECK(stats.frames.empty());
}

TEST_CASE("a failing frame propagates its error out of the staged stream") {
  std::vector<std::pair<GrayImage, GrayImage>> frames = {
      {GrayImage(64, 48), GrayImage(64, 48)},
      {GrayImage(64, 48), GrayImage(60, 48)},  // mismatched pair
  };
  PipelineConfig cfg;
  cfg.staging = Staging::Staged;
  CHECK_THROWS_AS(run_stream(frames, cfg), std::invalid_argument);
}

TEST_CASE("validate rejects inconsistent parameter sets") {
  PipelineConfig ok;
  CHECK_NOTHROW(ok.validate());

  PipelineConfig c = ok;
  c.match.d_max = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = ok;
  c.match.d_max = 300;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = ok;
  c.match.tau_ratio = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = ok;
  c.interp.s_delta = c.match.step - 1;  // unreachable neighbors
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = ok;
  c.interp.c_const = c.match.d_max + 1;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = ok;
  c.gridvec.c_const = c.interp.c_const + 1;  // the two must agree
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = ok;
  c.gridvec.k_candidates = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = ok;
  c.dense.delta_prior = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = ok;
  c.threads = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("config files parse into ordered entries") {
  const std::string path =
      (fs::temp_directory_path() / "stereopipe_cfg_test.conf").string();
  std::ofstream out(path);
  out << "# stereo settings\n"
      << "\n"
      << "mode = original\n"
      << "  d-max=64  \n"
      << "tau-ratio = 0.85 # inline comment\n";
  out.close();
  const auto entries = parse_config_file(path);
  REQUIRE(entries.size() == 3);
  CHECK(entries[0] == std::pair<std::string, std::string>{"mode", "original"});
  CHECK(entries[1] == std::pair<std::string, std::string>{"d-max", "64"});
  CHECK(entries[2] ==
        std::pair<std::string, std::string>{"tau-ratio", "0.85"});
  fs::remove(path);
}

TEST_CASE("malformed config lines and missing files throw") {
  const std::string path =
      (fs::temp_directory_path() / "stereopipe_cfg_bad.conf").string();
  std::ofstream(path) << "just-a-key-no-value\n";
  CHECK_THROWS_AS(parse_config_file(path), std::runtime_error);
  fs::remove(path);
  CHECK_THROWS_AS(parse_config_file(path), std::runtime_error);
}

TEST_CASE("config entries map onto pipeline parameters") {
  PipelineConfig cfg;
  CHECK(apply_config_entry(cfg, "mode", "original"));
  CHECK(cfg.mode == Mode::Original);
  CHECK(apply_config_entry(cfg, "mode", "interpolated"));
  CHECK(cfg.mode == Mode::Interpolated);
  CHECK(apply_config_entry(cfg, "staged", "true"));
  CHECK(cfg.staging == Staging::Staged);
  CHECK(apply_config_entry(cfg, "d-max", "64"));
  CHECK(cfg.match.d_max == 64);
  CHECK(apply_config_entry(cfg, "tau-ratio", "0.8"));
  CHECK(cfg.match.tau_ratio == doctest::Approx(0.8));
  CHECK(apply_config_entry(cfg, "step", "4"));
  CHECK(cfg.match.step == 4);
  CHECK(apply_config_entry(cfg, "s-delta", "40"));
  CHECK(cfg.interp.s_delta == 40);
  CHECK(apply_config_entry(cfg, "epsilon", "9"));
  CHECK(cfg.interp.epsilon == 9);
  CHECK(apply_config_entry(cfg, "lambda-prior", "1.5"));
  CHECK(cfg.dense.lambda_prior == doctest::Approx(1.5));
  CHECK(apply_config_entry(cfg, "gap-max", "4"));
  CHECK(cfg.dense.gap_max == 4);
  CHECK(apply_config_entry(cfg, "threads", "3"));
  CHECK(cfg.threads == 3);

  // one knob keeps the interpolation constant and the cell fallback in sync
  CHECK(apply_config_entry(cfg, "c-const", "25"));
  CHECK(cfg.interp.c_const == 25);
  CHECK(cfg.gridvec.c_const == 25);
  CHECK_NOTHROW(cfg.validate());

  CHECK_FALSE(apply_config_entry(cfg, "not-a-key", "1"));
  CHECK_THROWS_AS(apply_config_entry(cfg, "d-max", "lots"),
                  std::invalid_argument);
  CHECK_THROWS_AS(apply_config_entry(cfg, "mode", "sideways"),
                  std::invalid_argument);
}
