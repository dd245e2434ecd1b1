#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "stereopipe/imgio.hpp"
#include "stereopipe/metrics.hpp"
#include "stereopipe/pipeline.hpp"

namespace {

using nlohmann::json;
using namespace stereopipe;

using Overrides = std::vector<std::pair<std::string, std::string>>;

// Settings that live outside the pipeline parameters proper.
struct ToolOpts {
  int thresh = 1;
  std::string gt_convention = "eightbit";
  std::string format = "png16";
  int frames = 8;
};

int parse_int(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  int out = 0;
  try {
    out = std::stoi(value, &used);
  } catch (const std::exception&) {
    used = std::string::npos;
  }
  if (used != value.size())
    throw std::invalid_argument("bad integer for " + key + ": " + value);
  return out;
}

bool apply_tool_entry(ToolOpts& t, const std::string& key,
                      const std::string& value) {
  if (key == "thresh") {
    t.thresh = parse_int(key, value);
  } else if (key == "gt-convention") {
    parse_gt_convention(value);  // validates
    t.gt_convention = value;
  } else if (key == "format") {
    parse_disparity_format(value);  // validates
    t.format = value;
  } else if (key == "frames") {
    t.frames = parse_int(key, value);
    if (t.frames < 1) throw std::invalid_argument("frames must be >= 1");
  } else {
    return false;
  }
  return true;
}

// Defaults, then the config file, then CLI flags in the order given.
PipelineConfig build_config(const std::string& config_path,
                            const Overrides& cli, ToolOpts& tool) {
  PipelineConfig cfg;
  if (!config_path.empty()) {
    for (const auto& [k, v] : parse_config_file(config_path))
      if (!apply_config_entry(cfg, k, v) && !apply_tool_entry(tool, k, v))
        throw std::invalid_argument("unknown configuration key: " + k);
  }
  for (const auto& [k, v] : cli)
    if (!apply_config_entry(cfg, k, v) && !apply_tool_entry(tool, k, v))
      throw std::invalid_argument("unknown option: " + k);
  cfg.validate();
  return cfg;
}

void add_param_flags(CLI::App* sub, Overrides& ov) {
  static const char* kKeys[] = {
      "mode",          "s-delta",      "epsilon",      "c-const",
      "d-max",         "step",         "grid-cell",    "k-candidates",
      "tau-ratio",     "filter-window", "filter-d-tol", "filter-n-min",
      "lambda-prior",  "delta-prior",  "t-prior",      "gap-max",
      "lr-tol",        "threads",      "thresh",       "gt-convention",
      "format",        "frames"};
  for (const char* k : kKeys) {
    sub->add_option_function<std::string>(
        std::string("--") + k,
        [&ov, k](const std::string& v) { ov.emplace_back(k, v); });
  }
  sub->add_flag_function("--staged", [&ov](std::int64_t) {
    ov.emplace_back("staged", "true");
  });
}

json stats_json(const FrameStats& s) {
  json stages;
  for (int i = 0; i < kStageCount; ++i)
    stages[kStageNames[i]] = s.stage_seconds[i];
  return json{{"latency_seconds", s.latency_seconds},
              {"fps", 1.0 / std::max(s.latency_seconds, 1e-9)},
              {"delaunay_fallback", s.delaunay_fallback},
              {"stages", stages}};
}

json report_json(const ErrorReport& r) {
  return json{{"eq1_error", r.eq1_error},
              {"bad_pixel_error", r.bad_pixel_error},
              {"density", r.density},
              {"n_evaluated", r.n_evaluated}};
}

int cmd_run(const std::string& left_path, const std::string& right_path,
            const std::string& out_path, const PipelineConfig& cfg,
            const ToolOpts& tool) {
  const GrayImage left = load_gray(left_path);
  const GrayImage right = load_gray(right_path);
  auto [map, stats] = run_frame(left, right, cfg);
  save_disparity(map, out_path, parse_disparity_format(tool.format));
  std::cout << stats_json(stats).dump() << "\n";
  return 0;
}

int cmd_eval(const std::string& left_path, const std::string& right_path,
             const std::string& gt_path, const PipelineConfig& cfg,
             const ToolOpts& tool) {
  const GrayImage left = load_gray(left_path);
  const GrayImage right = load_gray(right_path);
  const DisparityMap gt =
      load_ground_truth(gt_path, parse_gt_convention(tool.gt_convention));
  auto [map, stats] = run_frame(left, right, cfg);
  const ErrorReport report = evaluate(map, gt, tool.thresh);
  std::cout << to_text(report);
  json j = report_json(report);
  j["stats"] = stats_json(stats);
  std::cout << j.dump() << "\n";
  return 0;
}

int cmd_compare(const std::string& left_path, const std::string& right_path,
                const std::string& gt_path, PipelineConfig cfg,
                const ToolOpts& tool) {
  const GrayImage left = load_gray(left_path);
  const GrayImage right = load_gray(right_path);
  const DisparityMap gt =
      load_ground_truth(gt_path, parse_gt_convention(tool.gt_convention));

  json out;
  std::ostringstream table;
  table << std::left << std::setw(14) << "mode" << std::right << std::setw(12)
        << "eq1_error" << std::setw(18) << "bad_pixel_error" << std::setw(10)
        << "density" << std::setw(12) << "latency_s" << "\n";
  for (const Mode mode : {Mode::Original, Mode::Interpolated}) {
    cfg.mode = mode;
    auto [map, stats] = run_frame(left, right, cfg);
    const ErrorReport r = evaluate(map, gt, tool.thresh);
    const char* name = mode == Mode::Original ? "original" : "interpolated";
    table << std::left << std::setw(14) << name << std::right << std::fixed
          << std::setprecision(4) << std::setw(12) << r.eq1_error
          << std::setw(18) << r.bad_pixel_error << std::setw(10) << r.density
          << std::setw(12) << stats.latency_seconds << "\n";
    json jr = report_json(r);
    jr["latency_seconds"] = stats.latency_seconds;
    out[name] = jr;
  }
  std::cout << table.str() << out.dump() << "\n";
  return 0;
}

std::vector<std::pair<std::string, std::string>> find_pairs(
    const std::string& dir) {
  namespace fs = std::filesystem;
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file()) names.push_back(entry.path().filename().string());
  std::sort(names.begin(), names.end());

  std::vector<std::pair<std::string, std::string>> pairs;
  for (const std::string& name : names) {
    const auto pos = name.find("left");
    if (pos == std::string::npos) continue;
    std::string sibling = name;
    sibling.replace(pos, 4, "right");
    if (std::find(names.begin(), names.end(), sibling) == names.end()) continue;
    pairs.emplace_back((fs::path(dir) / name).string(),
                       (fs::path(dir) / sibling).string());
  }
  return pairs;
}

int cmd_bench(const std::string& dir, PipelineConfig cfg,
              const ToolOpts& tool) {
  const auto pairs = find_pairs(dir);
  if (pairs.empty())
    throw std::runtime_error("no left/right image pairs found in " + dir);

  std::vector<std::pair<GrayImage, GrayImage>> loaded;
  for (const auto& [l, r] : pairs)
    loaded.emplace_back(load_gray(l), load_gray(r));

  std::vector<std::pair<GrayImage, GrayImage>> frames;
  for (int i = 0; i < tool.frames; ++i)
    frames.push_back(loaded[i % loaded.size()]);

  cfg.staging = Staging::Serial;
  auto [serial_maps, serial_stats] = run_stream(frames, cfg);

  std::vector<DisparityMap> staged_maps;
  StreamStats staged_stats;
  if (tool.frames <= 1) {
    staged_maps = serial_maps;  // no overlap possible; identical execution
    staged_stats = serial_stats;
  } else {
    cfg.staging = Staging::Staged;
    std::tie(staged_maps, staged_stats) = run_stream(frames, cfg);
  }

  bool identical = serial_maps.size() == staged_maps.size();
  for (std::size_t i = 0; identical && i < serial_maps.size(); ++i)
    identical = serial_maps[i] == staged_maps[i];

  int fallback_frames = 0;
  for (const auto& fs_ : serial_stats.frames)
    if (fs_.delaunay_fallback) ++fallback_frames;

  json stages;
  for (int i = 0; i < kStageCount; ++i)
    stages[kStageNames[i]] = {{"serial_seconds", serial_stats.stage_seconds[i]},
                              {"staged_seconds", staged_stats.stage_seconds[i]}};
  const json out{{"frames", tool.frames},
                 {"serial_fps", serial_stats.fps},
                 {"staged_fps", staged_stats.fps},
                 {"ratio", staged_stats.fps / std::max(serial_stats.fps, 1e-9)},
                 {"outputs_identical", identical},
                 {"delaunay_fallback_frames", fallback_frames},
                 {"stages", stages}};
  std::cout << out.dump() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stereo disparity estimation pipeline"};
  app.require_subcommand(1);

  std::string left, right, out, gt, dir, config_path;

  Overrides run_ov, eval_ov, compare_ov, bench_ov;

  CLI::App* run = app.add_subcommand("run", "Compute a disparity map");
  run->add_option("-l,--left", left, "left image")->required();
  run->add_option("-r,--right", right, "right image")->required();
  run->add_option("-o,--out", out, "output disparity file")->required();
  run->add_option("--config", config_path, "key=value configuration file");
  add_param_flags(run, run_ov);

  CLI::App* eval = app.add_subcommand("eval", "Evaluate against ground truth");
  eval->add_option("-l,--left", left, "left image")->required();
  eval->add_option("-r,--right", right, "right image")->required();
  eval->add_option("-g,--gt", gt, "ground-truth disparity")->required();
  eval->add_option("--config", config_path, "key=value configuration file");
  add_param_flags(eval, eval_ov);

  CLI::App* compare =
      app.add_subcommand("compare", "Run both modes against ground truth");
  compare->add_option("-l,--left", left, "left image")->required();
  compare->add_option("-r,--right", right, "right image")->required();
  compare->add_option("-g,--gt", gt, "ground-truth disparity")->required();
  compare->add_option("--config", config_path, "key=value configuration file");
  add_param_flags(compare, compare_ov);

  CLI::App* bench = app.add_subcommand("bench", "Benchmark serial vs staged");
  bench->add_option("-d,--dir", dir, "directory of left/right pairs")
      ->required();
  bench->add_option("--config", config_path, "key=value configuration file");
  add_param_flags(bench, bench_ov);

  CLI11_PARSE(app, argc, argv);

  try {
    ToolOpts tool;
    if (*run) {
      const PipelineConfig cfg = build_config(config_path, run_ov, tool);
      return cmd_run(left, right, out, cfg, tool);
    }
    if (*eval) {
      const PipelineConfig cfg = build_config(config_path, eval_ov, tool);
      return cmd_eval(left, right, gt, cfg, tool);
    }
    if (*compare) {
      const PipelineConfig cfg = build_config(config_path, compare_ov, tool);
      return cmd_compare(left, right, gt, cfg, tool);
    }
    if (*bench) {
      const PipelineConfig cfg = build_config(config_path, bench_ov, tool);
      return cmd_bench(dir, cfg, tool);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
