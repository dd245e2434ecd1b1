#include "stereopipe/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <memory>
#include <stdexcept>
#include <thread>

#include "stereopipe/channel.hpp"
#include "stereopipe/descriptor.hpp"
#include "stereopipe/mesh.hpp"

namespace stereopipe {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void require(bool ok, const char* message) {
  if (!ok) throw std::invalid_argument(message);
}

struct FrameJob {
  int index = 0;
  const GrayImage* left = nullptr;
  const GrayImage* right = nullptr;
  SobelPair sob_l, sob_r;
  SupportGrid raw_supports;  // straight from matching: feeds interpolation
  SupportGrid supports;      // filtered: feeds grid vector and Delaunay
  std::optional<TriangleMesh> mesh_l, mesh_r;
  GridVector gv_l, gv_r;
  DisparityMap dl, dr, out;
  FrameStats stats;
  Clock::time_point t0;
  std::exception_ptr error;
};

void stage_descriptor(FrameJob& j) {
  if (j.left->width != j.right->width || j.left->height != j.right->height)
    throw std::invalid_argument("image pair differs in size");
  j.sob_l = sobel(*j.left);
  j.sob_r = sobel(*j.right);
}

void stage_support(FrameJob& j, const PipelineConfig& cfg) {
  const DescriptorSource dl(j.sob_l), dr(j.sob_r);
  j.raw_supports = match_support(dl, dr, cfg.match);
  j.supports = filter_supports(j.raw_supports, cfg.filter_window,
                               cfg.filter_d_tol, cfg.filter_n_min);
}

// Projects matched supports into right-view coordinates, snapping each to the
// nearest lattice column; collisions keep the larger (nearer) disparity.
SupportGrid snap_to_right_lattice(const SupportGrid& g) {
  SupportGrid out;
  out.step = g.step;
  out.gw = g.gw;
  out.gh = g.gh;
  out.origin_u = g.origin_u;
  out.origin_v = g.origin_v;
  out.cells.assign(static_cast<std::size_t>(g.gw) * g.gh, SupportCell{});
  for (int jx = 0; jx < g.gh; ++jx) {
    for (int i = 0; i < g.gw; ++i) {
      if (!g.matched(i, jx)) continue;
      const int d = g.cell(i, jx).d;
      const int i2 = static_cast<int>(
          std::lround((i * g.step - d) / static_cast<double>(g.step)));
      if (i2 < 0 || i2 >= g.gw) continue;
      SupportCell& c = out.cell(i2, jx);
      if (c.tag == Provenance::Empty || c.d < d)
        c = {static_cast<std::int16_t>(d), Provenance::Matched};
    }
  }
  return out;
}

// Distinct mirrored positions; a shared position keeps the larger disparity.
std::vector<SupportPoint> dedupe_right_points(std::vector<SupportPoint> pts) {
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
    if (a.v != b.v) return a.v < b.v;
    if (a.u != b.u) return a.u < b.u;
    return a.d > b.d;
  });
  std::vector<SupportPoint> out;
  out.reserve(pts.size());
  for (const auto& p : pts)
    if (out.empty() || out.back().u != p.u || out.back().v != p.v)
      out.push_back(p);
  return out;
}

void stage_prior(FrameJob& j, const PipelineConfig& cfg) {
  const int w = j.left->width, h = j.left->height;
  const std::vector<SupportPoint> left_pts = matched_points(j.supports);

  std::vector<SupportPoint> right_pts;
  right_pts.reserve(left_pts.size());
  for (const auto& p : left_pts) right_pts.push_back({p.u - p.d, p.v, p.d});

  j.gv_l = build_grid_vector(left_pts, cfg.gridvec, w, h, cfg.match.d_max);
  j.gv_r = build_grid_vector(right_pts, cfg.gridvec, w, h, cfg.match.d_max);

  if (cfg.mode == Mode::Interpolated) {
    // Interpolation reads the unfiltered extraction: redundancy removal
    // thins uniform regions below the fixed search radius, and only the
    // grid-vector and Delaunay paths want the thinned set.
    j.mesh_l =
        regular_triangulate(interpolate_grid(j.raw_supports, cfg.interp));
    j.mesh_r = regular_triangulate(
        interpolate_grid(snap_to_right_lattice(j.raw_supports), cfg.interp));
  } else {
    j.mesh_l = delaunay_triangulate(left_pts, w, h);
    if (!j.mesh_l) {
      j.mesh_l = constant_mesh(w, h, cfg.interp.c_const);
      j.stats.delaunay_fallback = true;
    }
    j.mesh_r = delaunay_triangulate(dedupe_right_points(right_pts), w, h);
    if (!j.mesh_r) {
      j.mesh_r = constant_mesh(w, h, cfg.interp.c_const);
      j.stats.delaunay_fallback = true;
    }
  }
}

void stage_dense_left(FrameJob& j, const PipelineConfig& cfg) {
  const DescriptorSource dl(j.sob_l), dr(j.sob_r);
  j.dl = dense_match(dl, dr, &*j.mesh_l, j.gv_l, cfg.dense, cfg.match.d_max,
                     MatchDirection::LeftReference, cfg.threads);
}

void stage_dense_right(FrameJob& j, const PipelineConfig& cfg) {
  const DescriptorSource dl(j.sob_l), dr(j.sob_r);
  j.dr = dense_match(dr, dl, &*j.mesh_r, j.gv_r, cfg.dense, cfg.match.d_max,
                     MatchDirection::RightReference, cfg.threads);
}

void stage_postprocess(FrameJob& j, const PipelineConfig& cfg) {
  const DisparityMap checked = lr_consistency(j.dl, j.dr, cfg.dense.lr_tol);
  j.out = median_filter(gap_interpolate(checked, cfg.dense.gap_max));
}

void exec_stage(FrameJob& j, int stage, const PipelineConfig& cfg) {
  if (j.error) return;
  const auto t = Clock::now();
  try {
    switch (stage) {
      case 0: stage_descriptor(j); break;
      case 1: stage_support(j, cfg); break;
      case 2: stage_prior(j, cfg); break;
      case 3: stage_dense_left(j, cfg); break;
      case 4: stage_dense_right(j, cfg); break;
      case 5: stage_postprocess(j, cfg); break;
    }
  } catch (...) {
    j.error = std::current_exception();
  }
  j.stats.stage_seconds[stage] = seconds_since(t);
}

void run_all_stages(FrameJob& j, const PipelineConfig& cfg) {
  for (int s = 0; s < kStageCount; ++s) exec_stage(j, s, cfg);
  j.stats.latency_seconds = seconds_since(j.t0);
}

}  // namespace

void PipelineConfig::validate() const {
  require(match.step >= 1, "step must be >= 1");
  require(match.d_max >= 1 && match.d_max <= 255, "d-max must be in [1, 255]");
  require(match.tau_ratio > 0.0 && match.tau_ratio <= 1.0,
          "tau-ratio must be in (0, 1]");
  require(filter_window >= 0, "filter-window must be >= 0");
  require(filter_d_tol >= 0, "filter-d-tol must be >= 0");
  require(filter_n_min >= 0, "filter-n-min must be >= 0");
  require(interp.s_delta >= match.step,
          "s-delta must be >= the support lattice step");
  require(interp.epsilon >= 0, "epsilon must be >= 0");
  require(interp.c_const >= 0 && interp.c_const <= match.d_max,
          "c-const must lie in [0, d-max]");
  require(gridvec.c_const == interp.c_const,
          "c-const must agree between interpolation and grid vector");
  require(gridvec.cell_size >= 1, "grid-cell must be >= 1");
  require(gridvec.k_candidates >= 1, "k-candidates must be >= 1");
  require(dense.lambda_prior >= 0.0, "lambda-prior must be >= 0");
  require(dense.delta_prior >= 1, "delta-prior must be >= 1");
  require(dense.t_prior >= 0, "t-prior must be >= 0");
  require(dense.gap_max >= 0, "gap-max must be >= 0");
  require(dense.lr_tol >= 0, "lr-tol must be >= 0");
  require(threads >= 1, "threads must be >= 1");
}

std::pair<DisparityMap, FrameStats> run_frame(const GrayImage& left,
                                              const GrayImage& right,
                                              const PipelineConfig& cfg) {
  cfg.validate();
  FrameJob j;
  j.left = &left;
  j.right = &right;
  j.t0 = Clock::now();
  run_all_stages(j, cfg);
  if (j.error) std::rethrow_exception(j.error);
  return {std::move(j.out), j.stats};
}

std::pair<std::vector<DisparityMap>, StreamStats> run_stream(
    const std::vector<std::pair<GrayImage, GrayImage>>& frames,
    const PipelineConfig& cfg) {
  cfg.validate();
  const int n = static_cast<int>(frames.size());
  std::vector<DisparityMap> outputs(n);
  StreamStats ss;
  ss.frames.resize(n);
  std::vector<std::exception_ptr> errors(n);

  const auto t0 = Clock::now();
  if (cfg.staging == Staging::Serial || n <= 1) {
    for (int i = 0; i < n; ++i) {
      FrameJob j;
      j.index = i;
      j.left = &frames[i].first;
      j.right = &frames[i].second;
      j.t0 = Clock::now();
      run_all_stages(j, cfg);
      outputs[i] = std::move(j.out);
      ss.frames[i] = j.stats;
      errors[i] = j.error;
    }
  } else {
    using Job = std::unique_ptr<FrameJob>;
    // One depth-2 hand-off per stage boundary, plus the intake queue.
    std::array<std::unique_ptr<BoundedChannel<Job>>, kStageCount> ch;
    for (auto& c : ch) c = std::make_unique<BoundedChannel<Job>>(2);

    std::vector<std::thread> workers;
    workers.reserve(kStageCount);
    for (int s = 0; s < kStageCount; ++s) {
      workers.emplace_back([&, s] {
        while (auto job = ch[s]->pop()) {
          exec_stage(**job, s, cfg);
          if (s + 1 < kStageCount) {
            ch[s + 1]->push(std::move(*job));
          } else {
            FrameJob& j = **job;
            j.stats.latency_seconds = seconds_since(j.t0);
            outputs[j.index] = std::move(j.out);
            ss.frames[j.index] = j.stats;
            errors[j.index] = j.error;
          }
        }
        if (s + 1 < kStageCount) ch[s + 1]->close();
      });
    }

    for (int i = 0; i < n; ++i) {
      auto job = std::make_unique<FrameJob>();
      job->index = i;
      job->left = &frames[i].first;
      job->right = &frames[i].second;
      job->t0 = Clock::now();
      ch[0]->push(std::move(job));
    }
    ch[0]->close();
    for (auto& w : workers) w.join();
  }

  ss.wall_seconds = seconds_since(t0);
  ss.fps = n / std::max(ss.wall_seconds, 1e-9);
  for (const auto& fs : ss.frames)
    for (int s = 0; s < kStageCount; ++s)
      ss.stage_seconds[s] += fs.stage_seconds[s];

  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return {std::move(outputs), std::move(ss)};
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

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

double parse_double(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double out = 0;
  try {
    out = std::stod(value, &used);
  } catch (const std::exception&) {
    used = std::string::npos;
  }
  if (used != value.size())
    throw std::invalid_argument("bad number for " + key + ": " + value);
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw std::invalid_argument("bad boolean for " + key + ": " + value);
}

}  // namespace

std::vector<std::pair<std::string, std::string>> parse_config_file(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": empty key");
    entries.emplace_back(key, value);
  }
  return entries;
}

bool apply_config_entry(PipelineConfig& cfg, const std::string& key,
                        const std::string& value) {
  if (key == "mode") {
    if (value == "original") cfg.mode = Mode::Original;
    else if (value == "interpolated") cfg.mode = Mode::Interpolated;
    else throw std::invalid_argument("bad mode: " + value);
  } else if (key == "staged") {
    cfg.staging = parse_bool(key, value) ? Staging::Staged : Staging::Serial;
  } else if (key == "step") {
    cfg.match.step = parse_int(key, value);
  } else if (key == "d-max") {
    cfg.match.d_max = parse_int(key, value);
  } else if (key == "tau-ratio") {
    cfg.match.tau_ratio = parse_double(key, value);
  } else if (key == "filter-window") {
    cfg.filter_window = parse_int(key, value);
  } else if (key == "filter-d-tol") {
    cfg.filter_d_tol = parse_int(key, value);
  } else if (key == "filter-n-min") {
    cfg.filter_n_min = parse_int(key, value);
  } else if (key == "s-delta") {
    cfg.interp.s_delta = parse_int(key, value);
  } else if (key == "epsilon") {
    cfg.interp.epsilon = parse_int(key, value);
  } else if (key == "c-const") {
    cfg.interp.c_const = parse_int(key, value);
    cfg.gridvec.c_const = cfg.interp.c_const;
  } else if (key == "grid-cell") {
    cfg.gridvec.cell_size = parse_int(key, value);
  } else if (key == "k-candidates") {
    cfg.gridvec.k_candidates = parse_int(key, value);
  } else if (key == "lambda-prior") {
    cfg.dense.lambda_prior = parse_double(key, value);
  } else if (key == "delta-prior") {
    cfg.dense.delta_prior = parse_int(key, value);
  } else if (key == "t-prior") {
    cfg.dense.t_prior = parse_int(key, value);
  } else if (key == "gap-max") {
    cfg.dense.gap_max = parse_int(key, value);
  } else if (key == "lr-tol") {
    cfg.dense.lr_tol = parse_int(key, value);
  } else if (key == "threads") {
    cfg.threads = parse_int(key, value);
  } else {
    return false;
  }
  return true;
}

}  // namespace stereopipe
