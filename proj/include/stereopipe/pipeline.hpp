#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "stereopipe/dense.hpp"
#include "stereopipe/gridvec.hpp"
#include "stereopipe/image.hpp"
#include "stereopipe/interp.hpp"
#include "stereopipe/support.hpp"

namespace stereopipe {

enum class Mode {
  Original,      // sparse supports, Delaunay prior
  Interpolated,  // dense support grid, regular-lattice prior
};

enum class Staging { Serial, Staged };

struct PipelineConfig {
  Mode mode = Mode::Interpolated;
  Staging staging = Staging::Serial;
  MatchParams match;          // d_max, tau_ratio, step
  int filter_window = 2;      // support filter neighborhood, lattice cells
  int filter_d_tol = 5;
  int filter_n_min = 2;
  InterpParams interp;        // s_delta, epsilon, c_const
  GridVectorParams gridvec;   // cell_size, k_candidates, c_const
  DenseParams dense;
  int threads = 1;            // row-parallelism inside dense matching

  // Throws std::invalid_argument on inconsistent parameters.
  void validate() const;
};

inline constexpr int kStageCount = 6;
inline constexpr std::array<const char*, kStageCount> kStageNames = {
    "descriptor", "support",     "prior",
    "dense_left", "dense_right", "postprocess"};

struct FrameStats {
  std::array<double, kStageCount> stage_seconds{};
  double latency_seconds = 0.0;
  bool delaunay_fallback = false;  // prior fell back to the constant plane
};

struct StreamStats {
  std::vector<FrameStats> frames;
  double wall_seconds = 0.0;
  double fps = 0.0;
  std::array<double, kStageCount> stage_seconds{};  // summed over frames
};

std::pair<DisparityMap, FrameStats> run_frame(const GrayImage& left,
                                              const GrayImage& right,
                                              const PipelineConfig& cfg);

// Runs every pair; staged mode overlaps successive frames across stages via
// depth-2 hand-offs. Outputs are in input order and identical to serial mode.
std::pair<std::vector<DisparityMap>, StreamStats> run_stream(
    const std::vector<std::pair<GrayImage, GrayImage>>& frames,
    const PipelineConfig& cfg);

// Flat key=value configuration text: one entry per line, '#' comments and
// blank lines ignored. Throws std::runtime_error on unreadable files or
// malformed lines.
std::vector<std::pair<std::string, std::string>> parse_config_file(
    const std::string& path);

// Applies one entry if the key names a pipeline parameter (keys mirror the
// CLI flag names without leading dashes); returns false for keys it does not
// own. Throws std::invalid_argument on unparsable values.
bool apply_config_entry(PipelineConfig& cfg, const std::string& key,
                        const std::string& value);

}  // namespace stereopipe
