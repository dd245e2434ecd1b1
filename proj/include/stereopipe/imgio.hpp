#pragma once

#include <string>

#include "stereopipe/image.hpp"

namespace stereopipe {

// Ground-truth disparity encodings.
//   Eightbit: 8-bit image, pixel value is the disparity (all pixels valid).
//   Kitti256: 16-bit PNG, disparity = value/256 rounded to nearest, 0 = invalid.
enum class GtConvention { Eightbit, Kitti256 };

// Disparity file formats.
//   Png16: 16-bit PNG storing value*256, invalid as 0.
//   Pfm:   little-endian 32-bit float PFM (scale -1.0), invalid as -1.
//   Png8:  8-bit PNG storing the raw value, invalid as 0.
enum class DisparityFormat { Png16, Pfm, Png8 };

// Loads an 8-bit grayscale PGM (P5) or an 8-bit PNG. RGB PNGs are converted
// with integer luma (77R+150G+29B)>>8. Throws std::runtime_error on
// unreadable files or unsupported bit depths.
GrayImage load_gray(const std::string& path);

DisparityMap load_ground_truth(const std::string& path, GtConvention convention);

void save_disparity(const DisparityMap& map, const std::string& path,
                    DisparityFormat format);

// Reads a PFM file written by save_disparity (negative values -> invalid).
DisparityMap load_pfm(const std::string& path);

void save_pgm(const GrayImage& img, const std::string& path);
void save_gray_png(const GrayImage& img, const std::string& path);

DisparityFormat parse_disparity_format(const std::string& name);
GtConvention parse_gt_convention(const std::string& name);

}  // namespace stereopipe
