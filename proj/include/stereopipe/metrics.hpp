#pragma once

#include <string>

#include "stereopipe/image.hpp"

namespace stereopipe {

struct ErrorReport {
  double eq1_error = 0.0;       // mean relative error over evaluable pixels
  double bad_pixel_error = 0.0; // fraction beyond thresh (or invalid) vs gt
  double density = 0.0;         // valid estimate pixels / total pixels
  long n_evaluated = 0;         // pixels entering eq1_error
};

// Mean of |est - gt| / gt over pixels where both maps are valid and gt > 0.
// Throws on dimension mismatch or when no pixel qualifies.
double eq1_error(const DisparityMap& est, const DisparityMap& gt);

// Fraction of valid-gt pixels where est is invalid or |est - gt| > thresh.
double bad_pixel_error(const DisparityMap& est, const DisparityMap& gt,
                       int thresh);

ErrorReport evaluate(const DisparityMap& est, const DisparityMap& gt,
                     int thresh);

std::string to_text(const ErrorReport& r);
std::string to_json(const ErrorReport& r);

}  // namespace stereopipe
