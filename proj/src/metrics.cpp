#include "stereopipe/metrics.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace stereopipe {

namespace {

void check_dims(const DisparityMap& a, const DisparityMap& b) {
  if (a.width != b.width || a.height != b.height)
    throw std::invalid_argument("disparity maps differ in size");
}

}  // namespace

double eq1_error(const DisparityMap& est, const DisparityMap& gt) {
  check_dims(est, gt);
  double sum = 0.0;
  long n = 0;
  for (std::size_t i = 0; i < gt.values.size(); ++i) {
    const std::int16_t g = gt.values[i], e = est.values[i];
    if (g <= 0 || e == kInvalidDisparity) continue;
    sum += std::abs(static_cast<double>(e) - g) / g;
    ++n;
  }
  if (n == 0) throw std::runtime_error("no evaluable pixels");
  return sum / n;
}

double bad_pixel_error(const DisparityMap& est, const DisparityMap& gt,
                       int thresh) {
  check_dims(est, gt);
  long bad = 0, total = 0;
  for (std::size_t i = 0; i < gt.values.size(); ++i) {
    const std::int16_t g = gt.values[i];
    if (g == kInvalidDisparity) continue;
    ++total;
    const std::int16_t e = est.values[i];
    if (e == kInvalidDisparity || std::abs(e - g) > thresh) ++bad;
  }
  if (total == 0) return 0.0;
  return static_cast<double>(bad) / total;
}

ErrorReport evaluate(const DisparityMap& est, const DisparityMap& gt,
                     int thresh) {
  check_dims(est, gt);
  ErrorReport r;
  r.bad_pixel_error = bad_pixel_error(est, gt, thresh);
  long valid = 0, n = 0;
  double sum = 0.0;
  for (std::size_t i = 0; i < gt.values.size(); ++i) {
    if (est.values[i] != kInvalidDisparity) ++valid;
    const std::int16_t g = gt.values[i], e = est.values[i];
    if (g <= 0 || e == kInvalidDisparity) continue;
    sum += std::abs(static_cast<double>(e) - g) / g;
    ++n;
  }
  if (n == 0) throw std::runtime_error("no evaluable pixels");
  r.eq1_error = sum / n;
  r.n_evaluated = n;
  r.density = static_cast<double>(valid) / est.values.size();
  return r;
}

std::string to_text(const ErrorReport& r) {
  std::ostringstream os;
  os << "eq1_error=" << r.eq1_error << "\n"
     << "bad_pixel_error=" << r.bad_pixel_error << "\n"
     << "density=" << r.density << "\n"
     << "n_evaluated=" << r.n_evaluated << "\n";
  return os.str();
}

std::string to_json(const ErrorReport& r) {
  nlohmann::json j;
  j["eq1_error"] = r.eq1_error;
  j["bad_pixel_error"] = r.bad_pixel_error;
  j["density"] = r.density;
  j["n_evaluated"] = r.n_evaluated;
  return j.dump();
}

}  // namespace stereopipe
