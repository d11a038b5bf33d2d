#include "fvnlab/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fvnlab {

void require(bool condition, const std::string& message) {
  if (!condition) throw ValidationError(message);
}

SampledSignal::SampledSignal(std::vector<double> samples, double fs)
    : samples_(std::move(samples)), fs_(fs) {
  require(std::isfinite(fs_) && fs_ > 0.0, "sampling rate must be positive and finite");
  require(!samples_.empty(), "signal must contain at least one sample");
  require(std::all_of(samples_.begin(), samples_.end(), [](double v) { return std::isfinite(v); }),
          "signal samples must be finite");
}

SampledSignal SampledSignal::zeros(std::size_t length, double fs) {
  return SampledSignal(std::vector<double>(length, 0.0), fs);
}

double SampledSignal::rms() const noexcept { return fvnlab::rms(samples_); }

double SampledSignal::energy() const noexcept {
  return std::inner_product(samples_.begin(), samples_.end(), samples_.begin(), 0.0);
}

double SampledSignal::peak_abs() const noexcept {
  double peak = 0.0;
  for (double v : samples_) peak = std::max(peak, std::abs(v));
  return peak;
}

double rms(std::span<const double> x) noexcept {
  if (x.empty()) return 0.0;
  const double e = std::inner_product(x.begin(), x.end(), x.begin(), 0.0);
  return std::sqrt(e / static_cast<double>(x.size()));
}

double relative_rms_error(std::span<const double> estimate, std::span<const double> truth) {
  require(estimate.size() == truth.size(), "relative_rms_error: length mismatch");
  double err = 0.0;
  double ref = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double d = estimate[i] - truth[i];
    err += d * d;
    ref += truth[i] * truth[i];
  }
  if (ref == 0.0) return err == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::sqrt(err / ref);
}

}  // namespace fvnlab
