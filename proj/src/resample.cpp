#include "fvnlab/resample.hpp"

#include <cmath>
#include <numbers>

#include "fvnlab/signal.hpp"

namespace fvnlab {

namespace {
constexpr std::size_t kTableSize = 16384;
}

SincInterpolator::SincInterpolator(std::size_t half_width, double kaiser_beta) : half_width_(half_width) {
  require(half_width >= 1, "interpolator half-width must be at least 1");
  require(kaiser_beta >= 0.0, "Kaiser beta must be non-negative");
  table_.resize(kTableSize + 2);
  const double norm = std::cyl_bessel_i(0.0, kaiser_beta);
  for (std::size_t i = 0; i <= kTableSize; ++i) {
    const double u = static_cast<double>(i) / static_cast<double>(kTableSize);
    table_[i] = std::cyl_bessel_i(0.0, kaiser_beta * std::sqrt(std::max(0.0, 1.0 - u * u))) / norm;
  }
  table_[kTableSize + 1] = table_[kTableSize];
}

double SincInterpolator::window(double u) const noexcept {
  const double pos = std::abs(u) * static_cast<double>(kTableSize);
  const auto i = static_cast<std::size_t>(pos);
  if (i >= kTableSize) return table_[kTableSize];
  const double t = pos - static_cast<double>(i);
  return table_[i] + t * (table_[i + 1] - table_[i]);
}

double SincInterpolator::at(std::span<const double> x, double position) const {
  // Nearest integer keeps |mu| <= 0.5 so sin(pi mu) does not cancel near whole samples.
  const double base = std::round(position);
  const double mu = position - base;
  const auto i0 = static_cast<long long>(base);
  const auto n = static_cast<long long>(x.size());
  if (mu == 0.0) return (i0 >= 0 && i0 < n) ? x[static_cast<std::size_t>(i0)] : 0.0;

  const auto hw = static_cast<long long>(half_width_);
  const double s = std::sin(std::numbers::pi * mu) / std::numbers::pi;
  const double inv_hw = 1.0 / static_cast<double>(half_width_);
  const long long first = std::max(i0 - hw, 0LL);
  const long long last = std::min(i0 + hw, n - 1);
  double acc = 0.0;
  for (long long k = first; k <= last; ++k) {
    // sin(pi (position - k)) = (-1)^(i0 - k) sin(pi mu)
    const double d = position - static_cast<double>(k);
    const double sign = ((i0 - k) & 1LL) ? -1.0 : 1.0;
    acc += x[static_cast<std::size_t>(k)] * sign * s / d * window(d * inv_hw);
  }
  return acc;
}

std::vector<double> SincInterpolator::resample(std::span<const double> x, std::span<const double> positions) const {
  std::vector<double> out(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i) out[i] = at(x, positions[i]);
  return out;
}

}  // namespace fvnlab
