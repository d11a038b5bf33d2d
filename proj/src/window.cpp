#include "fvnlab/window.hpp"

#include <cmath>
#include <numbers>

#include "fvnlab/signal.hpp"

namespace fvnlab {

double cosine_series(double x, std::span<const double> coeffs) noexcept {
  const double ax = std::abs(x);
  if (ax > 1.0) return 0.0;
  double sum = 0.0;
  for (std::size_t m = 0; m < coeffs.size(); ++m)
    sum += coeffs[m] * std::cos(std::numbers::pi * static_cast<double>(m) * ax);
  return sum;
}

double phase_unit(double offset, double half_width) {
  require(half_width > 0.0, "phase_unit: support half-width must be positive");
  return cosine_series(offset / half_width);
}

}  // namespace fvnlab
