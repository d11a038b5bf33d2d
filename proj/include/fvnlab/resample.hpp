#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fvnlab {

/// Band-limited interpolation with a Kaiser-windowed sinc kernel. Integer positions
/// return the stored sample exactly; positions outside the signal read zeros.
class SincInterpolator {
 public:
  static constexpr std::size_t kDefaultHalfWidth = 128;
  static constexpr double kDefaultBeta = 8.0;

  explicit SincInterpolator(std::size_t half_width = kDefaultHalfWidth, double kaiser_beta = kDefaultBeta);

  [[nodiscard]] std::size_t half_width() const noexcept { return half_width_; }

  /// Value of the band-limited signal at a fractional sample position.
  [[nodiscard]] double at(std::span<const double> x, double position) const;

  /// Evaluates at every position.
  [[nodiscard]] std::vector<double> resample(std::span<const double> x, std::span<const double> positions) const;

 private:
  [[nodiscard]] double window(double u) const noexcept;

  std::size_t half_width_;
  std::vector<double> table_;  // Kaiser window sampled on |u| in [0, 1]
};

}  // namespace fvnlab
