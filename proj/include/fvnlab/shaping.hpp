#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "fvnlab/signal.hpp"

namespace fvnlab {

/// All-pole shaping filter 1/A(z), A(z) = 1 + a_1 z^-1 + ... + a_p z^-p.
/// The same coefficients give the exact FIR inverse A(z).
class ShapingFilter {
 public:
  ShapingFilter() = default;
  /// Throws ValidationError unless every pole lies strictly inside the unit circle.
  explicit ShapingFilter(std::vector<double> a);

  [[nodiscard]] std::size_t order() const noexcept { return a_.size(); }
  [[nodiscard]] std::span<const double> coefficients() const noexcept { return a_; }

  /// A(e^{j 2 pi f / fs}).
  [[nodiscard]] std::complex<double> denominator_response(double f, double fs) const;
  /// 20 log10 |1 / A| at frequency f.
  [[nodiscard]] double magnitude_db(double f, double fs) const;

 private:
  std::vector<double> a_;
};

/// Stability test via the step-down (reflection coefficient) recursion.
bool is_minimum_phase(std::span<const double> a);

/// y[n] = x[n] - sum_k a_k y[n-k], zero initial state.
SampledSignal shape_spectrum(const SampledSignal& signal, const ShapingFilter& filter);

/// x[n] = y[n] + sum_k a_k y[n-k], zero initial state. Exact inverse of shape_spectrum.
SampledSignal inverse_shape(const SampledSignal& signal, const ShapingFilter& filter);

struct ShapingFitOptions {
  std::size_t order = 46;
  double f_low = 50.0;        ///< lower edge of the fitted band, Hz
  double f_high = 10000.0;    ///< upper edge of the fitted band, Hz
  std::size_t grid_points = 400;
  std::size_t max_iterations = 60;
};

/// Fits an all-pole filter to a target level (dB, arbitrary offset) by least squares
/// on a log-spaced frequency grid over [f_low, f_high]. The target is held constant
/// outside the band. Initialised by an autocorrelation (LPC) fit, refined by damped
/// Gauss-Newton steps that keep the filter stable.
ShapingFilter fit_shaping_filter(const std::function<double(double)>& target_db, double fs,
                                 const ShapingFitOptions& options = {});

/// Convenience: target slope in dB per octave (e.g. -3).
ShapingFilter fit_slope_filter(double db_per_octave, double fs, const ShapingFitOptions& options = {});

/// Max |model - target - mean offset| in dB over a log grid in [f_low, f_high].
double shaping_fit_error_db(const ShapingFilter& filter, const std::function<double(double)>& target_db,
                            double fs, double f_low, double f_high, std::size_t points = 400);

}  // namespace fvnlab
