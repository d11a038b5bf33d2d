#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fvnlab/resample.hpp"
#include "fvnlab/signal.hpp"

namespace fvnlab {

/// Complex band-pass impulse response selecting the fundamental of a periodic test
/// signal: h(t) = exp(j 2 pi f_o t) * sum_k a_k cos(2 pi c_mag k f_o t / 6), with
/// |t| <= 3 / (c_mag f_o). Taps are centered (zero group delay).
struct AnalyticProbe {
  double f_o = 0.0;
  double c_mag = 1.0;
  double fs = 0.0;
  std::vector<std::complex<double>> taps;
  std::size_t center = 0;  ///< index of t = 0 in taps

  [[nodiscard]] double support_seconds() const { return 6.0 / (c_mag * f_o); }
  [[nodiscard]] std::size_t support_samples() const;
};

AnalyticProbe build_probe(double f_o, double c_mag, double fs);

/// Probe output y[n] = sum_k x[k] h((n - k) / fs) for every n of the input.
std::vector<std::complex<double>> apply_probe(const SampledSignal& x, const AnalyticProbe& probe);

struct InstantaneousFrequency {
  SampledSignal frequency;          ///< Hz, length len(y) - 1; masked entries hold the nearest valid value
  std::vector<std::uint8_t> valid;  ///< 0 where |y| fell below the floor at either end of the step
  std::size_t masked = 0;
};

/// f_i[n] = angle(y[n+1] / y[n]) * fs / (2 pi). Steps touching a sample whose magnitude
/// is below floor_ratio * median|y| are masked. Throws if every step is masked.
InstantaneousFrequency instantaneous_frequency(std::span<const std::complex<double>> y, double fs,
                                               double floor_ratio = 1e-6);

/// Unwrapped fundamental phase on a contiguous run of samples.
struct PhaseTrajectory {
  double fs = 0.0;
  std::size_t first_sample = 0;
  std::vector<double> phase;  ///< radians, strictly increasing

  [[nodiscard]] double time(std::size_t i) const { return static_cast<double>(first_sample + i) / fs; }
  [[nodiscard]] std::size_t size() const noexcept { return phase.size(); }
  /// Phase at an arbitrary time, linear interpolation, linear extrapolation at the ends.
  [[nodiscard]] double phase_at(double t) const;
  /// Least-squares slope in rad/s.
  [[nodiscard]] double slope() const;
  [[nodiscard]] bool strictly_increasing() const;
};

/// Filters with the probe, restricts to samples where the whole probe support lies inside
/// the recording, and accumulates the instantaneous frequency. The trajectory starts at
/// the absolute phase of the first valid sample. Throws ProcessingError when the
/// fundamental is not detected.
PhaseTrajectory track_phase(const SampledSignal& recorded, const AnalyticProbe& probe);

/// Monotone map from receiver (AD) time to source (DA) time, seconds.
class WarpMap {
 public:
  WarpMap(std::vector<double> t_ad, std::vector<double> t_da);

  static WarpMap identity(double t_begin, double t_end);

  [[nodiscard]] std::span<const double> t_ad() const noexcept { return t_ad_; }
  [[nodiscard]] std::span<const double> t_da() const noexcept { return t_da_; }
  [[nodiscard]] std::size_t size() const noexcept { return t_ad_.size(); }

  /// t_DA(t_AD), linear interpolation inside the grid.
  [[nodiscard]] double da_at(double t_ad) const;
  /// Inverse map t_AD(t_DA).
  [[nodiscard]] double ad_at(double t_da) const;

  [[nodiscard]] bool covers_da(double lo, double hi) const;

  /// Least-squares slope dt_DA/dt_AD.
  [[nodiscard]] double slope() const;

  /// t_DA - t_AD at every grid point.
  [[nodiscard]] std::vector<double> deviation() const;

  /// Copy extended by linear extrapolation (end-segment slopes) so that the DA range
  /// covers [t_da_lo, t_da_hi].
  [[nodiscard]] WarpMap extended(double t_da_lo, double t_da_hi) const;

  /// Map whose DA axis is this map's AD axis and vice versa.
  [[nodiscard]] WarpMap inverse() const { return WarpMap(t_da_, t_ad_); }

 private:
  std::vector<double> t_ad_;
  std::vector<double> t_da_;
};

struct WarpMapOptions {
  std::size_t grid_step = 64;     ///< AD samples between grid points
  double expected_offset = 0.0;   ///< coarse t_DA - t_AD at the start, resolves whole cycles
};

/// t_DA(t_AD) = phi_DA^{-1}(phi_AD(t_AD)) on the overlapping phase range.
WarpMap build_warp_map(const PhaseTrajectory& phase_da, const PhaseTrajectory& phase_ad,
                       const WarpMapOptions& options = {});

/// Resamples a receiver-clock recording onto the source time axis: out[n] = x(t_AD(n / fs)).
/// The map must cover the DA span [0, (len - 1) / fs].
SampledSignal apply_warp(const SampledSignal& signal, const WarpMap& map,
                         const SincInterpolator& interpolator = SincInterpolator());

/// Index of the first sample whose magnitude reaches `fraction` of the global peak.
std::size_t first_peak_index(std::span<const double> x, double fraction = 0.5);

}  // namespace fvnlab
