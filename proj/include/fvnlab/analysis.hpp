#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "fvnlab/signal.hpp"

namespace fvnlab {

/// Power on a uniform grid from DC to fs/2 (bins k * fs / L, k = 0..L/2).
struct PowerSpectrum {
  std::vector<double> freqs;
  std::vector<double> power;
  double fs = 0.0;

  [[nodiscard]] double bin_width() const { return freqs.size() > 1 ? freqs[1] - freqs[0] : 0.0; }
};

/// One-third-octave smoothed spectrum; only frequencies whose full window fits
/// inside [first non-DC bin, fs/2] are present.
struct SmoothedSpectrum {
  std::vector<double> freqs;
  std::vector<double> power;     ///< linear smoothed power Q(f)
  std::vector<double> level_db;  ///< 10 log10(Q / reference) + calibration_db
};

/// |DFT|^2 of the first analysis_length samples (rectangular truncation).
PowerSpectrum power_spectrum(const SampledSignal& ir, std::size_t analysis_length);

/// Mean of several power spectra of equal shape.
PowerSpectrum average_power(std::span<const PowerSpectrum> spectra);

struct SmoothingOptions {
  double reference_power = 1.0;
  double calibration_db = 0.0;
};

/// Q(f) = 1/(f_H - f_L) * integral_{f_L}^{f_H} P(v) dv with f_H = 2^(1/6) f, f_L = 2^(-1/6) f,
/// P linearly interpolated between bins (trapezoidal rule with exact partial bins).
SmoothedSpectrum third_octave_smooth(const PowerSpectrum& spectrum, const SmoothingOptions& options = {});

/// Integral of the piecewise-linear interpolant of (freqs, power) over [lo, hi].
double integrate_piecewise_linear(std::span<const double> freqs, std::span<const double> power, double lo,
                                  double hi);

/// Writes "frequency_Hz,level_dB" followed by one row per frequency.
void write_spectrum_csv(std::ostream& out, const SmoothedSpectrum& spectrum);

/// Least-squares slope of level_db against log2(f) over [f_low, f_high], dB per octave.
double octave_slope_db(const SmoothedSpectrum& spectrum, double f_low, double f_high);

}  // namespace fvnlab
