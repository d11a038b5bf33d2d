#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fvnlab/signal.hpp"

namespace fvnlab {

// ---------------------------------------------------------------------------
// Original velvet noise: one random-sign unit pulse at a jittered position in
// each segment of (average) length mean_interval.
// ---------------------------------------------------------------------------

struct OvnSpec {
  double mean_interval = 14.7;  ///< average pulse interval Td in samples, > 1
  std::size_t num_pulses = 1000;
  std::uint64_t seed = 0;
  double fs = 44100.0;

  void validate() const;
};

/// Sparse +/-1 pulse sequence of length ceil(num_pulses * Td).
SampledSignal generate_ovn(const OvnSpec& spec);

/// Deterministic core of generate_ovn: pulse m sits at round(m*Td + jitter[m]*(Td-1))
/// with sign signs[m] (must be +1 or -1).
SampledSignal ovn_from_draws(double mean_interval, std::span<const double> jitter,
                             std::span<const int> signs, double fs);

// ---------------------------------------------------------------------------
// Frequency-domain velvet noise (FVN).
// ---------------------------------------------------------------------------

struct FvnSpec {
  double sigma_t = 0.1;        ///< duration parameter, seconds
  double fd_hz = 2.0;          ///< average spacing of phase units, Hz
  double bw_hz = 4.0;          ///< nominal phase-unit bandwidth B_w, Hz
  double phi_max = 0.7853981633974483;
  double fs = 44100.0;
  std::size_t dft_size = 65536;
  std::uint64_t seed = 0;

  /// F_d = 1/(5 sigma_t), B_w = 2 F_d, phi_max = pi/4, K from default_dft_size().
  static FvnSpec with_defaults(double sigma_t, double fs, std::uint64_t seed);

  /// Smallest power of two K with K/fs >= 10 sigma_t.
  static std::size_t default_dft_size(double sigma_t, double fs);

  [[nodiscard]] double bin_width_hz() const { return fs / static_cast<double>(dft_size); }
  [[nodiscard]] double spacing_bins() const { return fd_hz / bin_width_hz(); }
  /// Support half-width B of one phase unit in bins. B = 5 * B_w (B_w = B / M, M = 5).
  [[nodiscard]] double unit_half_width_bins() const { return 5.0 * bw_hz / bin_width_hz(); }

  void validate() const;

  friend bool operator==(const FvnSpec&, const FvnSpec&) = default;
};

/// Phase in radians per DFT bin on the circular axis [0, K). Odd symmetric.
struct PhaseSpectrum {
  std::vector<double> phase;

  [[nodiscard]] std::size_t size() const noexcept { return phase.size(); }
  /// max_k |phase[K-k] + phase[k]| including the DC and Nyquist bins.
  [[nodiscard]] double symmetry_error() const noexcept;
};

/// A phase unit placement: real-valued center bin and signed amplitude (+/- phi_max).
struct PhaseUnitPlacement {
  double center_bin;
  double amplitude;
};

/// Random center/sign draws for a spec, centers in [0, K/2].
std::vector<PhaseUnitPlacement> draw_phase_units(const FvnSpec& spec);

/// Accumulates placements into an odd-symmetric phase spectrum of size spec.dft_size.
PhaseSpectrum phase_from_units(const FvnSpec& spec, std::span<const PhaseUnitPlacement> units);

/// draw_phase_units followed by phase_from_units.
PhaseSpectrum fvn_phase(const FvnSpec& spec);

/// Real inverse DFT of exp(j phase). Throws ProcessingError if the imaginary
/// residue exceeds 1e-10 of the peak. The envelope sits around sample 0 (circularly).
SampledSignal synthesize_from_phase(const PhaseSpectrum& phase, double fs);

SampledSignal synthesize_unit_fvn(const FvnSpec& spec);

/// Circular rotation by K/2 so the envelope sits mid-buffer. This is the waveform
/// that gets placed into test sequences and used for pulse compression.
SampledSignal center_circularly(const SampledSignal& unit);

/// Unit FVN ready for sequencing: synthesize_unit_fvn + center_circularly.
SampledSignal placement_unit(const FvnSpec& spec);

struct EnvelopeDiagnostics {
  double center_rms = 0.0;          ///< RMS of 9 envelope points at sigma_t/4 spacing around the peak
  double flank_rms = 0.0;           ///< RMS of the 10 points at offsets 5..9 steps on either side
  double effective_duration = 0.0;  ///< sqrt of the second central moment of the squared envelope, s
  std::size_t peak_index = 0;
  bool smooth = false;              ///< flank_rms / center_rms below kSmoothFlankRatio

  [[nodiscard]] double flank_ratio() const { return center_rms > 0 ? flank_rms / center_rms : 0.0; }
};

/// flank/center ratio under which an envelope is reported as smooth. Ratio-2 designs
/// land near 0.1, ratio-1 designs near 0.3, ratio-0.5 designs near 0.55.
inline constexpr double kSmoothFlankRatio = 0.2;

EnvelopeDiagnostics envelope_diagnostics(const FvnSpec& spec);
EnvelopeDiagnostics envelope_diagnostics(const SampledSignal& unit, double sigma_t);

}  // namespace fvnlab
