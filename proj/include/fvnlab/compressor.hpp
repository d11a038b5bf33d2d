#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "fvnlab/analysis.hpp"
#include "fvnlab/codes.hpp"
#include "fvnlab/signal.hpp"

namespace fvnlab {

/// Timing of a periodic test signal as seen by the averaging stage.
struct AveragingPlan {
  std::size_t period = 0;         ///< samples between unit placements
  std::size_t repetitions = 0;    ///< number of placements in the test signal
  std::size_t guard_periods = 2;  ///< placements skipped at each end
};

/// Contiguous block of periods used for synchronized averaging.
struct AveragingWindow {
  std::size_t first_period = 0;
  std::size_t count = 0;
};

/// Largest multiple of code_length that fits between the guards, centered.
AveragingWindow averaging_window(const AveragingPlan& plan, std::size_t code_length);

/// One multiplexed input: the unit waveform it was built from and its code row.
struct DemuxChannel {
  SampledSignal unit;
  std::size_t code_row = 0;
};

struct MeasurementResult {
  std::vector<SampledSignal> per_code_irs;
  std::optional<SampledSignal> linear_ir;
  std::vector<SampledSignal> deviations;
  std::optional<SampledSignal> noise_ir;

  std::vector<double> deviation_rms;                    ///< per code, filled by separate_nonlinear
  std::optional<PowerSpectrum> pooled_deviation_power;  ///< mean |DFT|^2 of deviations

  AveragingPlan plan;
  AveragingWindow window;
  std::size_t code_length = 0;
  std::vector<std::size_t> code_rows;

  /// RMS over all deviation samples pooled together.
  [[nodiscard]] double pooled_deviation_rms() const;
};

/// Cross-correlates the recording with the unit: out[n] = sum_m recorded[m] unit[m - n],
/// n in [0, recorded.size()). A unit placed at sample p compresses to a peak at p.
SampledSignal pulse_compress(const SampledSignal& recorded, const SampledSignal& unit);

/// Averages period-length slices of `compressed` weighted by code_row[s mod N] over the
/// averaging window. Output length = plan.period.
SampledSignal synchronized_average(const SampledSignal& compressed, std::span<const int> code_row,
                                   const AveragingPlan& plan);

/// pulse_compress + synchronized_average for every channel. Channels sharing a code row
/// are not separable; the caller is responsible for assigning distinct rows.
MeasurementResult demultiplex(const SampledSignal& recorded, std::span<const DemuxChannel> channels,
                              const CodeMatrix& codes, const AveragingPlan& plan);

/// Fills linear_ir (mean of per-code IRs), deviations, per-code deviation RMS and the
/// pooled deviation power spectrum. Needs at least two per-code IRs.
MeasurementResult separate_nonlinear(MeasurementResult result);

/// Runs the demultiplex pipeline on a background-only recording of the same length as
/// the measurement and returns the across-channel mean (comparable to linear_ir).
SampledSignal noise_floor(const SampledSignal& background, std::span<const DemuxChannel> channels,
                          const CodeMatrix& codes, const AveragingPlan& plan, std::size_t measurement_length);

}  // namespace fvnlab
