#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fvnlab/align.hpp"
#include "fvnlab/codes.hpp"
#include "fvnlab/compressor.hpp"
#include "fvnlab/sequencer.hpp"
#include "fvnlab/shaping.hpp"
#include "fvnlab/signal.hpp"
#include "fvnlab/simharness.hpp"
#include "fvnlab/velvet.hpp"

namespace fvnlab {

/// Parameters shared by every command. Unset optionals take documented defaults.
struct RunConfig {
  double fs = 44100.0;
  double sigma_t = 0.01;
  std::optional<double> fd_hz;
  std::optional<double> bw_hz;
  std::optional<double> phi_max;
  std::optional<std::size_t> dft_size;
  std::size_t codes = 1;     ///< K_codes
  std::size_t channels = 1;  ///< FVN sequences; channel i uses code row i
  std::size_t period_no = 8820;
  std::optional<std::size_t> reps;  ///< default 2 N + 2 guard
  std::size_t guard_periods = 2;
  std::uint64_t seed = 1;

  std::optional<std::vector<double>> shape;  ///< shaping coefficients a_1..a_p
  std::optional<double> shape_slope_db_per_oct;

  std::optional<SimTarget> target;
  std::optional<double> drift_ppm;  ///< overrides the target drift with a linear drift

  std::optional<double> truncate_ms;
  double calibration_db = 0.0;
  double c_mag = 1.0;

  std::string out_dir = ".";
  std::string manifest_path;
  std::string recording_path;
  std::string background_path;
  std::string ir_path;

  [[nodiscard]] std::size_t repetitions() const;
  [[nodiscard]] FvnSpec fvn_spec(std::size_t channel) const;
  void validate() const;
};

/// Reads a JSON config; keys mirror RunConfig fields ("target" may be an object or a path,
/// "shape" may be an array or a path).
RunConfig parse_run_config(const std::string& json_text, const std::string& base_dir = ".");
RunConfig load_run_config(const std::string& path);

/// Everything needed to rebuild the test signal and demultiplex a recording of it.
struct Manifest {
  double fs = 44100.0;
  std::uint64_t seed = 0;
  std::vector<FvnSpec> fvn;  ///< per channel
  std::vector<std::size_t> code_rows;
  std::size_t code_matrix_rows = 1;
  std::size_t period_no = 0;
  std::size_t repetitions = 0;
  std::size_t guard_periods = 2;
  std::size_t signal_length = 0;
  std::optional<std::vector<double>> shaping;
  std::vector<std::string> channel_files;
  std::string signal_file;

  [[nodiscard]] std::size_t channels() const { return fvn.size(); }
  [[nodiscard]] AveragingPlan averaging_plan() const { return {period_no, repetitions, guard_periods}; }
  void validate() const;
};

std::string manifest_to_json(const Manifest& m);
Manifest parse_manifest(const std::string& json_text);
Manifest load_manifest(const std::string& path);

struct GeneratedSignals {
  Manifest manifest;
  std::vector<SampledSignal> channels;  ///< shaped, code-modulated sequences
  SampledSignal mix;                    ///< sum of channels
  std::vector<SampledSignal> units;     ///< unshaped placement units, per channel
};

GeneratedSignals generate_signals(const RunConfig& config);
/// Bit-identical rebuild from a manifest.
GeneratedSignals regenerate(const Manifest& manifest);

/// Inverse shaping (if any), then demultiplex; nonlinear separation when there are two or more channels.
MeasurementResult measure_recording(const SampledSignal& recording, const Manifest& manifest,
                                    const std::optional<SampledSignal>& background = std::nullopt);

struct AlignmentResult {
  WarpMap map;                 ///< t_DA = phi_DA^-1(phi_AD(t_AD)), including the system phase delay at f_o
  double phase_delay_s = 0.0;  ///< -t_DA extrapolated to t_AD = 0
  SampledSignal aligned;       ///< resampled with map shifted by phase_delay_s, so latency is kept
  PhaseTrajectory reference_phase;
  PhaseTrajectory recorded_phase;
};

/// Tracks the fundamental (f_o = fs / period_no) of the regenerated test signal and of
/// the recording, builds the warp map and resamples the recording onto the source axis.
/// Only the clock correction is applied: the map is anchored to be the identity at t = 0.
AlignmentResult align_recording(const SampledSignal& recording, const Manifest& manifest, double c_mag = 1.0);

/// Shaping coefficients as a plain JSON array.
std::vector<double> load_shaping_coefficients(const std::string& path);
void save_shaping_coefficients(const std::string& path, std::span<const double> a);

void write_warp_csv(const std::string& path, const WarpMap& map);

// File-based commands. Each returns the list of files written.
std::vector<std::string> cmd_generate(const RunConfig& config);
std::vector<std::string> cmd_simulate(const RunConfig& config);
std::vector<std::string> cmd_measure(const RunConfig& config);
std::vector<std::string> cmd_analyze(const RunConfig& config);
std::vector<std::string> cmd_align(const RunConfig& config);

}  // namespace fvnlab
