#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fvnlab/resample.hpp"
#include "fvnlab/signal.hpp"

namespace fvnlab {

struct NoiseSpec {
  enum class Kind { None, White, Pink };
  Kind kind = Kind::None;
  double level_db = -60.0;  ///< noise RMS in dB
  bool relative = true;     ///< level relative to the clean output RMS, otherwise absolute (re 1.0)
};

struct DriftSpec {
  enum class Kind { None, Linear, Sinusoidal };
  Kind kind = Kind::None;
  double ppm = 0.0;      ///< Linear: t -> t (1 + ppm 1e-6)
  double depth_s = 0.0;  ///< Sinusoidal: t -> t + depth_s sin(2 pi rate_hz t)
  double rate_hz = 0.0;

  static DriftSpec linear(double ppm) { return {Kind::Linear, ppm, 0.0, 0.0}; }
  static DriftSpec sinusoidal(double depth_s, double rate_hz) { return {Kind::Sinusoidal, 0.0, depth_s, rate_hz}; }

  void validate(double fs) const;
};

/// Hammerstein paths summed into one receiver, followed by clock drift and additive noise.
struct SimTarget {
  std::vector<std::vector<double>> paths;  ///< FIR per input channel
  std::vector<double> nonlinearity{0.0, 1.0};  ///< polynomial c_0 + c_1 x + c_2 x^2 + ...
  NoiseSpec noise;
  DriftSpec drift;

  /// Single path with a unit-impulse FIR and nothing else.
  static SimTarget identity(std::size_t channels = 1);

  void validate() const;
};

/// Evaluates the memoryless polynomial samplewise (Horner).
std::vector<double> apply_polynomial(std::span<const double> x, std::span<const double> coefficients);

/// Output length equals the longest input. Deterministic given seed.
SampledSignal simulate(const SimTarget& target, std::span<const SampledSignal> inputs, std::uint64_t seed);

/// out[n] = x(t_n) with t_n the drifted time of sample n, band-limited interpolation.
SampledSignal apply_drift(const SampledSignal& signal, const DriftSpec& drift,
                          const SincInterpolator& interpolator = SincInterpolator());

/// Zero-mean noise of the given RMS; pink noise has a 1/f power tilt above 1 Hz.
std::vector<double> generate_noise(NoiseSpec::Kind kind, std::size_t length, double target_rms, double fs,
                                   std::uint64_t seed);

SimTarget parse_sim_target(const std::string& json_text);
SimTarget load_sim_target(const std::string& path);
std::string sim_target_to_json(const SimTarget& target);

}  // namespace fvnlab
