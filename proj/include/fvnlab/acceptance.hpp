#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "fvnlab/window.hpp"

namespace fvnlab::acceptance {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

struct Options {
  /// Coefficient table checked by the window criteria; replace to exercise failure paths.
  std::array<double, 6> coefficients = kSixTermCoefficients;
};

/// Sidelobe analysis of a cosine-series window: sampled over its support with L points,
/// zero-padded by `pad`. Frequencies in units of 1 / support.
struct WindowSpectrumReport {
  double highest_sidelobe_db = 0.0;
  double decay_db_per_octave = 0.0;  ///< fit over sidelobe peaks in [8, 32] units
  double first_null = 0.0;
};

WindowSpectrumReport analyze_window(std::span<const double> coefficients, std::size_t length = 1024,
                                    std::size_t pad = 64);

/// Sinusoid fit of a deviation curve: amplitude and period by least squares with a free frequency.
struct SinusoidFit {
  double amplitude = 0.0;
  double period = 0.0;
  double offset = 0.0;
};
SinusoidFit fit_sinusoid(std::span<const double> t, std::span<const double> y, double period_guess);

CriterionResult allpass_identity(const Options& = {});
CriterionResult window_quality(const Options& = {});
CriterionResult coefficient_identities(const Options& = {});
CriterionResult code_orthogonality(const Options& = {});
CriterionResult multichannel_demux(const Options& = {});
CriterionResult nonlinearity_separation(const Options& = {});
CriterionResult shaping_roundtrip(const Options& = {});
CriterionResult third_octave_smoothing(const Options& = {});
CriterionResult drift_recovery(const Options& = {});
CriterionResult determinism(const Options& = {});

/// Criteria that fail by analysis rather than by defect. They are still run and reported
/// as FAIL; the gate tolerates their failure unless strict.
inline constexpr std::array<int, 1> kKnownUnattainable{6};

[[nodiscard]] bool known_unattainable(int id);

/// True when every criterion passed, or (non-strict) every failure is known unattainable.
[[nodiscard]] bool gate_passes(const std::vector<CriterionResult>& results, bool strict = false);

/// All ten criteria in order. `on_result` is called as each finishes.
std::vector<CriterionResult> run_all(const Options& options = {},
                                     const std::function<void(const CriterionResult&)>& on_result = {});

/// "[PASS] 1 all-pass identity (0.42 s): ..." style line.
std::string format(const CriterionResult& r);

}  // namespace fvnlab::acceptance
