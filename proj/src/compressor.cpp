#include "fvnlab/compressor.hpp"

#include <algorithm>
#include <cmath>

#include "fvnlab/fft.hpp"

namespace fvnlab {

double MeasurementResult::pooled_deviation_rms() const {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& d : deviations) {
    sum += d.energy();
    count += d.size();
  }
  return count == 0 ? 0.0 : std::sqrt(sum / static_cast<double>(count));
}

AveragingWindow averaging_window(const AveragingPlan& plan, std::size_t code_length) {
  require(plan.period >= 1, "averaging period must be at least one sample");
  require(code_length >= 1, "code length must be positive");
  if (plan.repetitions < 2 * plan.guard_periods + code_length)
    throw ValidationError("too few periods: need at least one code length plus guard periods at each end");
  const std::size_t interior = plan.repetitions - 2 * plan.guard_periods;
  const std::size_t count = (interior / code_length) * code_length;
  return {plan.guard_periods + (interior - count) / 2, count};
}

SampledSignal pulse_compress(const SampledSignal& recorded, const SampledSignal& unit) {
  require(recorded.fs() == unit.fs(), "pulse_compress: sampling rates differ");
  require(recorded.size() >= unit.size(), "pulse_compress: recording is shorter than the unit");
  std::vector<double> reversed(unit.samples().rbegin(), unit.samples().rend());
  auto full = fft::convolve(recorded.samples(), reversed);
  const std::size_t offset = unit.size() - 1;
  std::vector<double> out(full.begin() + static_cast<std::ptrdiff_t>(offset),
                          full.begin() + static_cast<std::ptrdiff_t>(offset + recorded.size()));
  return SampledSignal(std::move(out), recorded.fs());
}

SampledSignal synchronized_average(const SampledSignal& compressed, std::span<const int> code_row,
                                   const AveragingPlan& plan) {
  require(!code_row.empty(), "code row is empty");
  const auto window = averaging_window(plan, code_row.size());
  const std::size_t needed = (window.first_period + window.count) * plan.period;
  if (compressed.size() < needed)
    throw ValidationError("too few periods: compressed signal ends before the averaging window");
  std::vector<double> acc(plan.period, 0.0);
  const auto x = compressed.samples();
  for (std::size_t s = window.first_period; s < window.first_period + window.count; ++s) {
    const double w = code_row[s % code_row.size()];
    const double* seg = x.data() + s * plan.period;
    for (std::size_t n = 0; n < plan.period; ++n) acc[n] += w * seg[n];
  }
  const double scale = 1.0 / static_cast<double>(window.count);
  for (auto& v : acc) v *= scale;
  return SampledSignal(std::move(acc), compressed.fs());
}

MeasurementResult demultiplex(const SampledSignal& recorded, std::span<const DemuxChannel> channels,
                              const CodeMatrix& codes, const AveragingPlan& plan) {
  require(!channels.empty(), "demultiplex needs at least one channel");
  MeasurementResult result;
  result.plan = plan;
  result.code_length = codes.length();
  result.window = averaging_window(plan, codes.length());
  for (const auto& ch : channels) {
    require(ch.unit.fs() == recorded.fs(), "demultiplex: unit and recording sampling rates differ");
    const auto compressed = pulse_compress(recorded, ch.unit);
    result.per_code_irs.push_back(synchronized_average(compressed, codes.row(ch.code_row), plan));
    result.code_rows.push_back(ch.code_row);
  }
  return result;
}

MeasurementResult separate_nonlinear(MeasurementResult result) {
  const auto& irs = result.per_code_irs;
  if (irs.size() < 2) throw ValidationError("nonlinear separation needs at least two codes");
  const std::size_t len = irs.front().size();
  const double fs = irs.front().fs();
  std::vector<double> mean(len, 0.0);
  for (const auto& ir : irs) {
    require(ir.size() == len && ir.fs() == fs, "per-code responses differ in shape");
    for (std::size_t n = 0; n < len; ++n) mean[n] += ir[n];
  }
  for (auto& v : mean) v /= static_cast<double>(irs.size());

  result.deviations.clear();
  result.deviation_rms.clear();
  std::vector<PowerSpectrum> spectra;
  for (const auto& ir : irs) {
    std::vector<double> dev(len);
    for (std::size_t n = 0; n < len; ++n) dev[n] = ir[n] - mean[n];
    SampledSignal d(std::move(dev), fs);
    result.deviation_rms.push_back(d.rms());
    if (len >= 2) spectra.push_back(power_spectrum(d, len));
    result.deviations.push_back(std::move(d));
  }
  if (!spectra.empty()) result.pooled_deviation_power = average_power(spectra);
  result.linear_ir = SampledSignal(std::move(mean), fs);
  return result;
}

SampledSignal noise_floor(const SampledSignal& background, std::span<const DemuxChannel> channels,
                          const CodeMatrix& codes, const AveragingPlan& plan, std::size_t measurement_length) {
  if (background.size() != measurement_length)
    throw ValidationError("background recording length does not match the measurement");
  const auto demuxed = demultiplex(background, channels, codes, plan);
  const std::size_t len = demuxed.per_code_irs.front().size();
  std::vector<double> mean(len, 0.0);
  for (const auto& ir : demuxed.per_code_irs)
    for (std::size_t n = 0; n < len; ++n) mean[n] += ir[n];
  for (auto& v : mean) v /= static_cast<double>(demuxed.per_code_irs.size());
  return SampledSignal(std::move(mean), background.fs());
}

}  // namespace fvnlab
