#include "fvnlab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "fvnlab/fft.hpp"

namespace fvnlab {

PowerSpectrum power_spectrum(const SampledSignal& ir, std::size_t analysis_length) {
  require(analysis_length >= 2 && analysis_length <= ir.size(),
          "analysis length must be at least 2 and no longer than the response");
  const auto spec = fft::forward_real(ir.samples().first(analysis_length), analysis_length);
  PowerSpectrum out;
  out.fs = ir.fs();
  out.freqs.resize(spec.size());
  out.power.resize(spec.size());
  for (std::size_t k = 0; k < spec.size(); ++k) {
    out.freqs[k] = static_cast<double>(k) * ir.fs() / static_cast<double>(analysis_length);
    out.power[k] = std::norm(spec[k]);
  }
  return out;
}

PowerSpectrum average_power(std::span<const PowerSpectrum> spectra) {
  require(!spectra.empty(), "average_power needs at least one spectrum");
  PowerSpectrum out = spectra.front();
  for (std::size_t i = 1; i < spectra.size(); ++i) {
    require(spectra[i].power.size() == out.power.size(), "average_power: spectra differ in size");
    for (std::size_t k = 0; k < out.power.size(); ++k) out.power[k] += spectra[i].power[k];
  }
  for (auto& p : out.power) p /= static_cast<double>(spectra.size());
  return out;
}

double integrate_piecewise_linear(std::span<const double> freqs, std::span<const double> power, double lo,
                                  double hi) {
  require(freqs.size() == power.size() && freqs.size() >= 2, "integration grid is malformed");
  require(lo >= freqs.front() && hi <= freqs.back() && lo <= hi, "integration window exceeds the grid");
  auto value_at = [&](std::size_t i, double f) {
    const double t = (f - freqs[i]) / (freqs[i + 1] - freqs[i]);
    return power[i] + t * (power[i + 1] - power[i]);
  };
  // Segment containing lo.
  auto it = std::upper_bound(freqs.begin(), freqs.end(), lo);
  std::size_t i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(std::distance(freqs.begin(), it) - 1, 0));
  i = std::min(i, freqs.size() - 2);
  double total = 0.0;
  double a = lo;
  while (a < hi) {
    const double b = std::min(hi, freqs[i + 1]);
    total += 0.5 * (value_at(i, a) + value_at(i, b)) * (b - a);
    a = b;
    if (i + 2 >= freqs.size()) break;
    ++i;
  }
  return total;
}

SmoothedSpectrum third_octave_smooth(const PowerSpectrum& spectrum, const SmoothingOptions& options) {
  require(spectrum.freqs.size() == spectrum.power.size() && spectrum.freqs.size() >= 3,
          "power spectrum needs at least three bins");
  require(options.reference_power > 0.0, "reference power must be positive");
  const double up = std::exp2(1.0 / 6.0);
  const double down = std::exp2(-1.0 / 6.0);
  const double f_min = spectrum.freqs[1];
  const double f_max = spectrum.freqs.back();
  SmoothedSpectrum out;
  for (std::size_t k = 1; k < spectrum.freqs.size(); ++k) {
    const double f = spectrum.freqs[k];
    const double lo = down * f;
    const double hi = up * f;
    if (lo < f_min || hi > f_max) continue;
    const double q = integrate_piecewise_linear(spectrum.freqs, spectrum.power, lo, hi) / (hi - lo);
    out.freqs.push_back(f);
    out.power.push_back(q);
    out.level_db.push_back(10.0 * std::log10(std::max(q, 1e-300) / options.reference_power) +
                           options.calibration_db);
  }
  return out;
}

void write_spectrum_csv(std::ostream& out, const SmoothedSpectrum& spectrum) {
  out << "frequency_Hz,level_dB\n";
  out << std::setprecision(10);
  for (std::size_t i = 0; i < spectrum.freqs.size(); ++i)
    out << spectrum.freqs[i] << ',' << spectrum.level_db[i] << '\n';
}

double octave_slope_db(const SmoothedSpectrum& spectrum, double f_low, double f_high) {
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < spectrum.freqs.size(); ++i) {
    const double f = spectrum.freqs[i];
    if (f < f_low || f > f_high) continue;
    const double x = std::log2(f);
    const double y = spectrum.level_db[i];
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  require(n >= 2, "slope fit needs at least two frequencies in band");
  const double dn = static_cast<double>(n);
  return (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
}

}  // namespace fvnlab
