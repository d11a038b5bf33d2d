#include "fvnlab/velvet.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "fvnlab/fft.hpp"
#include "fvnlab/window.hpp"

namespace fvnlab {

// ----------------------------------------------------------------------------
// Original velvet noise
// ----------------------------------------------------------------------------

void OvnSpec::validate() const {
  require(std::isfinite(mean_interval) && mean_interval > 1.0,
          "OVN mean pulse interval must exceed one sample");
  require(num_pulses >= 1, "OVN needs at least one pulse");
  require(fs > 0.0, "OVN sampling rate must be positive");
}

SampledSignal ovn_from_draws(double mean_interval, std::span<const double> jitter,
                             std::span<const int> signs, double fs) {
  require(mean_interval > 1.0, "OVN mean pulse interval must exceed one sample");
  require(jitter.size() == signs.size() && !jitter.empty(), "OVN draws must be non-empty and paired");
  const auto length =
      static_cast<std::size_t>(std::ceil(static_cast<double>(jitter.size()) * mean_interval));
  std::vector<double> out(length, 0.0);
  for (std::size_t m = 0; m < jitter.size(); ++m) {
    require(signs[m] == 1 || signs[m] == -1, "OVN pulse signs must be +1 or -1");
    require(jitter[m] >= 0.0 && jitter[m] <= 1.0, "OVN jitter must lie in [0, 1]");
    const double pos = static_cast<double>(m) * mean_interval + jitter[m] * (mean_interval - 1.0);
    const auto n = static_cast<std::size_t>(std::llround(pos));
    out[std::min(n, length - 1)] = signs[m];
  }
  return SampledSignal(std::move(out), fs);
}

SampledSignal generate_ovn(const OvnSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::vector<double> jitter(spec.num_pulses);
  std::vector<int> signs(spec.num_pulses);
  for (std::size_t m = 0; m < spec.num_pulses; ++m) {
    jitter[m] = uniform(rng);
    signs[m] = 2 * static_cast<int>(std::lround(uniform(rng))) - 1;
  }
  return ovn_from_draws(spec.mean_interval, jitter, signs, spec.fs);
}

// ----------------------------------------------------------------------------
// FVN spec
// ----------------------------------------------------------------------------

std::size_t FvnSpec::default_dft_size(double sigma_t, double fs) {
  require(sigma_t > 0.0 && fs > 0.0, "sigma_t and fs must be positive");
  std::size_t k = 2;
  while (static_cast<double>(k) / fs < 10.0 * sigma_t) k <<= 1;
  return k;
}

FvnSpec FvnSpec::with_defaults(double sigma_t, double fs, std::uint64_t seed) {
  FvnSpec spec;
  spec.sigma_t = sigma_t;
  spec.fd_hz = 1.0 / (5.0 * sigma_t);
  spec.bw_hz = 2.0 * spec.fd_hz;
  spec.phi_max = std::numbers::pi / 4.0;
  spec.fs = fs;
  spec.dft_size = default_dft_size(sigma_t, fs);
  spec.seed = seed;
  return spec;
}

void FvnSpec::validate() const {
  require(std::isfinite(sigma_t) && sigma_t > 0.0, "FVN sigma_t must be positive");
  require(std::isfinite(fd_hz) && fd_hz > 0.0, "FVN frequency spacing F_d must be positive");
  require(std::isfinite(bw_hz) && bw_hz > 0.0, "FVN unit bandwidth B_w must be positive");
  require(phi_max > 0.0 && phi_max <= std::numbers::pi, "FVN phi_max must lie in (0, pi]");
  require(std::isfinite(fs) && fs > 0.0, "FVN sampling rate must be positive");
  require(dft_size >= 2 && dft_size % 2 == 0, "FVN DFT size must be even");
  require(static_cast<double>(dft_size) / fs >= 10.0 * sigma_t * (1.0 - 1e-12),
          "FVN DFT buffer must span at least 10 sigma_t");
}

// ----------------------------------------------------------------------------
// Phase spectrum
// ----------------------------------------------------------------------------

double PhaseSpectrum::symmetry_error() const noexcept {
  const std::size_t k_total = phase.size();
  if (k_total == 0) return 0.0;
  double err = std::max(std::abs(phase[0]), std::abs(phase[k_total / 2]));
  for (std::size_t k = 1; k < k_total; ++k) err = std::max(err, std::abs(phase[k_total - k] + phase[k]));
  return err;
}

std::vector<PhaseUnitPlacement> draw_phase_units(const FvnSpec& spec) {
  spec.validate();
  const double spacing = spec.spacing_bins();
  if (spacing < 1.0)
    throw ValidationError("FVN frequency spacing is below one DFT bin; centers would collide");
  const double nyquist_bin = static_cast<double>(spec.dft_size / 2);
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::vector<PhaseUnitPlacement> units;
  for (std::size_t m = 0;; ++m) {
    const double r1 = uniform(rng);
    const double r2 = uniform(rng);
    const double center = static_cast<double>(m) * spacing + r1 * (spacing - 1.0);
    if (center > nyquist_bin) break;
    const double sign = 2.0 * std::round(r2) - 1.0;
    units.push_back({center, sign * spec.phi_max});
  }
  return units;
}

PhaseSpectrum phase_from_units(const FvnSpec& spec, std::span<const PhaseUnitPlacement> units) {
  spec.validate();
  const std::size_t k_total = spec.dft_size;
  const std::size_t half = k_total / 2;
  const double kd = static_cast<double>(k_total);
  const double half_width = spec.unit_half_width_bins();
  require(half_width < kd / 4.0, "FVN phase unit is too wide for the DFT buffer");

  // Evaluated on bins 0..K/2 with the signed (circular) distance to each
  // center and to its mirror image at -center; the upper half follows by symmetry.
  std::vector<double> upper(half + 1, 0.0);
  auto add_range = [&](double lo, double hi, auto&& term) {
    const auto first = static_cast<long long>(std::ceil(std::max(lo, 0.0)));
    const auto last = static_cast<long long>(std::floor(std::min(hi, static_cast<double>(half))));
    for (long long k = first; k <= last; ++k) upper[static_cast<std::size_t>(k)] += term(static_cast<double>(k));
  };
  for (const auto& u : units) {
    const double c = u.center_bin;
    const double s = u.amplitude;
    add_range(c - half_width, c + half_width, [&](double k) { return s * phase_unit(k - c, half_width); });
    // Mirror at -c.
    add_range(-c - half_width, -c + half_width, [&](double k) { return -s * phase_unit(k + c, half_width); });
    // Mirror at K - c (wraps around the Nyquist bin).
    add_range(kd - c - half_width, kd - c + half_width,
              [&](double k) { return -s * phase_unit(k + c - kd, half_width); });
  }

  PhaseSpectrum out{std::vector<double>(k_total, 0.0)};
  for (std::size_t k = 1; k < half; ++k) {
    out.phase[k] = upper[k];
    out.phase[k_total - k] = -upper[k];
  }
  return out;
}

PhaseSpectrum fvn_phase(const FvnSpec& spec) {
  const auto units = draw_phase_units(spec);
  return phase_from_units(spec, units);
}

// ----------------------------------------------------------------------------
// Synthesis
// ----------------------------------------------------------------------------

SampledSignal synthesize_from_phase(const PhaseSpectrum& phase, double fs) {
  require(phase.size() >= 2, "phase spectrum is empty");
  std::vector<fft::Complex> spectrum(phase.size());
  for (std::size_t k = 0; k < phase.size(); ++k) spectrum[k] = std::polar(1.0, phase.phase[k]);
  const auto h = fft::inverse(spectrum);
  double peak = 0.0;
  double residue = 0.0;
  std::vector<double> real(h.size());
  for (std::size_t n = 0; n < h.size(); ++n) {
    real[n] = h[n].real();
    peak = std::max(peak, std::abs(h[n]));
    residue = std::max(residue, std::abs(h[n].imag()));
  }
  if (residue > 1e-10 * peak)
    throw ProcessingError("FVN synthesis left an imaginary residue; phase spectrum is not odd-symmetric");
  return SampledSignal(std::move(real), fs);
}

SampledSignal synthesize_unit_fvn(const FvnSpec& spec) {
  return synthesize_from_phase(fvn_phase(spec), spec.fs);
}

SampledSignal center_circularly(const SampledSignal& unit) {
  std::vector<double> rotated(unit.samples().begin(), unit.samples().end());
  std::rotate(rotated.begin(), rotated.begin() + static_cast<std::ptrdiff_t>(rotated.size() - rotated.size() / 2),
              rotated.end());
  return SampledSignal(std::move(rotated), unit.fs());
}

SampledSignal placement_unit(const FvnSpec& spec) { return center_circularly(synthesize_unit_fvn(spec)); }

// ----------------------------------------------------------------------------
// Envelope diagnostics
// ----------------------------------------------------------------------------

namespace {

std::vector<double> analytic_magnitude(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<fft::Complex> buf(n);
  for (std::size_t i = 0; i < n; ++i) buf[i] = x[i];
  auto spec = fft::forward(buf);
  for (std::size_t k = 1; k < (n + 1) / 2; ++k) spec[k] *= 2.0;
  for (std::size_t k = n / 2 + 1; k < n; ++k) spec[k] = 0.0;
  const auto analytic = fft::inverse(spec);
  std::vector<double> mag(n);
  for (std::size_t i = 0; i < n; ++i) mag[i] = std::abs(analytic[i]);
  return mag;
}

std::vector<double> circular_moving_average(std::span<const double> x, std::size_t width) {
  const std::size_t n = x.size();
  width = std::clamp<std::size_t>(width, 1, n);
  const std::size_t lead = width / 2;
  std::vector<double> prefix(2 * n + 1, 0.0);
  for (std::size_t i = 0; i < 2 * n; ++i) prefix[i + 1] = prefix[i] + x[i % n];
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    // Window [i - lead, i - lead + width) taken modulo n, shifted by n to stay positive.
    const std::size_t start = i + n - lead;
    const std::size_t a = start % n;
    out[i] = (prefix[a + width] - prefix[a]) / static_cast<double>(width);
  }
  return out;
}

}  // namespace

EnvelopeDiagnostics envelope_diagnostics(const SampledSignal& unit, double sigma_t) {
  require(sigma_t > 0.0, "sigma_t must be positive");
  const std::size_t n = unit.size();
  const double fs = unit.fs();
  const auto envelope = analytic_magnitude(unit.samples());
  const auto width = static_cast<std::size_t>(std::max(1.0, std::round(sigma_t / 8.0 * fs)));
  const auto smoothed = circular_moving_average(envelope, width);

  EnvelopeDiagnostics d;
  d.peak_index = static_cast<std::size_t>(
      std::distance(smoothed.begin(), std::max_element(smoothed.begin(), smoothed.end())));

  const double step = sigma_t / 4.0 * fs;
  const auto nd = static_cast<long long>(n);
  auto sample_at = [&](int j) {
    long long idx = static_cast<long long>(d.peak_index) + std::llround(j * step);
    idx %= nd;
    if (idx < 0) idx += nd;
    return smoothed[static_cast<std::size_t>(idx)];
  };
  double center = 0.0;
  for (int j = -4; j <= 4; ++j) center += sample_at(j) * sample_at(j);
  double flank = 0.0;
  for (int j = 5; j <= 9; ++j) flank += sample_at(j) * sample_at(j) + sample_at(-j) * sample_at(-j);
  d.center_rms = std::sqrt(center / 9.0);
  d.flank_rms = std::sqrt(flank / 10.0);

  double total = 0.0;
  double first = 0.0;
  double second = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    long long off = static_cast<long long>(i) - static_cast<long long>(d.peak_index);
    if (off >= nd / 2) off -= nd;
    if (off < -nd / 2) off += nd;
    const double e = envelope[i] * envelope[i];
    const double t = static_cast<double>(off);
    total += e;
    first += t * e;
    second += t * t * e;
  }
  const double mean = first / total;
  d.effective_duration = std::sqrt(std::max(0.0, second / total - mean * mean)) / fs;
  d.smooth = d.flank_ratio() < kSmoothFlankRatio;
  return d;
}

EnvelopeDiagnostics envelope_diagnostics(const FvnSpec& spec) {
  return envelope_diagnostics(synthesize_unit_fvn(spec), spec.sigma_t);
}

}  // namespace fvnlab
