#include "fvnlab/align.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fvnlab/fft.hpp"
#include "fvnlab/window.hpp"

namespace fvnlab {

// ----------------------------------------------------------------------------
// Probe and instantaneous frequency
// ----------------------------------------------------------------------------

std::size_t AnalyticProbe::support_samples() const {
  return static_cast<std::size_t>(std::llround(support_seconds() * fs));
}

AnalyticProbe build_probe(double f_o, double c_mag, double fs) {
  require(fs > 0.0, "probe sampling rate must be positive");
  require(f_o > 0.0 && f_o < fs / 2.0, "probe fundamental must lie in (0, fs/2)");
  require(c_mag > 0.0 && c_mag <= 2.0, "probe stretch coefficient must lie in (0, 2]");
  AnalyticProbe probe{f_o, c_mag, fs, {}, 0};
  const double half_support = 3.0 / (c_mag * f_o);
  const auto half = static_cast<std::size_t>(std::floor(half_support * fs));
  probe.center = half;
  probe.taps.resize(2 * half + 1);
  for (std::size_t i = 0; i < probe.taps.size(); ++i) {
    const double t = (static_cast<double>(i) - static_cast<double>(half)) / fs;
    // The envelope is the six-term series stretched over the probe support.
    const double env = cosine_series(t / half_support);
    probe.taps[i] = std::polar(env, 2.0 * std::numbers::pi * f_o * t);
  }
  return probe;
}

std::vector<std::complex<double>> apply_probe(const SampledSignal& x, const AnalyticProbe& probe) {
  require(x.fs() == probe.fs, "probe and signal sampling rates differ");
  auto full = fft::convolve(x.samples(), probe.taps);
  return std::vector<std::complex<double>>(full.begin() + static_cast<std::ptrdiff_t>(probe.center),
                                           full.begin() + static_cast<std::ptrdiff_t>(probe.center + x.size()));
}

InstantaneousFrequency instantaneous_frequency(std::span<const std::complex<double>> y, double fs,
                                               double floor_ratio) {
  require(y.size() >= 2, "instantaneous frequency needs at least two samples");
  require(fs > 0.0, "sampling rate must be positive");
  std::vector<double> mags(y.size());
  std::transform(y.begin(), y.end(), mags.begin(), [](const auto& v) { return std::abs(v); });
  std::vector<double> sorted = mags;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2), sorted.end());
  const double floor = floor_ratio * sorted[sorted.size() / 2];

  const std::size_t n = y.size() - 1;
  std::vector<double> hz(n, 0.0);
  std::vector<std::uint8_t> valid(n, 0);
  std::size_t masked = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (mags[i] > floor && mags[i + 1] > floor && mags[i] > 0.0 && mags[i + 1] > 0.0) {
      hz[i] = std::arg(y[i + 1] * std::conj(y[i])) * fs / (2.0 * std::numbers::pi);
      valid[i] = 1;
    } else {
      ++masked;
    }
  }
  if (masked == n) throw ProcessingError("instantaneous frequency undefined: signal magnitude below floor");
  // Masked steps take the nearest preceding valid value (or the first valid one).
  const auto first_valid = static_cast<std::size_t>(std::distance(valid.begin(), std::find(valid.begin(), valid.end(), 1)));
  double last = hz[first_valid];
  for (std::size_t i = 0; i < n; ++i) {
    if (valid[i]) last = hz[i];
    else hz[i] = last;
  }
  return {SampledSignal(std::move(hz), fs), std::move(valid), masked};
}

// ----------------------------------------------------------------------------
// Phase trajectories
// ----------------------------------------------------------------------------

double PhaseTrajectory::phase_at(double t) const {
  require(phase.size() >= 2, "phase trajectory is too short");
  const double pos = t * fs - static_cast<double>(first_sample);
  const double last = static_cast<double>(phase.size() - 1);
  std::size_t i;
  if (pos <= 0.0) i = 0;
  else if (pos >= last) i = phase.size() - 2;
  else i = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(i);
  return phase[i] + frac * (phase[i + 1] - phase[i]);
}

double PhaseTrajectory::slope() const {
  const std::size_t n = phase.size();
  require(n >= 2, "phase trajectory is too short");
  // Centered sums keep the normal equations well conditioned.
  const double tm = (static_cast<double>(n) - 1.0) / 2.0;
  double pm = 0.0;
  for (double p : phase) pm += p;
  pm /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = static_cast<double>(i) - tm;
    sxy += dx * (phase[i] - pm);
    sxx += dx * dx;
  }
  return sxy / sxx * fs;
}

bool PhaseTrajectory::strictly_increasing() const {
  for (std::size_t i = 1; i < phase.size(); ++i)
    if (!(phase[i] > phase[i - 1])) return false;
  return true;
}

PhaseTrajectory track_phase(const SampledSignal& recorded, const AnalyticProbe& probe) {
  require(recorded.fs() == probe.fs, "probe and recording sampling rates differ");
  if (recorded.size() < probe.taps.size() + 2)
    throw ProcessingError("recording is shorter than the probe support; fundamental not detected");
  const double input_rms = recorded.rms();
  if (input_rms == 0.0) throw ProcessingError("fundamental not detected: recording is silent");

  const auto y = apply_probe(recorded, probe);
  const std::size_t first = probe.center;
  const std::size_t last = recorded.size() - 1 - probe.center;  // inclusive
  std::span<const std::complex<double>> interior(y.data() + first, last - first + 1);

  double band = 0.0;
  for (const auto& v : interior) band += std::norm(v);
  band = std::sqrt(band / static_cast<double>(interior.size()));
  // Probe taps sum to roughly half the support; normalize to a per-sample level.
  double gain = 0.0;
  for (const auto& t : probe.taps) gain += std::abs(t);
  if (!(band / gain > 1e-6 * input_rms))
    throw ProcessingError("fundamental not detected: band energy below floor");

  const auto inst = instantaneous_frequency(interior, probe.fs);
  PhaseTrajectory traj;
  traj.fs = probe.fs;
  traj.first_sample = first;
  traj.phase.resize(interior.size());
  traj.phase[0] = std::arg(interior[0]);
  const double step = 2.0 * std::numbers::pi / probe.fs;
  const auto f = inst.frequency.samples();
  for (std::size_t i = 0; i + 1 < interior.size(); ++i) traj.phase[i + 1] = traj.phase[i] + f[i] * step;
  if (!traj.strictly_increasing())
    throw ProcessingError("fundamental phase is not monotone; fundamental not reliably detected");
  return traj;
}

// ----------------------------------------------------------------------------
// Warp map
// ----------------------------------------------------------------------------

namespace {

bool strictly_increasing(std::span<const double> v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] > v[i - 1])) return false;
  return true;
}

double interpolate(std::span<const double> xs, std::span<const double> ys, double x) {
  auto it = std::upper_bound(xs.begin(), xs.end(), x);
  std::size_t i = static_cast<std::size_t>(std::distance(xs.begin(), it));
  i = std::clamp<std::size_t>(i, 1, xs.size() - 1) - 1;
  const double t = (x - xs[i]) / (xs[i + 1] - xs[i]);
  return ys[i] + t * (ys[i + 1] - ys[i]);
}

}  // namespace

WarpMap::WarpMap(std::vector<double> t_ad, std::vector<double> t_da) : t_ad_(std::move(t_ad)), t_da_(std::move(t_da)) {
  require(t_ad_.size() == t_da_.size() && t_ad_.size() >= 2, "warp map needs at least two paired points");
  require(strictly_increasing(t_ad_) && strictly_increasing(t_da_), "warp map must be strictly monotone");
}

WarpMap WarpMap::identity(double t_begin, double t_end) {
  return WarpMap({t_begin, t_end}, {t_begin, t_end});
}

double WarpMap::da_at(double t_ad) const { return interpolate(t_ad_, t_da_, t_ad); }
double WarpMap::ad_at(double t_da) const { return interpolate(t_da_, t_ad_, t_da); }

bool WarpMap::covers_da(double lo, double hi) const {
  const double tol = 1e-12;
  return t_da_.front() <= lo + tol && t_da_.back() >= hi - tol;
}

double WarpMap::slope() const {
  const auto n = static_cast<double>(t_ad_.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < t_ad_.size(); ++i) {
    mx += t_ad_[i];
    my += t_da_[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < t_ad_.size(); ++i) {
    sxy += (t_ad_[i] - mx) * (t_da_[i] - my);
    sxx += (t_ad_[i] - mx) * (t_ad_[i] - mx);
  }
  return sxy / sxx;
}

std::vector<double> WarpMap::deviation() const {
  std::vector<double> d(t_ad_.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = t_da_[i] - t_ad_[i];
  return d;
}

WarpMap WarpMap::extended(double t_da_lo, double t_da_hi) const {
  const std::size_t n = t_ad_.size();
  const std::size_t reach = std::min<std::size_t>(n - 1, 32);
  std::vector<double> ad = t_ad_;
  std::vector<double> da = t_da_;
  if (t_da_lo < da.front()) {
    const double s = (t_da_[reach] - t_da_[0]) / (t_ad_[reach] - t_ad_[0]);
    const double ad_lo = t_ad_[0] + (t_da_lo - t_da_[0]) / s;
    ad.insert(ad.begin(), ad_lo);
    da.insert(da.begin(), t_da_lo);
  }
  if (t_da_hi > da.back()) {
    const double s = (t_da_[n - 1] - t_da_[n - 1 - reach]) / (t_ad_[n - 1] - t_ad_[n - 1 - reach]);
    const double ad_hi = t_ad_[n - 1] + (t_da_hi - t_da_[n - 1]) / s;
    ad.push_back(ad_hi);
    da.push_back(t_da_hi);
  }
  return WarpMap(std::move(ad), std::move(da));
}

WarpMap build_warp_map(const PhaseTrajectory& phase_da, const PhaseTrajectory& phase_ad,
                       const WarpMapOptions& options) {
  require(options.grid_step >= 1, "warp grid step must be at least one sample");
  require(phase_da.size() >= 2 && phase_ad.size() >= 2, "phase trajectories are too short");
  if (!phase_da.strictly_increasing() || !phase_ad.strictly_increasing())
    throw ValidationError("phase trajectory is not monotone; cannot invert");

  // Both trajectories carry absolute fundamental phase, known modulo whole cycles.
  // Choose the cycle offset that lands the first grid point nearest the expected offset.
  const double two_pi = 2.0 * std::numbers::pi;
  const double t0 = phase_ad.time(0);
  const double cycles =
      std::round((phase_da.phase_at(t0 + options.expected_offset) - phase_ad.phase[0]) / two_pi);
  const double shift = cycles * two_pi;

  std::vector<double> t_ad;
  std::vector<double> t_da;
  const auto& da = phase_da.phase;
  for (std::size_t i = 0; i < phase_ad.size(); i += options.grid_step) {
    const double phi = phase_ad.phase[i] + shift;
    if (phi < da.front() || phi > da.back()) continue;
    auto it = std::lower_bound(da.begin(), da.end(), phi);
    std::size_t j = static_cast<std::size_t>(std::distance(da.begin(), it));
    j = std::clamp<std::size_t>(j, 1, da.size() - 1) - 1;
    const double frac = (phi - da[j]) / (da[j + 1] - da[j]);
    t_ad.push_back(phase_ad.time(i));
    t_da.push_back((static_cast<double>(phase_da.first_sample + j) + frac) / phase_da.fs);
  }
  if (t_ad.size() < 2) throw ProcessingError("phase trajectories do not overlap");
  return WarpMap(std::move(t_ad), std::move(t_da));
}

SampledSignal apply_warp(const SampledSignal& signal, const WarpMap& map, const SincInterpolator& interpolator) {
  const double fs = signal.fs();
  const double t_end = static_cast<double>(signal.size() - 1) / fs;
  if (!map.covers_da(0.0, t_end)) throw ValidationError("warp map does not cover the signal span");
  std::vector<double> positions(signal.size());
  for (std::size_t n = 0; n < signal.size(); ++n) positions[n] = map.ad_at(static_cast<double>(n) / fs) * fs;
  return SampledSignal(interpolator.resample(signal.samples(), positions), fs);
}

std::size_t first_peak_index(std::span<const double> x, double fraction) {
  require(!x.empty(), "first_peak_index: empty input");
  double peak = 0.0;
  for (double v : x) peak = std::max(peak, std::abs(v));
  const double threshold = fraction * peak;
  std::size_t i = 0;
  while (i < x.size() && std::abs(x[i]) < threshold) ++i;
  // Climb to the local maximum of |x|.
  while (i + 1 < x.size() && std::abs(x[i + 1]) > std::abs(x[i])) ++i;
  return i;
}

}  // namespace fvnlab
