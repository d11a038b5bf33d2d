#include "fvnlab/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cstring>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <sstream>

#include "fvnlab/align.hpp"
#include "fvnlab/analysis.hpp"
#include "fvnlab/codes.hpp"
#include "fvnlab/compressor.hpp"
#include "fvnlab/fft.hpp"
#include "fvnlab/pipeline.hpp"
#include "fvnlab/sequencer.hpp"
#include "fvnlab/shaping.hpp"
#include "fvnlab/simharness.hpp"
#include "fvnlab/velvet.hpp"

namespace fvnlab::acceptance {

namespace {

// Tolerances. Kept here so every threshold is visible in one place.
constexpr double kAllpassMagnitudeTol = 1e-9;
constexpr double kSelfCompressionOffPeakTol = 1e-8;
constexpr double kAllpassRuntimeS = 10.0;
constexpr double kSidelobeLimitDb = -114.0 + 1.0;
constexpr double kDecayTargetDbPerOct = -54.0;
constexpr double kDecayTolDbPerOct = 6.0;
constexpr double kWindowRuntimeS = 5.0;
constexpr double kCoefficientIdentityTol = 1e-10;
constexpr double kDemuxRelRmsTol = 1e-6;
constexpr double kWrongCodeRelTol = 1e-10;
constexpr double kDemuxRuntimeS = 30.0;
constexpr double kLinearIrRelRmsTol = 0.01;
constexpr double kDeviationOverFloorDb = 40.0;
constexpr double kNonlinearRuntimeS = 60.0;
constexpr double kShapeRoundtripTol = 1e-9;
constexpr double kShapeAllpassTol = 1e-6;
constexpr double kConstantSmoothTol = 1e-12;
constexpr double kRampSmoothTol = 1e-9;
constexpr double kSingleBinTol = 1e-9;
constexpr double kSlopePpmTol = 1.0;
constexpr double kPeakRestoreTol = 0.01;
constexpr double kSinePeriodRelTol = 1e-3;
constexpr double kSineAmplitudeRelTol = 0.05;
constexpr double kDriftRuntimeS = 60.0;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::vector<double> random_fir(std::size_t taps, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> h(taps);
  for (std::size_t i = 0; i < taps; ++i) h[i] = g(rng) * std::exp(-static_cast<double>(i) / 16.0);
  return h;
}

std::vector<double> padded(std::span<const double> h, std::size_t n) {
  std::vector<double> out(n, 0.0);
  std::copy_n(h.begin(), std::min(n, h.size()), out.begin());
  return out;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double peak_abs(const SampledSignal& s) { return s.peak_abs(); }

}  // namespace

// ----------------------------------------------------------------------------
// Helpers
// ----------------------------------------------------------------------------

WindowSpectrumReport analyze_window(std::span<const double> coefficients, std::size_t length, std::size_t pad) {
  std::vector<double> w(length);
  for (std::size_t n = 0; n < length; ++n) {
    const double x = (2.0 * static_cast<double>(n) - static_cast<double>(length)) / static_cast<double>(length);
    w[n] = cosine_series(x, coefficients);
  }
  const std::size_t nfft = length * pad;
  const auto spec = fft::forward_real(w, nfft);
  const double dc = std::abs(spec[0]);
  std::vector<double> db(spec.size());
  for (std::size_t k = 0; k < spec.size(); ++k) db[k] = 20.0 * std::log10(std::max(std::abs(spec[k]) / dc, 1e-300));
  const double unit = static_cast<double>(pad);  // bins per 1 / support

  WindowSpectrumReport r;
  std::size_t k = 1;
  while (k + 1 < db.size() && db[k + 1] < db[k]) ++k;
  r.first_null = static_cast<double>(k) / unit;
  r.highest_sidelobe_db = -1e300;
  std::vector<double> lx, ly;
  for (std::size_t i = k + 1; i + 1 < db.size(); ++i) {
    if (db[i] >= db[i - 1] && db[i] > db[i + 1]) {
      r.highest_sidelobe_db = std::max(r.highest_sidelobe_db, db[i]);
      const double u = static_cast<double>(i) / unit;
      if (u >= 8.0 && u <= 32.0) {
        lx.push_back(std::log2(u));
        ly.push_back(db[i]);
      }
    }
  }
  if (lx.size() >= 2) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) mx += lx[i], my += ly[i];
    mx /= static_cast<double>(lx.size());
    my /= static_cast<double>(ly.size());
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) sxy += (lx[i] - mx) * (ly[i] - my), sxx += (lx[i] - mx) * (lx[i] - mx);
    r.decay_db_per_octave = sxy / sxx;
  }
  return r;
}

SinusoidFit fit_sinusoid(std::span<const double> t, std::span<const double> y, double period_guess) {
  require(t.size() == y.size() && t.size() >= 4, "sinusoid fit needs matching samples");
  // Linear least squares in (sin, cos, 1) for a fixed frequency.
  auto solve = [&](double freq, double* amp, double* off) {
    double s[3][3] = {}, b[3] = {};
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double v[3] = {std::sin(2 * std::numbers::pi * freq * t[i]), std::cos(2 * std::numbers::pi * freq * t[i]), 1.0};
      for (int r = 0; r < 3; ++r) {
        b[r] += v[r] * y[i];
        for (int c = 0; c < 3; ++c) s[r][c] += v[r] * v[c];
      }
    }
    // Gaussian elimination on the 3x3 normal equations.
    for (int p = 0; p < 3; ++p)
      for (int r = p + 1; r < 3; ++r) {
        const double f = s[r][p] / s[p][p];
        for (int c = p; c < 3; ++c) s[r][c] -= f * s[p][c];
        b[r] -= f * b[p];
      }
    double x[3];
    for (int r = 2; r >= 0; --r) {
      double acc = b[r];
      for (int c = r + 1; c < 3; ++c) acc -= s[r][c] * x[c];
      x[r] = acc / s[r][r];
    }
    double res = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double m = x[0] * std::sin(2 * std::numbers::pi * freq * t[i]) + x[1] * std::cos(2 * std::numbers::pi * freq * t[i]) + x[2];
      res += (y[i] - m) * (y[i] - m);
    }
    if (amp) *amp = std::hypot(x[0], x[1]);
    if (off) *off = x[2];
    return res;
  };
  // Golden-section search on frequency around the guess.
  double lo = 0.8 / period_guess, hi = 1.25 / period_guess;
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = hi - g * (hi - lo), b = lo + g * (hi - lo);
  double fa = solve(a, nullptr, nullptr), fb = solve(b, nullptr, nullptr);
  for (int it = 0; it < 100; ++it) {
    if (fa < fb) {
      hi = b, b = a, fb = fa;
      a = hi - g * (hi - lo);
      fa = solve(a, nullptr, nullptr);
    } else {
      lo = a, a = b, fa = fb;
      b = lo + g * (hi - lo);
      fb = solve(b, nullptr, nullptr);
    }
  }
  SinusoidFit fit;
  const double f = 0.5 * (lo + hi);
  solve(f, &fit.amplitude, &fit.offset);
  fit.period = 1.0 / f;
  return fit;
}

// ----------------------------------------------------------------------------
// Criteria
// ----------------------------------------------------------------------------

CriterionResult allpass_identity(const Options&) {
  const auto t0 = Clock::now();
  double worst_mag = 0.0, worst_off = 0.0;
  for (double sigma_t : {0.01, 0.1}) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const auto spec = FvnSpec::with_defaults(sigma_t, 44100.0, seed);
      const auto unit = synthesize_unit_fvn(spec);
      const auto X = fft::forward_real(unit.samples(), unit.size());
      std::vector<fft::Complex> power(X.size());
      for (std::size_t k = 0; k < X.size(); ++k) {
        worst_mag = std::max(worst_mag, std::abs(std::abs(X[k]) - 1.0));
        power[k] = std::norm(X[k]);
      }
      const auto acf = fft::inverse_real(power, unit.size());
      for (std::size_t n = 1; n < acf.size(); ++n) worst_off = std::max(worst_off, std::abs(acf[n]));
    }
  }
  const double secs = seconds_since(t0);
  const bool pass = worst_mag <= kAllpassMagnitudeTol && worst_off < kSelfCompressionOffPeakTol && secs < kAllpassRuntimeS;
  return {1, "all-pass identity", pass,
          fmt("max||X|-1| = %.3g (tol %.0e), max off-peak = %.3g (tol %.0e), 40 units", worst_mag,
              kAllpassMagnitudeTol, worst_off, kSelfCompressionOffPeakTol),
          secs};
}

CriterionResult window_quality(const Options& options) {
  const auto t0 = Clock::now();
  const auto r = analyze_window(options.coefficients);
  const double secs = seconds_since(t0);
  const bool pass = r.highest_sidelobe_db <= kSidelobeLimitDb &&
                    std::abs(r.decay_db_per_octave - kDecayTargetDbPerOct) <= kDecayTolDbPerOct &&
                    secs < kWindowRuntimeS;
  return {2, "six-term window quality", pass,
          fmt("highest sidelobe %.2f dB (limit %.1f), decay %.2f dB/oct over 8-32 units (target %.0f +/- %.0f)",
              r.highest_sidelobe_db, kSidelobeLimitDb, r.decay_db_per_octave, kDecayTargetDbPerOct, kDecayTolDbPerOct),
          secs};
}

CriterionResult coefficient_identities(const Options& options) {
  const auto t0 = Clock::now();
  double sum = 0.0, alt = 0.0;
  for (std::size_t m = 0; m < options.coefficients.size(); ++m) {
    sum += options.coefficients[m];
    alt += (m % 2 == 0 ? 1.0 : -1.0) * options.coefficients[m];
  }
  const bool pass = std::abs(sum - 1.0) <= kCoefficientIdentityTol && std::abs(alt) <= kCoefficientIdentityTol;
  return {3, "coefficient identities", pass,
          fmt("sum - 1 = %.3g, alternating sum = %.3g (tol %.0e)", sum - 1.0, alt, kCoefficientIdentityTol),
          seconds_since(t0)};
}

CriterionResult code_orthogonality(const Options&) {
  const auto t0 = Clock::now();
  bool pass = true;
  std::string failed;
  for (std::size_t k = 1; k <= 8; ++k) {
    if (!verify_orthogonality(build_code_matrix(k))) {
      pass = false;
      failed += " " + std::to_string(k);
    }
  }
  return {4, "code orthogonality", pass, pass ? "B B^T = N I for K_codes 1..8" : "failed for K_codes" + failed,
          seconds_since(t0)};
}

CriterionResult multichannel_demux(const Options&) {
  const auto t0 = Clock::now();
  constexpr double fs = 44100.0;
  constexpr std::size_t period = 4410;
  const auto codes = build_code_matrix(2);
  std::vector<SampledSignal> units, seqs;
  for (std::size_t ch = 0; ch < 2; ++ch) {
    SequencePlan plan{FvnSpec::with_defaults(0.01, fs, 100 + ch), ch, period, 12, 2};
    units.push_back(placement_unit(plan.fvn));
    seqs.push_back(assemble_sequence(units.back(), plan, codes));
  }
  SimTarget target;
  target.paths = {random_fir(64, 11), random_fir(64, 12)};
  const auto recording = simulate(target, seqs, 0);
  const AveragingPlan avg{period, 12, 2};
  std::vector<DemuxChannel> channels{{units[0], 0}, {units[1], 1}};
  const auto result = demultiplex(recording, channels, codes, avg);

  double worst = 0.0;
  for (std::size_t ch = 0; ch < 2; ++ch) {
    const auto truth = padded(target.paths[ch], period);
    worst = std::max(worst, relative_rms_error(result.per_code_irs[ch].samples(), truth));
  }
  // Interference of channel 0 alone into channel 1's estimate and its own wrong row.
  SimTarget single;
  single.paths = {target.paths[0]};
  const auto only0 = simulate(single, std::span(&seqs[0], 1), 0);
  const double ref = synchronized_average(pulse_compress(only0, units[0]), codes.row(0), avg).rms();
  const double wrong_row = synchronized_average(pulse_compress(only0, units[0]), codes.row(1), avg).rms() / ref;
  const double cross = synchronized_average(pulse_compress(only0, units[1]), codes.row(1), avg).rms() / ref;
  const double wrong = std::max(wrong_row, cross);
  const double secs = seconds_since(t0);
  const bool pass = worst < kDemuxRelRmsTol && wrong < kWrongCodeRelTol && secs < kDemuxRuntimeS;
  return {5, "multichannel demultiplexing", pass,
          fmt("max IR rel RMS error %.3g (tol %.0e), wrong-code residue %.3g (tol %.0e)", worst, kDemuxRelRmsTol, wrong,
              kWrongCodeRelTol),
          secs};
}

CriterionResult nonlinearity_separation(const Options&) {
  const auto t0 = Clock::now();
  constexpr double fs = 44100.0;
  constexpr std::size_t period = 4410;
  constexpr std::size_t code_rows = 4;  // N = 32, four channels on rows 0..3
  constexpr std::size_t reps = 2 * 32 + 4;
  constexpr double cubic = 0.1;
  const auto codes = build_code_matrix(code_rows);
  std::vector<SampledSignal> units, seqs;
  for (std::size_t ch = 0; ch < 4; ++ch) {
    SequencePlan plan{FvnSpec::with_defaults(0.01, fs, 200 + ch), ch, period, reps, 2};
    units.push_back(placement_unit(plan.fvn));
    seqs.push_back(assemble_sequence(units.back(), plan, codes));
  }
  auto mix = multiplex(seqs);
  // Drive level placing the cubic term 20 dB below the linear term at the path input:
  // cubic * rms((d x)^3) = 0.1 rms(d x).
  const double rms3 = rms(apply_polynomial(mix.samples(), std::vector<double>{0, 0, 0, 1}));
  const double drive = std::sqrt(0.1 * mix.rms() / (cubic * rms3));
  std::vector<double> driven(mix.samples().begin(), mix.samples().end());
  for (auto& v : driven) v *= drive;
  const SampledSignal input(std::move(driven), fs);
  const double cubic_db = 20.0 * std::log10(cubic * rms(apply_polynomial(input.samples(), std::vector<double>{0, 0, 0, 1})) / input.rms());

  const auto fir = random_fir(64, 21);
  auto run = [&](double c3) {
    SimTarget t;
    t.paths = {fir};
    t.nonlinearity = {0.0, 1.0, 0.0, c3};
    const auto rec = simulate(t, std::span(&input, 1), 0);
    std::vector<DemuxChannel> ch;
    for (std::size_t i = 0; i < 4; ++i) ch.push_back({units[i], i});
    return separate_nonlinear(demultiplex(rec, ch, codes, {period, reps, 2}));
  };
  const auto nl = run(cubic);
  const auto lin = run(0.0);

  std::vector<double> est(nl.linear_ir->samples().begin(), nl.linear_ir->samples().end());
  for (auto& v : est) v /= drive;
  const auto truth = padded(fir, period);
  const double err = relative_rms_error(est, truth);
  // Best linear approximation of the memoryless stage for this drive signal.
  double sxx = 0.0, sxf = 0.0;
  for (double x : input.samples()) sxx += x * x, sxf += x * (x + cubic * x * x * x);
  const double bla_gain = sxf / sxx;
  std::vector<double> bla_truth(truth);
  for (auto& v : bla_truth) v *= bla_gain;
  const double bla_err = relative_rms_error(est, bla_truth);

  const double floor = std::max(lin.pooled_deviation_rms(), 1e-300);
  const double over_db = 20.0 * std::log10(nl.pooled_deviation_rms() / floor);
  const double secs = seconds_since(t0);
  const bool pass = err <= kLinearIrRelRmsTol && over_db >= kDeviationOverFloorDb && secs < kNonlinearRuntimeS;
  return {6, "nonlinearity separation", pass,
          fmt("cubic at %.2f dB re linear; linear_ir vs FIR rel RMS %.4f (tol %.2f); vs best-linear FIR (gain %.4f) %.4f; "
              "pooled deviation %.1f dB above linear-run floor (min %.0f)",
              cubic_db, err, kLinearIrRelRmsTol, bla_gain, bla_err, over_db, kDeviationOverFloorDb),
          secs};
}

CriterionResult shaping_roundtrip(const Options&) {
  const auto t0 = Clock::now();
  const double fs = 44100.0;
  const auto filter = fit_slope_filter(-3.0, fs);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> x(44100);
  for (auto& v : x) v = g(rng);
  const SampledSignal sig(x, fs);
  const double roundtrip = max_abs_diff(inverse_shape(shape_spectrum(sig, filter), filter).samples(), sig.samples());

  const auto unit = synthesize_unit_fvn(FvnSpec::with_defaults(0.01, fs, 3));
  const auto restored = inverse_shape(shape_spectrum(unit, filter), filter);
  const auto X = fft::forward_real(restored.samples(), restored.size());
  double mag = 0.0;
  for (const auto& v : X) mag = std::max(mag, std::abs(std::abs(v) - 1.0));
  const bool pass = roundtrip <= kShapeRoundtripTol && mag <= kShapeAllpassTol;
  return {7, "shaping roundtrip", pass,
          fmt("order-%zu -3 dB/oct filter: max sample error %.3g (tol %.0e), max ||X|-1| %.3g (tol %.0e)",
              filter.order(), roundtrip, kShapeRoundtripTol, mag, kShapeAllpassTol),
          seconds_since(t0)};
}

CriterionResult third_octave_smoothing(const Options&) {
  const auto t0 = Clock::now();
  const double fs = 48000.0;
  const std::size_t L = 4096;
  PowerSpectrum p;
  p.fs = fs;
  for (std::size_t k = 0; k <= L / 2; ++k) p.freqs.push_back(static_cast<double>(k) * fs / static_cast<double>(L));

  p.power.assign(p.freqs.size(), 3.5);
  const auto qc = third_octave_smooth(p);
  double const_err = 0.0;
  for (double q : qc.power) const_err = std::max(const_err, std::abs(q - 3.5));

  p.power = p.freqs;
  const auto qr = third_octave_smooth(p);
  const double ramp_factor = (std::pow(2.0, 1.0 / 6.0) + std::pow(2.0, -1.0 / 6.0)) / 2.0;
  double ramp_err = 0.0;
  for (std::size_t i = 0; i < qr.freqs.size(); ++i)
    ramp_err = std::max(ramp_err, std::abs(qr.power[i] - qr.freqs[i] * ramp_factor) / qr.freqs[i]);

  // Single nonzero bin: closed form where the triangle lies inside the window, brute-force quadrature everywhere.
  const std::size_t k0 = 300;
  const double pk = 2.0, df = p.bin_width(), f0 = p.freqs[k0];
  std::fill(p.power.begin(), p.power.end(), 0.0);
  p.power[k0] = pk;
  const auto qs = third_octave_smooth(p);
  double bin_err = 0.0;
  const double hi_r = std::pow(2.0, 1.0 / 6.0), lo_r = std::pow(2.0, -1.0 / 6.0);
  for (std::size_t i = 0; i < qs.freqs.size(); ++i) {
    const double fl = qs.freqs[i] * lo_r, fh = qs.freqs[i] * hi_r;
    const double scale = pk * df / (fh - fl);
    if (fl <= f0 - df && f0 + df <= fh) bin_err = std::max(bin_err, std::abs(qs.power[i] - scale) / scale);
    else if (fh <= f0 - df || fl >= f0 + df) bin_err = std::max(bin_err, std::abs(qs.power[i]) / scale);
    // Composite Simpson quadrature of the triangle, split at its kinks.
    auto tri = [&](double v) { return std::max(0.0, pk * (1.0 - std::abs(v - f0) / df)); };
    std::vector<double> edges{fl};
    for (double kink : {f0 - df, f0, f0 + df})
      if (kink > fl && kink < fh) edges.push_back(kink);
    edges.push_back(fh);
    double acc = 0.0;
    for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
      const std::size_t steps = 200;
      const double h = (edges[e + 1] - edges[e]) / static_cast<double>(steps);
      double part = tri(edges[e]) + tri(edges[e + 1]);
      for (std::size_t s = 1; s < steps; ++s) part += (s % 2 ? 4.0 : 2.0) * tri(edges[e] + static_cast<double>(s) * h);
      acc += part * h / 3.0;
    }
    bin_err = std::max(bin_err, std::abs(qs.power[i] - acc / (fh - fl)) / scale);
  }
  const bool pass = const_err <= kConstantSmoothTol && ramp_err <= kRampSmoothTol && bin_err <= kSingleBinTol;
  return {8, "one-third-octave smoothing", pass,
          fmt("constant err %.3g (tol %.0e), ramp rel err %.3g (tol %.0e), single-bin rel err %.3g (tol %.0e)",
              const_err, kConstantSmoothTol, ramp_err, kRampSmoothTol, bin_err, kSingleBinTol),
          seconds_since(t0)};
}

CriterionResult drift_recovery(const Options&) {
  const auto t0 = Clock::now();
  RunConfig cfg;
  cfg.sigma_t = 0.025;
  cfg.period_no = 4410;  // 10 Hz fundamental
  cfg.reps = 600;        // 60 s
  cfg.seed = 9;
  const auto gen = generate_signals(cfg);
  const auto& m = gen.manifest;
  const double eps = 100e-6;

  const auto base = measure_recording(gen.mix, m);
  const double base_peak = peak_abs(base.per_code_irs.front());

  const auto drifted = apply_drift(gen.mix, DriftSpec::linear(100.0));
  const double unaligned_peak = peak_abs(measure_recording(drifted, m).per_code_irs.front());
  const auto aligned = align_recording(drifted, m);
  const double slope_err_ppm = std::abs(aligned.map.slope() - (1.0 + eps)) * 1e6;
  const double aligned_peak = peak_abs(measure_recording(aligned.aligned, m).per_code_irs.front());
  const double peak_err = std::abs(aligned_peak - base_peak) / base_peak;

  const double depth = 1e-4, rate = 0.5;
  const auto wobbly = apply_drift(gen.mix, DriftSpec::sinusoidal(depth, rate));
  const auto sine_map = align_recording(wobbly, m).map;
  const auto dev = sine_map.deviation();
  const auto fit = fit_sinusoid(sine_map.t_ad(), dev, 1.0 / rate);
  const double period_err = std::abs(fit.period * rate - 1.0);
  const double amp_err = std::abs(fit.amplitude / depth - 1.0);

  const double secs = seconds_since(t0);
  const bool pass = slope_err_ppm < kSlopePpmTol && peak_err <= kPeakRestoreTol && period_err <= kSinePeriodRelTol &&
                    amp_err <= kSineAmplitudeRelTol && secs < kDriftRuntimeS;
  return {9, "drift recovery", pass,
          fmt("slope err %.3f ppm (tol %.0f); peak aligned/undrifted %.5f (unaligned %.4f, tol %.0f%%); "
              "sine period err %.2e (tol %.0e), amplitude err %.2f%% (tol %.0f%%)",
              slope_err_ppm, kSlopePpmTol, aligned_peak / base_peak, unaligned_peak / base_peak, kPeakRestoreTol * 100,
              period_err, kSinePeriodRelTol, amp_err * 100, kSineAmplitudeRelTol * 100),
          secs};
}

CriterionResult determinism(const Options&) {
  const auto t0 = Clock::now();
  auto once = [] {
    RunConfig cfg;
    cfg.codes = 2;
    cfg.channels = 2;
    cfg.period_no = 4410;
    cfg.reps = 12;
    cfg.seed = 77;
    cfg.shape_slope_db_per_oct = -3.0;
    const auto gen = generate_signals(cfg);
    SimTarget t;
    t.paths = {random_fir(32, 1), random_fir(32, 2)};
    t.nonlinearity = {0.0, 1.0, 0.05, 0.1};
    t.noise = {NoiseSpec::Kind::Pink, -30.0, true};
    t.drift = DriftSpec::linear(20.0);
    const auto rec = simulate(t, gen.channels, cfg.seed);
    const auto res = measure_recording(rec, gen.manifest);
    std::vector<double> all(gen.mix.samples().begin(), gen.mix.samples().end());
    all.insert(all.end(), rec.samples().begin(), rec.samples().end());
    for (const auto& ir : res.per_code_irs) all.insert(all.end(), ir.samples().begin(), ir.samples().end());
    all.insert(all.end(), res.linear_ir->samples().begin(), res.linear_ir->samples().end());
    return all;
  };
  const auto a = once();
  const auto b = once();
  const bool pass = a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
  return {10, "determinism", pass,
          fmt("%zu samples across generate/simulate/measure compared bitwise: %s", a.size(),
              pass ? "identical" : "DIFFERENT"),
          seconds_since(t0)};
}

std::vector<CriterionResult> run_all(const Options& options,
                                     const std::function<void(const CriterionResult&)>& on_result) {
  using Fn = CriterionResult (*)(const Options&);
  const Fn criteria[] = {allpass_identity,       window_quality,   coefficient_identities, code_orthogonality,
                         multichannel_demux,     nonlinearity_separation, shaping_roundtrip,
                         third_octave_smoothing, drift_recovery,   determinism};
  const char* names[] = {"all-pass identity",       "six-term window quality", "coefficient identities",
                         "code orthogonality",      "multichannel demultiplexing", "nonlinearity separation",
                         "shaping roundtrip",       "one-third-octave smoothing",  "drift recovery",
                         "determinism"};
  std::vector<CriterionResult> out;
  for (int i = 0; i < 10; ++i) {
    CriterionResult r{i + 1, names[i], false, {}, 0.0};
    try {
      r = criteria[i](options);
    } catch (const std::exception& e) {
      r.detail = std::string("exception: ") + e.what();
    }
    if (on_result) on_result(r);
    out.push_back(std::move(r));
  }
  return out;
}

bool known_unattainable(int id) {
  return std::find(kKnownUnattainable.begin(), kKnownUnattainable.end(), id) != kKnownUnattainable.end();
}

bool gate_passes(const std::vector<CriterionResult>& results, bool strict) {
  for (const auto& r : results)
    if (!r.pass && (strict || !known_unattainable(r.id))) return false;
  return true;
}

std::string format(const CriterionResult& r) {
  const char* note = (!r.pass && known_unattainable(r.id)) ? " [known unattainable]" : "";
  return fmt("[%s] %d %s (%.2f s): %s%s", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(), r.seconds, r.detail.c_str(),
             note);
}

}  // namespace fvnlab::acceptance
