#include "fvnlab/simharness.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fvnlab/fft.hpp"

namespace fvnlab {

using nlohmann::json;

void DriftSpec::validate(double fs) const {
  switch (kind) {
    case Kind::None:
      return;
    case Kind::Linear:
      require(std::isfinite(ppm) && std::abs(ppm) < 1e5, "linear drift ppm out of range");
      return;
    case Kind::Sinusoidal:
      require(depth_s >= 0.0 && rate_hz >= 0.0 && std::isfinite(depth_s) && std::isfinite(rate_hz),
              "sinusoidal drift depth and rate must be non-negative");
      require(depth_s * 2.0 * std::numbers::pi * rate_hz < 1.0, "sinusoidal drift makes time non-monotone");
      require(rate_hz < fs / 2.0, "sinusoidal drift rate exceeds Nyquist");
      return;
  }
}

SimTarget SimTarget::identity(std::size_t channels) {
  SimTarget t;
  t.paths.assign(channels, std::vector<double>{1.0});
  return t;
}

void SimTarget::validate() const {
  require(!paths.empty(), "target needs at least one path");
  for (const auto& p : paths) {
    require(!p.empty(), "path FIR must not be empty");
    for (double v : p) require(std::isfinite(v), "path FIR must be finite");
  }
  require(!nonlinearity.empty(), "nonlinearity needs at least one coefficient");
  for (double c : nonlinearity) require(std::isfinite(c), "nonlinearity coefficients must be finite");
  require(std::isfinite(noise.level_db), "noise level must be finite");
}

std::vector<double> apply_polynomial(std::span<const double> x, std::span<const double> coefficients) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double acc = 0.0;
    for (std::size_t k = coefficients.size(); k-- > 0;) acc = acc * x[i] + coefficients[k];
    out[i] = acc;
  }
  return out;
}

SampledSignal apply_drift(const SampledSignal& signal, const DriftSpec& drift, const SincInterpolator& interpolator) {
  const double fs = signal.fs();
  drift.validate(fs);
  if (drift.kind == DriftSpec::Kind::None) return signal;
  std::vector<double> pos(signal.size());
  if (drift.kind == DriftSpec::Kind::Linear) {
    const double scale = 1.0 + drift.ppm * 1e-6;
    for (std::size_t n = 0; n < pos.size(); ++n) pos[n] = static_cast<double>(n) * scale;
  } else {
    const double w = 2.0 * std::numbers::pi * drift.rate_hz / fs;
    for (std::size_t n = 0; n < pos.size(); ++n)
      pos[n] = static_cast<double>(n) + drift.depth_s * fs * std::sin(w * static_cast<double>(n));
  }
  return SampledSignal(interpolator.resample(signal.samples(), pos), fs);
}

std::vector<double> generate_noise(NoiseSpec::Kind kind, std::size_t length, double target_rms, double fs,
                                   std::uint64_t seed) {
  std::vector<double> out(length, 0.0);
  if (kind == NoiseSpec::Kind::None || length == 0 || target_rms == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (auto& v : out) v = gauss(rng);
  if (kind == NoiseSpec::Kind::Pink) {
    const std::size_t n = fft::next_pow2(length);
    auto spec = fft::forward_real(out, n);
    const double df = fs / static_cast<double>(n);
    spec[0] = 0.0;
    for (std::size_t k = 1; k < spec.size(); ++k) spec[k] /= std::sqrt(std::max(1.0, static_cast<double>(k) * df));
    auto shaped = fft::inverse_real(spec, n);
    std::copy_n(shaped.begin(), length, out.begin());
  }
  double mean = 0.0;
  for (double v : out) mean += v;
  mean /= static_cast<double>(length);
  for (auto& v : out) v -= mean;
  const double r = rms(out);
  if (r > 0.0)
    for (auto& v : out) v *= target_rms / r;
  return out;
}

SampledSignal simulate(const SimTarget& target, std::span<const SampledSignal> inputs, std::uint64_t seed) {
  target.validate();
  require(inputs.size() == target.paths.size(), "simulate: one input per path is required");
  const double fs = inputs.front().fs();
  std::size_t length = 0;
  for (const auto& in : inputs) {
    require(in.fs() == fs, "simulate: inputs must share a sampling rate");
    length = std::max(length, in.size());
  }

  std::vector<double> out(length, 0.0);
  for (std::size_t p = 0; p < inputs.size(); ++p) {
    const auto driven = apply_polynomial(inputs[p].samples(), target.nonlinearity);
    const auto y = fft::convolve(driven, target.paths[p]);
    const std::size_t n = std::min(length, y.size());
    for (std::size_t i = 0; i < n; ++i) out[i] += y[i];
  }

  SampledSignal clean(std::move(out), fs);
  clean = apply_drift(clean, target.drift);
  if (target.noise.kind == NoiseSpec::Kind::None) return clean;

  const double reference = target.noise.relative ? clean.rms() : 1.0;
  const double noise_rms = reference * std::pow(10.0, target.noise.level_db / 20.0);
  const auto noise = generate_noise(target.noise.kind, clean.size(), noise_rms, fs, seed);
  auto samples = std::move(clean).release();
  for (std::size_t i = 0; i < samples.size(); ++i) samples[i] += noise[i];
  return SampledSignal(std::move(samples), fs);
}

// ----------------------------------------------------------------------------
// JSON descriptors
// ----------------------------------------------------------------------------

namespace {

NoiseSpec::Kind noise_kind(const std::string& s) {
  if (s == "none") return NoiseSpec::Kind::None;
  if (s == "white") return NoiseSpec::Kind::White;
  if (s == "pink") return NoiseSpec::Kind::Pink;
  throw ValidationError("unknown noise type: " + s);
}

const char* noise_name(NoiseSpec::Kind k) {
  switch (k) {
    case NoiseSpec::Kind::White: return "white";
    case NoiseSpec::Kind::Pink: return "pink";
    default: return "none";
  }
}

}  // namespace

SimTarget parse_sim_target(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("target JSON: ") + e.what());
  }
  try {
    SimTarget t;
    t.paths = j.at("paths").get<std::vector<std::vector<double>>>();
    if (j.contains("nonlinearity")) t.nonlinearity = j["nonlinearity"].get<std::vector<double>>();
    if (j.contains("noise")) {
      const auto& n = j["noise"];
      t.noise.kind = noise_kind(n.value("type", std::string("white")));
      t.noise.level_db = n.value("level_db", t.noise.level_db);
      t.noise.relative = n.value("relative", true);
    }
    if (j.contains("drift")) {
      const auto& d = j["drift"];
      const auto type = d.value("type", std::string("none"));
      if (type == "linear") t.drift = DriftSpec::linear(d.at("ppm").get<double>());
      else if (type == "sinusoidal")
        t.drift = DriftSpec::sinusoidal(d.at("depth_s").get<double>(), d.at("rate_hz").get<double>());
      else if (type != "none") throw ValidationError("unknown drift type: " + type);
    }
    t.validate();
    return t;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("target JSON: ") + e.what());
  }
}

SimTarget load_sim_target(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open target file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_sim_target(ss.str());
}

std::string sim_target_to_json(const SimTarget& target) {
  json j;
  j["paths"] = target.paths;
  j["nonlinearity"] = target.nonlinearity;
  j["noise"] = {{"type", noise_name(target.noise.kind)},
                {"level_db", target.noise.level_db},
                {"relative", target.noise.relative}};
  switch (target.drift.kind) {
    case DriftSpec::Kind::None: j["drift"] = {{"type", "none"}}; break;
    case DriftSpec::Kind::Linear: j["drift"] = {{"type", "linear"}, {"ppm", target.drift.ppm}}; break;
    case DriftSpec::Kind::Sinusoidal:
      j["drift"] = {{"type", "sinusoidal"}, {"depth_s", target.drift.depth_s}, {"rate_hz", target.drift.rate_hz}};
      break;
  }
  return j.dump(2);
}

}  // namespace fvnlab
