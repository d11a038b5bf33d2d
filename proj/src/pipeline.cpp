#include "fvnlab/pipeline.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fvnlab/analysis.hpp"
#include "fvnlab/wav.hpp"

namespace fvnlab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ProcessingError("cannot write file: " + path);
  out << text;
  if (!out) throw ProcessingError("failed writing: " + path);
}

std::string resolve(const std::string& base_dir, const std::string& path) {
  if (path.empty() || fs::path(path).is_absolute()) return path;
  return (fs::path(base_dir) / path).string();
}

std::string ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ProcessingError("cannot create output directory " + dir + ": " + ec.message());
  return dir;
}

std::string out_path(const RunConfig& c, const std::string& name) {
  return (fs::path(c.out_dir) / name).string();
}

json fvn_to_json(const FvnSpec& s) {
  return {{"sigma_t", s.sigma_t}, {"fd_hz", s.fd_hz}, {"bw_hz", s.bw_hz}, {"phi_max", s.phi_max},
          {"fs", s.fs},           {"dft_size", s.dft_size}, {"seed", s.seed}};
}

FvnSpec fvn_from_json(const json& j) {
  FvnSpec s;
  s.sigma_t = j.at("sigma_t").get<double>();
  s.fd_hz = j.at("fd_hz").get<double>();
  s.bw_hz = j.at("bw_hz").get<double>();
  s.phi_max = j.at("phi_max").get<double>();
  s.fs = j.at("fs").get<double>();
  s.dft_size = j.at("dft_size").get<std::size_t>();
  s.seed = j.at("seed").get<std::uint64_t>();
  return s;
}

}  // namespace

// ----------------------------------------------------------------------------
// RunConfig
// ----------------------------------------------------------------------------

std::size_t RunConfig::repetitions() const {
  if (reps) return *reps;
  const std::size_t n = std::size_t{1} << (std::min(codes, kMaxCodeRows) + 1);
  return 2 * n + 2 * guard_periods;
}

FvnSpec RunConfig::fvn_spec(std::size_t channel) const {
  FvnSpec s = FvnSpec::with_defaults(sigma_t, fs, seed + channel);
  if (fd_hz) s.fd_hz = *fd_hz;
  if (bw_hz) s.bw_hz = *bw_hz;
  if (phi_max) s.phi_max = *phi_max;
  if (dft_size) s.dft_size = *dft_size;
  return s;
}

void RunConfig::validate() const {
  require(std::isfinite(fs) && fs > 0.0, "fs must be positive");
  require(std::isfinite(sigma_t) && sigma_t > 0.0, "sigma_t must be positive");
  require(codes >= 1 && codes <= kMaxCodeRows, "codes must lie in 1..16");
  require(channels >= 1 && channels <= codes, "channels must lie in 1..codes (one code row per channel)");
  require(period_no >= 1, "period_no must be positive");
  require(!truncate_ms || *truncate_ms > 0.0, "truncate_ms must be positive");
  require(c_mag > 0.0 && c_mag <= 2.0, "c_mag must lie in (0, 2]");
  fvn_spec(0).validate();
  const std::size_t n = std::size_t{1} << (codes + 1);
  require(repetitions() >= n + 2 * guard_periods, "reps must cover one code length plus guard periods at each end");
  if (shape) ShapingFilter check(*shape);
  if (target) target->validate();
}

RunConfig parse_run_config(const std::string& json_text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config JSON: ") + e.what());
  }
  RunConfig c;
  try {
    c.fs = j.value("fs", c.fs);
    c.sigma_t = j.value("sigma_t", c.sigma_t);
    if (j.contains("fd_hz")) c.fd_hz = j["fd_hz"].get<double>();
    if (j.contains("bw_hz")) c.bw_hz = j["bw_hz"].get<double>();
    if (j.contains("phi_max")) c.phi_max = j["phi_max"].get<double>();
    if (j.contains("dft_size")) c.dft_size = j["dft_size"].get<std::size_t>();
    c.codes = j.value("codes", c.codes);
    c.channels = j.value("channels", c.channels);
    c.period_no = j.value("period_no", c.period_no);
    if (j.contains("reps")) c.reps = j["reps"].get<std::size_t>();
    c.guard_periods = j.value("guard_periods", c.guard_periods);
    c.seed = j.value("seed", c.seed);
    if (j.contains("shape")) {
      if (j["shape"].is_string()) c.shape = load_shaping_coefficients(resolve(base_dir, j["shape"].get<std::string>()));
      else c.shape = j["shape"].get<std::vector<double>>();
    }
    if (j.contains("shape_slope_db_per_oct")) c.shape_slope_db_per_oct = j["shape_slope_db_per_oct"].get<double>();
    if (j.contains("target")) {
      if (j["target"].is_string()) c.target = load_sim_target(resolve(base_dir, j["target"].get<std::string>()));
      else c.target = parse_sim_target(j["target"].dump());
    }
    if (j.contains("drift_ppm")) c.drift_ppm = j["drift_ppm"].get<double>();
    if (j.contains("truncate_ms")) c.truncate_ms = j["truncate_ms"].get<double>();
    c.calibration_db = j.value("calibration_db", c.calibration_db);
    c.c_mag = j.value("c_mag", c.c_mag);
    c.out_dir = resolve(base_dir, j.value("out_dir", c.out_dir));
    c.manifest_path = resolve(base_dir, j.value("manifest", std::string()));
    c.recording_path = resolve(base_dir, j.value("recording", std::string()));
    c.background_path = resolve(base_dir, j.value("background", std::string()));
    c.ir_path = resolve(base_dir, j.value("ir", std::string()));
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config JSON: ") + e.what());
  }
  return c;
}

RunConfig load_run_config(const std::string& path) {
  const auto dir = fs::path(path).parent_path().string();
  return parse_run_config(read_text(path), dir.empty() ? "." : dir);
}

// ----------------------------------------------------------------------------
// Manifest
// ----------------------------------------------------------------------------

void Manifest::validate() const {
  require(fs > 0.0, "manifest: fs must be positive");
  require(!fvn.empty() && fvn.size() == code_rows.size(), "manifest: one code row per channel");
  for (const auto& s : fvn) {
    s.validate();
    require(s.fs == fs, "manifest: channel sampling rate differs");
  }
  const auto codes = build_code_matrix(code_matrix_rows);
  for (std::size_t r : code_rows) require(r < codes.rows(), "manifest: code row out of range");
  require(period_no >= 1, "manifest: period_no must be positive");
  require(repetitions >= codes.length() + 2 * guard_periods, "manifest: too few repetitions");
  if (shaping) ShapingFilter check(*shaping);
}

std::string manifest_to_json(const Manifest& m) {
  json j;
  j["format"] = "fvnlab-manifest";
  j["version"] = 1;
  j["fs"] = m.fs;
  j["seed"] = m.seed;
  j["code_matrix_rows"] = m.code_matrix_rows;
  j["code_length"] = std::size_t{1} << (m.code_matrix_rows + 1);
  j["period_no"] = m.period_no;
  j["repetitions"] = m.repetitions;
  j["guard_periods"] = m.guard_periods;
  j["signal_length"] = m.signal_length;
  j["signal_file"] = m.signal_file;
  j["shaping"] = m.shaping ? json(*m.shaping) : json(nullptr);
  json channels = json::array();
  for (std::size_t i = 0; i < m.fvn.size(); ++i) {
    json c;
    c["code_row"] = m.code_rows[i];
    c["fvn"] = fvn_to_json(m.fvn[i]);
    c["file"] = i < m.channel_files.size() ? m.channel_files[i] : std::string();
    channels.push_back(c);
  }
  j["channels"] = channels;
  return j.dump(2);
}

Manifest parse_manifest(const std::string& json_text) {
  try {
    const auto j = json::parse(json_text);
    if (j.value("format", std::string()) != "fvnlab-manifest") throw ValidationError("not an fvnlab manifest");
    Manifest m;
    m.fs = j.at("fs").get<double>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.code_matrix_rows = j.at("code_matrix_rows").get<std::size_t>();
    m.period_no = j.at("period_no").get<std::size_t>();
    m.repetitions = j.at("repetitions").get<std::size_t>();
    m.guard_periods = j.at("guard_periods").get<std::size_t>();
    m.signal_length = j.at("signal_length").get<std::size_t>();
    m.signal_file = j.value("signal_file", std::string());
    if (!j.at("shaping").is_null()) m.shaping = j["shaping"].get<std::vector<double>>();
    for (const auto& c : j.at("channels")) {
      m.code_rows.push_back(c.at("code_row").get<std::size_t>());
      m.fvn.push_back(fvn_from_json(c.at("fvn")));
      m.channel_files.push_back(c.value("file", std::string()));
    }
    m.validate();
    return m;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("manifest JSON: ") + e.what());
  }
}

Manifest load_manifest(const std::string& path) {
  require(!path.empty(), "a manifest is required (measurement without provenance is refused)");
  return parse_manifest(read_text(path));
}

// ----------------------------------------------------------------------------
// Signal generation, measurement, alignment
// ----------------------------------------------------------------------------

namespace {

GeneratedSignals build_from_manifest(Manifest m) {
  const auto codes = build_code_matrix(m.code_matrix_rows);
  std::optional<ShapingFilter> shaping;
  if (m.shaping) shaping.emplace(*m.shaping);
  GeneratedSignals g{m, {}, SampledSignal::zeros(1, m.fs), {}};
  for (std::size_t i = 0; i < m.channels(); ++i) {
    SequencePlan plan{m.fvn[i], m.code_rows[i], m.period_no, m.repetitions, m.guard_periods};
    plan.validate(codes);
    auto unit = placement_unit(m.fvn[i]);
    auto seq = assemble_sequence(unit, plan, codes);
    if (shaping) seq = shape_spectrum(seq, *shaping);
    g.units.push_back(std::move(unit));
    g.channels.push_back(std::move(seq));
  }
  g.mix = multiplex(g.channels);
  g.manifest.signal_length = g.mix.size();
  return g;
}

}  // namespace

GeneratedSignals generate_signals(const RunConfig& config) {
  config.validate();
  Manifest m;
  m.fs = config.fs;
  m.seed = config.seed;
  m.code_matrix_rows = config.codes;
  m.period_no = config.period_no;
  m.repetitions = config.repetitions();
  m.guard_periods = config.guard_periods;
  for (std::size_t i = 0; i < config.channels; ++i) {
    m.fvn.push_back(config.fvn_spec(i));
    m.code_rows.push_back(i);
  }
  if (config.shape) {
    m.shaping = *config.shape;
  } else if (config.shape_slope_db_per_oct) {
    const auto f = fit_slope_filter(*config.shape_slope_db_per_oct, config.fs);
    m.shaping = std::vector<double>(f.coefficients().begin(), f.coefficients().end());
  }
  return build_from_manifest(std::move(m));
}

GeneratedSignals regenerate(const Manifest& manifest) {
  manifest.validate();
  auto g = build_from_manifest(manifest);
  if (manifest.signal_length != 0 && g.mix.size() != manifest.signal_length)
    throw ValidationError("manifest signal length does not match the regenerated signal");
  return g;
}

MeasurementResult measure_recording(const SampledSignal& recording, const Manifest& manifest,
                                    const std::optional<SampledSignal>& background) {
  manifest.validate();
  if (recording.fs() != manifest.fs) throw ValidationError("recording sampling rate does not match the manifest");
  const auto codes = build_code_matrix(manifest.code_matrix_rows);
  const auto plan = manifest.averaging_plan();
  const auto window = averaging_window(plan, codes.length());
  if (recording.size() < (window.first_period + window.count) * plan.period)
    throw ProcessingError("insufficient periods: recording ends before the averaging window");

  std::vector<DemuxChannel> channels;
  for (std::size_t i = 0; i < manifest.channels(); ++i)
    channels.push_back({placement_unit(manifest.fvn[i]), manifest.code_rows[i]});

  auto prepare = [&](const SampledSignal& x) {
    return manifest.shaping ? inverse_shape(x, ShapingFilter(*manifest.shaping)) : x;
  };
  auto result = demultiplex(prepare(recording), channels, codes, plan);
  if (result.per_code_irs.size() >= 2) result = separate_nonlinear(std::move(result));
  if (background) result.noise_ir = noise_floor(prepare(*background), channels, codes, plan, recording.size());
  return result;
}

AlignmentResult align_recording(const SampledSignal& recording, const Manifest& manifest, double c_mag) {
  if (recording.fs() != manifest.fs) throw ValidationError("recording sampling rate does not match the manifest");
  const auto reference = regenerate(manifest);
  const double f_o = manifest.fs / static_cast<double>(manifest.period_no);
  const auto probe = build_probe(f_o, c_mag, manifest.fs);

  auto ref_phase = track_phase(reference.mix, probe);
  auto rec_phase = track_phase(recording, probe);

  // Coarse offset from the first compression peaks resolves whole fundamental cycles.
  // Half a period of leading zeros keeps a peak that arrives slightly early from being cut off.
  const auto& unit = reference.units.front();
  const std::size_t pad = manifest.period_no / 2;
  auto peak_of = [&](const SampledSignal& x) {
    std::vector<double> padded(pad, 0.0);
    padded.insert(padded.end(), x.samples().begin(), x.samples().end());
    if (padded.size() < unit.size()) padded.resize(unit.size(), 0.0);
    const auto c = pulse_compress(SampledSignal(std::move(padded), x.fs()), unit);
    return static_cast<double>(first_peak_index(c.samples()));
  };
  WarpMapOptions opts;
  opts.expected_offset = (peak_of(reference.mix) - peak_of(recording)) / manifest.fs;

  auto map = build_warp_map(ref_phase, rec_phase, opts);

  // Extrapolate t_DA back to t_AD = 0 from the leading slope; that offset is the
  // latency seen at f_o, not clock error.
  const auto ad = map.t_ad();
  const auto da = map.t_da();
  const std::size_t reach = std::min<std::size_t>(ad.size() - 1, 32);
  const double lead_slope = (da[reach] - da[0]) / (ad[reach] - ad[0]);
  const double da_at_zero = da[0] - ad[0] * lead_slope;
  std::vector<double> anchored(da.begin(), da.end());
  for (auto& t : anchored) t -= da_at_zero;
  const WarpMap correction(std::vector<double>(ad.begin(), ad.end()), std::move(anchored));

  const double t_end = static_cast<double>(recording.size() - 1) / recording.fs();
  auto aligned = apply_warp(recording, correction.extended(0.0, t_end));
  return {std::move(map), -da_at_zero, std::move(aligned), std::move(ref_phase), std::move(rec_phase)};
}

std::vector<double> load_shaping_coefficients(const std::string& path) {
  try {
    auto a = json::parse(read_text(path)).get<std::vector<double>>();
    ShapingFilter check(a);
    return a;
  } catch (const json::exception& e) {
    throw ValidationError("shaping filter file must hold a JSON array of numbers: " + std::string(e.what()));
  }
}

void save_shaping_coefficients(const std::string& path, std::span<const double> a) {
  write_text(path, json(std::vector<double>(a.begin(), a.end())).dump() + "\n");
}

void write_warp_csv(const std::string& path, const WarpMap& map) {
  std::ofstream out(path);
  if (!out) throw ProcessingError("cannot write file: " + path);
  out << "t_AD,t_DA\n";
  out.precision(17);
  for (std::size_t i = 0; i < map.size(); ++i) out << map.t_ad()[i] << ',' << map.t_da()[i] << '\n';
}

// ----------------------------------------------------------------------------
// Commands
// ----------------------------------------------------------------------------

std::vector<std::string> cmd_generate(const RunConfig& config) {
  const auto g = generate_signals(config);
  ensure_out_dir(config.out_dir);
  std::vector<std::string> written;
  Manifest m = g.manifest;
  if (g.channels.size() > 1) {
    for (std::size_t i = 0; i < g.channels.size(); ++i) {
      const auto name = "channel_" + std::to_string(i) + ".wav";
      wav::write(out_path(config, name), g.channels[i]);
      m.channel_files.push_back(name);
      written.push_back(out_path(config, name));
    }
  } else {
    m.channel_files.push_back("test_signal.wav");
  }
  m.signal_file = "test_signal.wav";
  wav::write(out_path(config, m.signal_file), g.mix);
  written.push_back(out_path(config, m.signal_file));
  if (m.shaping) {
    save_shaping_coefficients(out_path(config, "shaping_filter.json"), *m.shaping);
    written.push_back(out_path(config, "shaping_filter.json"));
  }
  write_text(out_path(config, "manifest.json"), manifest_to_json(m) + "\n");
  written.push_back(out_path(config, "manifest.json"));
  return written;
}

std::vector<std::string> cmd_simulate(const RunConfig& config) {
  const auto manifest = load_manifest(config.manifest_path);
  const auto base = fs::path(config.manifest_path).parent_path().string();
  SimTarget target = config.target ? *config.target : SimTarget::identity(1);
  if (config.drift_ppm) target.drift = DriftSpec::linear(*config.drift_ppm);

  std::vector<SampledSignal> inputs;
  if (target.paths.size() == 1) {
    inputs.push_back(wav::read_mono(resolve(base, manifest.signal_file)));
  } else {
    if (target.paths.size() != manifest.channels())
      throw ValidationError("target path count must be 1 or equal the manifest channel count");
    for (const auto& f : manifest.channel_files) inputs.push_back(wav::read_mono(resolve(base, f)));
  }
  for (const auto& in : inputs)
    if (in.fs() != manifest.fs) throw ValidationError("test signal sampling rate does not match the manifest");

  const auto recording = simulate(target, inputs, config.seed);
  ensure_out_dir(config.out_dir);
  const auto path = out_path(config, "recording.wav");
  wav::write(path, recording);
  return {path};
}

std::vector<std::string> cmd_measure(const RunConfig& config) {
  const auto manifest = load_manifest(config.manifest_path);
  require(!config.recording_path.empty(), "measure needs a recording");
  const auto recording = wav::read_mono(config.recording_path);
  std::optional<SampledSignal> background;
  if (!config.background_path.empty()) background = wav::read_mono(config.background_path);
  const auto result = measure_recording(recording, manifest, background);

  ensure_out_dir(config.out_dir);
  std::vector<std::string> written;
  auto emit = [&](const std::string& name, const SampledSignal& s) {
    wav::write(out_path(config, name), s);
    written.push_back(out_path(config, name));
  };
  for (std::size_t i = 0; i < result.per_code_irs.size(); ++i) emit("ir_code_" + std::to_string(i) + ".wav", result.per_code_irs[i]);
  emit("linear_ir.wav", result.linear_ir ? *result.linear_ir : result.per_code_irs.front());
  for (std::size_t i = 0; i < result.deviations.size(); ++i) emit("deviation_" + std::to_string(i) + ".wav", result.deviations[i]);
  if (result.noise_ir) emit("noise_ir.wav", *result.noise_ir);

  json report;
  report["period_no"] = result.plan.period;
  report["repetitions"] = result.plan.repetitions;
  report["guard_periods"] = result.plan.guard_periods;
  report["code_length"] = result.code_length;
  report["code_rows"] = result.code_rows;
  report["averaged_periods"] = result.window.count;
  report["first_averaged_period"] = result.window.first_period;
  std::vector<double> ir_rms;
  for (const auto& ir : result.per_code_irs) ir_rms.push_back(ir.rms());
  report["per_code_ir_rms"] = ir_rms;
  if (result.linear_ir) {
    report["linear_ir_rms"] = result.linear_ir->rms();
    report["deviation_rms"] = result.deviation_rms;
    report["pooled_deviation_rms"] = result.pooled_deviation_rms();
    const double lin = result.linear_ir->rms();
    const double dev = result.pooled_deviation_rms();
    report["pooled_deviation_db_re_linear"] = (lin > 0 && dev > 0) ? json(20.0 * std::log10(dev / lin)) : json(nullptr);
  }
  if (result.noise_ir) report["noise_ir_rms"] = result.noise_ir->rms();
  write_text(out_path(config, "report.json"), report.dump(2) + "\n");
  written.push_back(out_path(config, "report.json"));

  if (result.pooled_deviation_power) {
    const auto smoothed = third_octave_smooth(*result.pooled_deviation_power, {1.0, config.calibration_db});
    std::ofstream csv(out_path(config, "deviation_spectrum.csv"));
    if (!csv) throw ProcessingError("cannot write deviation spectrum");
    write_spectrum_csv(csv, smoothed);
    written.push_back(out_path(config, "deviation_spectrum.csv"));
  }
  return written;
}

std::vector<std::string> cmd_analyze(const RunConfig& config) {
  require(!config.ir_path.empty(), "analyze needs an impulse response file");
  const auto ir = wav::read_mono(config.ir_path);
  std::size_t length = ir.size();
  if (config.truncate_ms) {
    length = static_cast<std::size_t>(std::llround(*config.truncate_ms * 1e-3 * ir.fs()));
    require(length >= 2 && length <= ir.size(), "truncation length must lie within the response");
  }
  const auto spectrum = third_octave_smooth(power_spectrum(ir, length), {1.0, config.calibration_db});
  ensure_out_dir(config.out_dir);
  const auto path = out_path(config, "spectrum.csv");
  std::ofstream out(path);
  if (!out) throw ProcessingError("cannot write file: " + path);
  write_spectrum_csv(out, spectrum);
  return {path};
}

std::vector<std::string> cmd_align(const RunConfig& config) {
  const auto manifest = load_manifest(config.manifest_path);
  require(!config.recording_path.empty(), "align needs a recording");
  const auto recording = wav::read_mono(config.recording_path);
  const auto result = align_recording(recording, manifest, config.c_mag);
  ensure_out_dir(config.out_dir);
  const auto csv = out_path(config, "warp_map.csv");
  write_warp_csv(csv, result.map);
  const auto wav_path = out_path(config, "aligned.wav");
  wav::write(wav_path, result.aligned);
  json report;
  report["warp_slope"] = result.map.slope();
  report["drift_ppm"] = (result.map.slope() - 1.0) * 1e6;
  report["grid_points"] = result.map.size();
  report["phase_delay_s"] = result.phase_delay_s;
  const auto dev = result.map.deviation();
  double lo = dev.front(), hi = dev.front();
  for (double d : dev) lo = std::min(lo, d), hi = std::max(hi, d);
  report["deviation_min_s"] = lo;
  report["deviation_max_s"] = hi;
  const auto report_path = out_path(config, "align_report.json");
  write_text(report_path, report.dump(2) + "\n");
  return {csv, wav_path, report_path};
}

}  // namespace fvnlab
