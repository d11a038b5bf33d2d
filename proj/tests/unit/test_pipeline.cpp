#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include "fvnlab/pipeline.hpp"
#include "fvnlab/wav.hpp"

using namespace fvnlab;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("fvnlab_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunConfig small_config() {
  RunConfig c;
  c.period_no = 4410;
  c.reps = 8;
  c.seed = 5;
  return c;
}

}  // namespace

TEST_SUITE("wav") {
  TEST_CASE("float round trip is exact for float-representable samples") {
    const auto dir = scratch_dir("wav");
    std::vector<double> a{0.0, 0.5, -0.25, 1.0, -1.0, 0.125};
    std::vector<double> b{1.0, 0.0, 0.0, 0.0, 0.0, -0.75};
    const std::vector<SampledSignal> ch{SampledSignal(a, 48000.0), SampledSignal(b, 48000.0)};
    wav::write((dir / "x.wav").string(), ch);
    const auto back = wav::read((dir / "x.wav").string());
    REQUIRE(back.size() == 2);
    CHECK(back[0] == ch[0]);
    CHECK(back[1] == ch[1]);
    CHECK(wav::read_mono((dir / "x.wav").string()) == ch[0]);
  }

  TEST_CASE("errors") {
    const auto dir = scratch_dir("wav_err");
    CHECK_THROWS_AS(wav::read((dir / "missing.wav").string()), ProcessingError);
    std::ofstream((dir / "junk.wav").string()) << "not a wave file";
    CHECK_THROWS_AS(wav::read((dir / "junk.wav").string()), ProcessingError);
    CHECK_THROWS(wav::write((dir / "frac.wav").string(), SampledSignal({0.0}, 44100.5)));
  }
}

TEST_SUITE("config and manifest") {
  TEST_CASE("config parsing") {
    const auto c = parse_run_config(R"({"fs": 48000, "sigma_t": 0.02, "codes": 4, "channels": 4,
                                        "period_no": 9600, "seed": 3, "truncate_ms": 50})");
    CHECK(c.fs == 48000.0);
    CHECK(c.codes == 4);
    CHECK(c.repetitions() == 2 * build_code_matrix(4).length() + 4);
    CHECK(*c.truncate_ms == 50.0);
    CHECK_THROWS_AS(parse_run_config(R"({"codes": 2, "channels": 3})").validate(), ValidationError);
    CHECK_THROWS_AS(parse_run_config(R"({"sigma_t": -1})").validate(), ValidationError);
    CHECK_THROWS_AS(parse_run_config("[1, 2"), ValidationError);
  }

  TEST_CASE("manifest round trip") {
    auto cfg = small_config();
    cfg.codes = 2;
    cfg.channels = 2;
    cfg.reps.reset();
    cfg.shape_slope_db_per_oct = -3.0;
    const auto gen = generate_signals(cfg);
    const auto back = parse_manifest(manifest_to_json(gen.manifest));
    CHECK(back.fs == gen.manifest.fs);
    CHECK(back.code_rows == gen.manifest.code_rows);
    CHECK(back.signal_length == gen.manifest.signal_length);
    REQUIRE(back.shaping.has_value());
    CHECK(*back.shaping == *gen.manifest.shaping);
    CHECK(back.fvn.size() == 2);
    CHECK(back.fvn[1].seed == gen.manifest.fvn[1].seed);
    CHECK(regenerate(back).mix == gen.mix);
  }

  TEST_CASE("measurement without a manifest is refused") {
    CHECK_THROWS_AS(load_manifest(""), ValidationError);
  }
}

TEST_SUITE("pipeline") {
  TEST_CASE("identity target measures a unit impulse") {
    const auto gen = generate_signals(small_config());
    const auto rec = simulate(SimTarget::identity(), std::span(&gen.mix, 1), 0);
    const auto res = measure_recording(rec, gen.manifest);
    REQUIRE(res.per_code_irs.size() == 1);
    const auto& ir = res.per_code_irs[0];
    CHECK(ir.size() == 4410);
    CHECK(std::abs(ir[0] - 1.0) < 1e-6);
    double off = 0.0;
    for (std::size_t n = 1; n < ir.size(); ++n) off = std::max(off, std::abs(ir[n]));
    CHECK(off < 1e-6);
  }

  TEST_CASE("shaped signal measures the same impulse") {
    auto cfg = small_config();
    cfg.shape_slope_db_per_oct = -3.0;
    const auto gen = generate_signals(cfg);
    const auto ir = measure_recording(gen.mix, gen.manifest).per_code_irs[0];
    CHECK(std::abs(ir[0] - 1.0) < 1e-3);
  }

  TEST_CASE("rate mismatch and short recordings") {
    const auto gen = generate_signals(small_config());
    CHECK_THROWS_AS(measure_recording(SampledSignal(gen.mix.vector(), 48000.0), gen.manifest), ValidationError);
    std::vector<double> shortened(gen.mix.samples().begin(), gen.mix.samples().begin() + 4410 * 3);
    CHECK_THROWS_AS(measure_recording(SampledSignal(shortened, 44100.0), gen.manifest), ProcessingError);
  }

  TEST_CASE("100 ppm drift is recovered within 1 ppm") {
    RunConfig cfg;
    cfg.sigma_t = 0.025;
    cfg.period_no = 4410;
    cfg.reps = 200;
    cfg.seed = 2;
    const auto gen = generate_signals(cfg);
    // Target band-limited to 0.4 fs; a full-band response loses its top edge to the
    // resampler's transition band in both the simulated drift and the warp back.
    SimTarget target;
    std::vector<double> lowpass(63);
    for (std::size_t i = 0; i < lowpass.size(); ++i) {
      const double x = static_cast<double>(i) - 31.0;
      const double w = 0.5 + 0.5 * std::cos(std::numbers::pi * x / 32.0);
      lowpass[i] = 0.8 * (x == 0.0 ? 1.0 : std::sin(0.8 * std::numbers::pi * x) / (0.8 * std::numbers::pi * x)) * w;
    }
    target.paths = {lowpass};
    const auto clean = simulate(target, std::span(&gen.mix, 1), 0);
    const auto drifted = apply_drift(clean, DriftSpec::linear(100.0));
    const auto a = align_recording(drifted, gen.manifest);
    CHECK(std::abs(a.map.slope() - 1.0001) * 1e6 < 1.0);
    const auto truth = measure_recording(clean, gen.manifest).per_code_irs[0];
    const auto aligned = measure_recording(a.aligned, gen.manifest).per_code_irs[0];
    const auto unaligned = measure_recording(drifted, gen.manifest).per_code_irs[0];
    const double err = relative_rms_error(aligned.samples(), truth.samples());
    const double err_raw = relative_rms_error(unaligned.samples(), truth.samples());
    MESSAGE("IR rel RMS error aligned " << err << ", unaligned " << err_raw);
    CHECK(err < 0.01);
    CHECK(err_raw > 10 * err);
  }
}

TEST_SUITE("commands") {
  TEST_CASE("generate writes per-channel files and the mix") {
    const auto dir = scratch_dir("gen4");
    auto cfg = small_config();
    cfg.codes = 4;
    cfg.channels = 4;
    cfg.reps.reset();
    cfg.period_no = 441;
    cfg.out_dir = dir.string();
    cmd_generate(cfg);
    for (int i = 0; i < 4; ++i) CHECK(fs::exists(dir / ("channel_" + std::to_string(i) + ".wav")));
    CHECK(fs::exists(dir / "test_signal.wav"));
    CHECK(fs::exists(dir / "manifest.json"));
    const auto m = load_manifest((dir / "manifest.json").string());
    CHECK(m.channels() == 4);
    CHECK(wav::read_mono((dir / "test_signal.wav").string()).size() == m.signal_length);
  }

  TEST_CASE("generate, simulate, measure, analyze end to end") {
    const auto dir = scratch_dir("e2e");
    auto cfg = small_config();
    cfg.out_dir = dir.string();
    cmd_generate(cfg);
    cfg.manifest_path = (dir / "manifest.json").string();
    SimTarget t;
    t.paths = {{0.0, 0.5, 0.25}};
    cfg.target = t;
    cmd_simulate(cfg);
    cfg.recording_path = (dir / "recording.wav").string();
    cmd_measure(cfg);
    const auto ir = wav::read_mono((dir / "ir_code_0.wav").string());
    CHECK(ir[1] == doctest::Approx(0.5).epsilon(1e-5));
    CHECK(ir[2] == doctest::Approx(0.25).epsilon(1e-5));
    CHECK(fs::exists(dir / "report.json"));

    cfg.ir_path = (dir / "ir_code_0.wav").string();
    cmd_analyze(cfg);
    const auto csv = slurp(dir / "spectrum.csv");
    CHECK(csv.rfind("frequency_Hz,level_dB\n", 0) == 0);
  }

  TEST_CASE("measure against the wrong manifest fails") {
    const auto dir = scratch_dir("mismatch");
    auto cfg = small_config();
    cfg.out_dir = dir.string();
    cmd_generate(cfg);
    cfg.fs = 48000.0;
    cfg.period_no = 4800;
    cfg.out_dir = (dir / "other").string();
    fs::create_directories(cfg.out_dir);
    cmd_generate(cfg);
    cfg.manifest_path = (dir / "manifest.json").string();
    cfg.recording_path = (dir / "other" / "test_signal.wav").string();
    CHECK_THROWS_AS(cmd_measure(cfg), ValidationError);
  }

  TEST_CASE("identical config and seed give identical files") {
    auto cfg = small_config();
    cfg.out_dir = scratch_dir("det_a").string();
    cmd_generate(cfg);
    cfg.out_dir = scratch_dir("det_b").string();
    cmd_generate(cfg);
    CHECK(slurp(fs::path(cfg.out_dir) / "test_signal.wav") ==
          slurp(fs::temp_directory_path() / "fvnlab_test_det_a" / "test_signal.wav"));
  }
}
