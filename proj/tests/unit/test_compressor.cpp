#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "fvnlab/codes.hpp"
#include "fvnlab/compressor.hpp"
#include "fvnlab/fft.hpp"
#include "fvnlab/sequencer.hpp"
#include "fvnlab/simharness.hpp"
#include "fvnlab/velvet.hpp"

using namespace fvnlab;

namespace {

constexpr double kFs = 44100.0;
constexpr std::size_t kPeriod = 4410;

std::vector<double> random_fir(std::size_t taps, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<double> h(taps);
  for (std::size_t i = 0; i < taps; ++i) h[i] = g(rng) * std::exp(-static_cast<double>(i) / 10.0);
  return h;
}

std::vector<double> padded(std::span<const double> h, std::size_t n) {
  std::vector<double> out(n, 0.0);
  std::copy_n(h.begin(), std::min(n, h.size()), out.begin());
  return out;
}

struct Rig {
  CodeMatrix codes;
  std::vector<SampledSignal> units;
  std::vector<SampledSignal> seqs;
  AveragingPlan plan;
  std::vector<DemuxChannel> channels;
};

Rig make_rig(std::size_t code_rows, std::size_t channels, std::size_t reps, std::uint64_t seed) {
  Rig r{build_code_matrix(code_rows), {}, {}, {kPeriod, reps, 2}, {}};
  for (std::size_t ch = 0; ch < channels; ++ch) {
    SequencePlan plan{FvnSpec::with_defaults(0.01, kFs, seed + ch), ch, kPeriod, reps, 2};
    r.units.push_back(placement_unit(plan.fvn));
    r.seqs.push_back(assemble_sequence(r.units.back(), plan, r.codes));
    r.channels.push_back({r.units.back(), ch});
  }
  return r;
}

SampledSignal impulse_train(std::span<const int> row, std::size_t periods, std::size_t period, std::size_t at) {
  std::vector<double> x(periods * period, 0.0);
  for (std::size_t s = 0; s < periods; ++s) x[s * period + at] = row[s % row.size()];
  return SampledSignal(std::move(x), kFs);
}

}  // namespace

TEST_SUITE("pulse compression") {
  TEST_CASE("unit FVN compresses to an impulse at sample 0") {
    const auto u = placement_unit(FvnSpec::with_defaults(0.01, kFs, 3));
    const auto c = pulse_compress(u, u);
    CHECK(c[0] == doctest::Approx(1.0).epsilon(1e-12));
    double off = 0.0;
    for (std::size_t n = 1; n < c.size(); ++n) off = std::max(off, std::abs(c[n]));
    CHECK(off < 1e-8);
  }

  TEST_CASE("recovers a 3-tap response") {
    const auto u = placement_unit(FvnSpec::with_defaults(0.01, kFs, 4));
    const std::vector<double> h{1.0, 0.5, 0.25};
    const SampledSignal rec(fft::convolve(u.samples(), h), kFs);
    const auto c = pulse_compress(rec, u);
    for (std::size_t n = 0; n < 3; ++n) CHECK(std::abs(c[n] - h[n]) < 1e-7);
    CHECK(std::abs(c[3]) < 1e-7);
  }

  TEST_CASE("zeros compress to zeros") {
    const auto u = placement_unit(FvnSpec::with_defaults(0.01, kFs, 4));
    const auto z = pulse_compress(SampledSignal::zeros(u.size() + 10, kFs), u);
    for (double v : z.samples()) CHECK(v == 0.0);
  }

  TEST_CASE("rejects mismatched rates and short recordings") {
    const auto u = placement_unit(FvnSpec::with_defaults(0.01, kFs, 4));
    CHECK_THROWS_AS(pulse_compress(SampledSignal::zeros(u.size(), 48000.0), u), ValidationError);
    CHECK_THROWS_AS(pulse_compress(SampledSignal::zeros(10, kFs), u), ValidationError);
  }
}

TEST_SUITE("synchronized averaging") {
  TEST_CASE("identical impulses, row 0") {
    const auto codes = build_code_matrix(1);
    const auto x = impulse_train(codes.row(0), 8, 100, 5);
    const auto avg = synchronized_average(x, codes.row(0), {100, 8, 2});
    CHECK(avg.size() == 100);
    for (std::size_t n = 0; n < 100; ++n) CHECK(avg[n] == (n == 5 ? 1.0 : 0.0));
  }

  TEST_CASE("row 1 train recovered by row 1, cancelled by row 0") {
    const auto codes = build_code_matrix(2);
    const auto x = impulse_train(codes.row(1), 12, 100, 0);
    const auto right = synchronized_average(x, codes.row(1), {100, 12, 2});
    const auto wrong = synchronized_average(x, codes.row(0), {100, 12, 2});
    CHECK(right[0] == 1.0);
    for (double v : wrong.samples()) CHECK(std::abs(v) < 1e-12);
  }

  TEST_CASE("window is the central multiple of N") {
    const auto w = averaging_window({100, 30, 2}, 8);
    CHECK(w.count == 24);
    CHECK(w.first_period == 3);  // 26 interior periods, 2 discarded, one on each side
    CHECK_THROWS_AS(averaging_window({100, 11, 2}, 8), ValidationError);
  }

  TEST_CASE("too few periods") {
    const auto codes = build_code_matrix(2);
    const auto x = impulse_train(codes.row(0), 11, 100, 0);
    CHECK_THROWS_AS(synchronized_average(x, codes.row(0), {100, 11, 2}), ValidationError);
    // Plan claims 12 periods but the signal holds fewer.
    CHECK_THROWS_AS(synchronized_average(x, codes.row(0), {100, 24, 2}), ValidationError);
  }
}

TEST_SUITE("demultiplex") {
  TEST_CASE("two paths, two codes, 12 periods") {
    auto rig = make_rig(2, 2, 12, 100);
    SimTarget t;
    t.paths = {random_fir(64, 1), random_fir(64, 2)};
    const auto rec = simulate(t, rig.seqs, 0);
    const auto res = demultiplex(rec, rig.channels, rig.codes, rig.plan);
    for (std::size_t ch = 0; ch < 2; ++ch)
      CHECK(relative_rms_error(res.per_code_irs[ch].samples(), padded(t.paths[ch], kPeriod)) < 1e-6);
  }

  TEST_CASE("single unit, row 0 equals a plain compress-and-average") {
    auto rig = make_rig(1, 1, 8, 3);
    const auto res = demultiplex(rig.seqs[0], rig.channels, rig.codes, rig.plan);
    const auto direct = synchronized_average(pulse_compress(rig.seqs[0], rig.units[0]), rig.codes.row(0), rig.plan);
    CHECK(res.per_code_irs[0] == direct);
    CHECK(res.per_code_irs[0][0] == doctest::Approx(1.0).epsilon(1e-9));
  }

  TEST_CASE("four units on one LTI path agree") {
    auto rig = make_rig(4, 4, 36, 50);
    const auto mix = multiplex(rig.seqs);
    SimTarget t;
    t.paths = {random_fir(48, 5)};
    const auto rec = simulate(t, std::span(&mix, 1), 0);
    const auto res = demultiplex(rec, rig.channels, rig.codes, rig.plan);
    for (std::size_t ch = 1; ch < 4; ++ch)
      CHECK(relative_rms_error(res.per_code_irs[ch].samples(), res.per_code_irs[0].samples()) < 1e-6);
    CHECK(relative_rms_error(res.per_code_irs[0].samples(), padded(t.paths[0], kPeriod)) < 1e-6);
  }

  TEST_CASE("wrong-code residue below 1e-10") {
    auto rig = make_rig(2, 2, 12, 70);
    SimTarget t;
    t.paths = {random_fir(64, 3)};
    const auto rec = simulate(t, std::span(&rig.seqs[0], 1), 0);
    const double ref = synchronized_average(pulse_compress(rec, rig.units[0]), rig.codes.row(0), rig.plan).rms();
    CHECK(synchronized_average(pulse_compress(rec, rig.units[0]), rig.codes.row(1), rig.plan).rms() / ref < 1e-10);
    CHECK(synchronized_average(pulse_compress(rec, rig.units[1]), rig.codes.row(1), rig.plan).rms() / ref < 1e-10);
  }

  TEST_CASE("pipeline is linear") {
    auto rig = make_rig(2, 2, 12, 10);
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g;
    std::vector<double> yv(rig.seqs[0].size());
    for (auto& v : yv) v = g(rng);
    const SampledSignal x = multiplex(rig.seqs);
    const SampledSignal y(yv, kFs);
    const double a = 0.7, b = -1.3;
    std::vector<double> comb(x.size());
    for (std::size_t n = 0; n < comb.size(); ++n) comb[n] = a * x[n] + b * y[n];
    const auto rc = demultiplex(SampledSignal(comb, kFs), rig.channels, rig.codes, rig.plan);
    const auto rx = demultiplex(x, rig.channels, rig.codes, rig.plan);
    const auto ry = demultiplex(y, rig.channels, rig.codes, rig.plan);
    for (std::size_t ch = 0; ch < 2; ++ch) {
      std::vector<double> lin(kPeriod);
      for (std::size_t n = 0; n < kPeriod; ++n) lin[n] = a * rx.per_code_irs[ch][n] + b * ry.per_code_irs[ch][n];
      CHECK(relative_rms_error(rc.per_code_irs[ch].samples(), lin) < 1e-10);
    }
  }
}

TEST_SUITE("nonlinear separation") {
  TEST_CASE("identical responses have zero deviation") {
    MeasurementResult r;
    const SampledSignal ir({1.0, 0.5, 0.0, -0.25}, kFs);
    r.per_code_irs = {ir, ir, ir};
    const auto s = separate_nonlinear(r);
    CHECK(*s.linear_ir == ir);
    for (const auto& d : s.deviations)
      for (double v : d.samples()) CHECK(v == 0.0);
    CHECK(s.pooled_deviation_rms() == 0.0);
  }

  TEST_CASE("needs two codes") {
    MeasurementResult r;
    r.per_code_irs = {SampledSignal({1.0}, kFs)};
    CHECK_THROWS_AS(separate_nonlinear(r), ValidationError);
  }

  TEST_CASE("deviations average to zero") {
    MeasurementResult r;
    r.per_code_irs = {SampledSignal({1.0, 2.0, 3.0}, kFs), SampledSignal({0.5, -1.0, 7.0}, kFs),
                      SampledSignal({0.1, 0.2, -4.0}, kFs)};
    const auto s = separate_nonlinear(r);
    for (std::size_t n = 0; n < 3; ++n) {
      double sum = 0.0;
      for (const auto& d : s.deviations) sum += d[n];
      CHECK(std::abs(sum) < 1e-12);
    }
    REQUIRE(s.pooled_deviation_power.has_value());
    CHECK(s.deviation_rms.size() == 3);
  }

  TEST_CASE("cubic target separates, linear target does not") {
    auto rig = make_rig(4, 4, 36, 200);
    auto mix = multiplex(rig.seqs);
    std::vector<double> d(mix.samples().begin(), mix.samples().end());
    for (auto& v : d) v *= 5.0;
    const SampledSignal in(d, kFs);
    SimTarget t;
    t.paths = {random_fir(32, 8)};
    t.nonlinearity = {0.0, 1.0, 0.0, 0.1};
    const auto nl = separate_nonlinear(demultiplex(simulate(t, std::span(&in, 1), 0), rig.channels, rig.codes, rig.plan));
    t.nonlinearity = {0.0, 1.0};
    const auto lin = separate_nonlinear(demultiplex(simulate(t, std::span(&in, 1), 0), rig.channels, rig.codes, rig.plan));
    CHECK(lin.pooled_deviation_rms() < 1e-6 * lin.linear_ir->rms());
    CHECK(nl.pooled_deviation_rms() > 100.0 * lin.pooled_deviation_rms());
  }
}

TEST_SUITE("noise floor") {
  TEST_CASE("zeros give a zero floor") {
    auto rig = make_rig(1, 1, 8, 1);
    const auto n = noise_floor(SampledSignal::zeros(rig.seqs[0].size(), kFs), rig.channels, rig.codes, rig.plan,
                               rig.seqs[0].size());
    for (double v : n.samples()) CHECK(v == 0.0);
  }

  TEST_CASE("floor scales with background level") {
    auto rig = make_rig(2, 2, 12, 1);
    const std::size_t len = multiplex(rig.seqs).size();
    const auto w1 = generate_noise(NoiseSpec::Kind::White, len, 0.01, kFs, 3);
    std::vector<double> w2(w1);
    for (auto& v : w2) v *= 2.0;
    const double f1 = noise_floor(SampledSignal(w1, kFs), rig.channels, rig.codes, rig.plan, len).rms();
    const double f2 = noise_floor(SampledSignal(w2, kFs), rig.channels, rig.codes, rig.plan, len).rms();
    CHECK(std::abs(f2 / f1 - 2.0) < 0.1);
  }

  TEST_CASE("background equal to the test signal reproduces the measurement") {
    auto rig = make_rig(1, 1, 8, 1);
    const auto m = demultiplex(rig.seqs[0], rig.channels, rig.codes, rig.plan);
    const auto n = noise_floor(rig.seqs[0], rig.channels, rig.codes, rig.plan, rig.seqs[0].size());
    CHECK(n == m.per_code_irs[0]);
  }

  TEST_CASE("length mismatch") {
    auto rig = make_rig(1, 1, 8, 1);
    CHECK_THROWS_AS(noise_floor(rig.seqs[0], rig.channels, rig.codes, rig.plan, rig.seqs[0].size() + 1), ValidationError);
  }
}
