#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "fvnlab/analysis.hpp"
#include "fvnlab/codes.hpp"
#include "fvnlab/fft.hpp"
#include "fvnlab/sequencer.hpp"
#include "fvnlab/shaping.hpp"
#include "fvnlab/velvet.hpp"

using namespace fvnlab;

namespace {

constexpr double kFs = 44100.0;

SampledSignal impulse() { return SampledSignal({1.0}, kFs); }

SampledSignal white(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<double> x(n);
  for (auto& v : x) v = g(rng);
  return SampledSignal(std::move(x), kFs);
}

}  // namespace

TEST_SUITE("assemble") {
  TEST_CASE("impulse, row 0, period 100, 8 reps is a pulse train") {
    const auto codes = build_code_matrix(1);
    SequencePlan plan{FvnSpec::with_defaults(0.01, kFs, 0), 0, 100, 8, 2};
    const auto s = assemble_sequence(impulse(), plan, codes);
    REQUIRE(s.size() == 800);
    for (std::size_t n = 0; n < 800; ++n) CHECK(s[n] == (n % 100 == 0 ? 1.0 : 0.0));
  }

  TEST_CASE("impulse, row 1 of N = 8, 8 reps alternates") {
    const auto codes = build_code_matrix(2);
    SequencePlan plan{FvnSpec::with_defaults(0.01, kFs, 0), 1, 100, 8, 0};
    const auto s = assemble_sequence(impulse(), plan, codes);
    for (std::size_t r = 0; r < 8; ++r) CHECK(s[100 * r] == (r % 2 == 0 ? 1.0 : -1.0));
  }

  TEST_CASE("RMS bookkeeping for non-overlapping FVN placements") {
    const auto codes = build_code_matrix(1);
    SequencePlan plan{FvnSpec::with_defaults(0.01, kFs, 3), 0, 22050, 16, 2};
    const auto unit = placement_unit(plan.fvn);
    REQUIRE(unit.size() < plan.period);
    const auto s = assemble_sequence(plan, codes);
    CHECK(s.size() == 16 * 22050);
    const double expected = std::sqrt(16.0 * unit.energy() / static_cast<double>(s.size()));
    CHECK(std::abs(s.rms() - expected) < 1e-6);
  }

  TEST_CASE("overlapping tails add linearly") {
    const auto codes = build_code_matrix(1);
    const SampledSignal unit({1.0, 2.0, 3.0}, kFs);
    SequencePlan plan{FvnSpec::with_defaults(0.01, kFs, 0), 0, 2, 8, 2};
    const auto s = assemble_sequence(unit, plan, codes);
    CHECK(s.size() == 7 * 2 + 3);
    CHECK(s[0] == 1.0);
    CHECK(s[2] == 3.0 + 1.0);
    CHECK(s[16] == 3.0);
  }

  TEST_CASE("polarity linearity: row b plus row -b cancels") {
    const auto codes = build_code_matrix(3);
    std::vector<int> entries;
    for (std::size_t r = 0; r < codes.rows(); ++r)
      for (int v : codes.row(r)) entries.push_back(r == 2 ? -v : v);
    const CodeMatrix negated(codes.rows(), codes.length(), entries);
    SequencePlan plan{FvnSpec::with_defaults(0.01, kFs, 8), 2, 4410, 20, 2};
    const auto unit = placement_unit(plan.fvn);
    const auto a = assemble_sequence(unit, plan, codes);
    const auto b = assemble_sequence(unit, plan, negated);
    for (std::size_t n = 0; n < a.size(); ++n) CHECK(a[n] + b[n] == 0.0);
  }

  TEST_CASE("periodic under a shift of one code period") {
    const auto codes = build_code_matrix(2);
    SequencePlan plan{FvnSpec::with_defaults(0.01, kFs, 8), 1, 4410, 24, 2};
    const auto s = assemble_sequence(plan, codes);
    const std::size_t shift = codes.length() * plan.period;
    // Compare interior periods whose neighbourhoods are complete in both positions.
    for (std::size_t n = 2 * plan.period; n < 6 * plan.period; n += 7) CHECK(s[n] == doctest::Approx(s[n + shift]).epsilon(1e-12));
  }

  TEST_CASE("plan validation") {
    const auto codes = build_code_matrix(2);
    SequencePlan plan{FvnSpec::with_defaults(0.01, kFs, 0), 0, 100, 11, 2};
    CHECK_THROWS_AS(plan.validate(codes), ValidationError);  // 11 < 8 + 4
    plan.repetitions = 12;
    CHECK_NOTHROW(plan.validate(codes));
    plan.code_row = 2;
    CHECK_THROWS_AS(plan.validate(codes), ValidationError);
    plan.code_row = 0;
    plan.period = 0;
    CHECK_THROWS_AS(plan.validate(codes), ValidationError);
  }
}

TEST_SUITE("multiplex") {
  TEST_CASE("x and -x cancel") {
    const auto x = white(100, 1);
    std::vector<double> neg(x.samples().begin(), x.samples().end());
    for (auto& v : neg) v = -v;
    const std::vector<SampledSignal> in{x, SampledSignal(neg, kFs)};
    const auto sum = multiplex(in);
    for (double v : sum.samples()) CHECK(v == 0.0);
  }

  TEST_CASE("single signal is unchanged, shorter signals are zero padded") {
    const auto x = white(50, 2);
    CHECK(multiplex(std::vector<SampledSignal>{x}) == x);
    const std::vector<SampledSignal> in{x, SampledSignal({1.0}, kFs)};
    const auto m = multiplex(in);
    CHECK(m.size() == 50);
    CHECK(m[0] == x[0] + 1.0);
    CHECK(m[1] == x[1]);
  }

  TEST_CASE("four code-modulated sequences: power of the sum near the sum of powers") {
    const auto codes = build_code_matrix(4);
    std::vector<SampledSignal> seqs;
    double sum_power = 0.0;
    for (std::size_t ch = 0; ch < 4; ++ch) {
      SequencePlan plan{FvnSpec::with_defaults(0.01, kFs, 40 + ch), ch, 8820, 36, 2};
      seqs.push_back(assemble_sequence(plan, codes));
      sum_power += seqs.back().energy();
    }
    const auto mix = multiplex(seqs);
    CHECK(std::abs(mix.energy() / sum_power - 1.0) < 0.05);
  }

  TEST_CASE("rejects mismatched rates") {
    const std::vector<SampledSignal> in{SampledSignal({1.0}, kFs), SampledSignal({1.0}, 48000.0)};
    CHECK_THROWS_AS(multiplex(in), ValidationError);
  }
}

TEST_SUITE("shaping") {
  TEST_CASE("order 0 is the identity") {
    const auto x = white(64, 3);
    CHECK(shape_spectrum(x, ShapingFilter()) == x);
    CHECK(inverse_shape(x, ShapingFilter()) == x);
  }

  TEST_CASE("unit impulse through A(z) gives [1, a1..ap]") {
    const ShapingFilter f({-0.5, 0.25, 0.1});
    std::vector<double> imp(6, 0.0);
    imp[0] = 1.0;
    const auto y = inverse_shape(SampledSignal(imp, kFs), f);
    CHECK(y[0] == 1.0);
    CHECK(y[1] == -0.5);
    CHECK(y[2] == 0.25);
    CHECK(y[3] == 0.1);
    CHECK(y[4] == 0.0);
  }

  TEST_CASE("roundtrip on arbitrary signals and filters") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-0.9, 0.9);
    for (int trial = 0; trial < 10; ++trial) {
      // Random stable filter from reflection coefficients (step-up recursion).
      std::vector<double> a;
      for (int p = 0; p < 8; ++p) {
        const double k = u(rng);
        std::vector<double> next(a.size() + 1);
        for (std::size_t i = 0; i < a.size(); ++i) next[i] = a[i] + k * a[a.size() - 1 - i];
        next[a.size()] = k;
        a = next;
      }
      const ShapingFilter f(a);
      const auto x = white(2000, 100 + static_cast<std::uint64_t>(trial));
      const auto back = inverse_shape(shape_spectrum(x, f), f);
      for (std::size_t n = 0; n < x.size(); ++n) CHECK(std::abs(back[n] - x[n]) < 1e-9);
    }
  }

  TEST_CASE("unstable filters are rejected") {
    CHECK_THROWS_AS(ShapingFilter({-2.0}), ValidationError);
    CHECK_THROWS_AS(ShapingFilter({0.0, 1.0}), ValidationError);
    CHECK(is_minimum_phase(std::vector<double>{-0.9}));
    CHECK_FALSE(is_minimum_phase(std::vector<double>{-1.0}));
  }

  TEST_CASE("first-order pole near DC tilts a white spectrum as 1/|A|^2") {
    const ShapingFilter f({-0.95});
    const std::size_t seg = 1024;
    const auto x = white(seg * 400, 9);
    const auto y = shape_spectrum(x, f);
    std::vector<PowerSpectrum> ps;
    for (std::size_t s = 1; s < 400; ++s) {
      std::vector<double> chunk(y.samples().begin() + static_cast<std::ptrdiff_t>(s * seg),
                                y.samples().begin() + static_cast<std::ptrdiff_t>((s + 1) * seg));
      ps.push_back(power_spectrum(SampledSignal(chunk, kFs), seg));
    }
    const auto avg = average_power(ps);
    const auto sm = third_octave_smooth(avg);
    for (std::size_t i = 0; i < sm.freqs.size(); ++i) {
      if (sm.freqs[i] < 200.0 || sm.freqs[i] > 15000.0) continue;
      // Periodogram of unit-variance white noise has mean power seg per bin.
      const double expected_db = 10.0 * std::log10(static_cast<double>(seg)) + f.magnitude_db(sm.freqs[i], kFs);
      CHECK(std::abs(sm.level_db[i] - expected_db) < 1.0);
    }
  }

  TEST_CASE("-3 dB/oct fit over 50 Hz - 10 kHz") {
    const auto f = fit_slope_filter(-3.0, kFs);
    CHECK(f.order() == 46);
    const auto target = [](double hz) { return -3.0 * std::log2(hz / 1000.0); };
    const double err = shaping_fit_error_db(f, target, kFs, 50.0, 10000.0);
    MESSAGE("max fit error " << err << " dB");
    CHECK(err <= 1.5);

    // The shaped FVN inherits the slope.
    const auto unit = synthesize_unit_fvn(FvnSpec::with_defaults(0.1, kFs, 1));
    const auto shaped = shape_spectrum(unit, f);
    const auto sm = third_octave_smooth(power_spectrum(shaped, shaped.size()));
    const double slope = octave_slope_db(sm, 50.0, 10000.0);
    MESSAGE("shaped FVN slope " << slope << " dB/oct");
    CHECK(std::abs(slope + 3.0) <= 1.5);
  }

  TEST_CASE("shaped FVN then inverse is all-pass again") {
    const auto f = fit_slope_filter(-3.0, kFs);
    const auto unit = synthesize_unit_fvn(FvnSpec::with_defaults(0.01, kFs, 2));
    const auto back = inverse_shape(shape_spectrum(unit, f), f);
    const auto X = fft::forward_real(back.samples(), back.size());
    for (const auto& v : X) CHECK(std::abs(std::abs(v) - 1.0) < 1e-6);
  }
}
