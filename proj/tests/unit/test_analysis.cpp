#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "fvnlab/analysis.hpp"

using namespace fvnlab;

namespace {

PowerSpectrum grid(double fs, std::size_t L) {
  PowerSpectrum p;
  p.fs = fs;
  for (std::size_t k = 0; k <= L / 2; ++k) p.freqs.push_back(static_cast<double>(k) * fs / static_cast<double>(L));
  p.power.assign(p.freqs.size(), 0.0);
  return p;
}

}  // namespace

TEST_SUITE("power spectrum") {
  TEST_CASE("unit impulse is flat") {
    std::vector<double> x(64, 0.0);
    x[0] = 1.0;
    const auto p = power_spectrum(SampledSignal(x, 8000.0), 64);
    CHECK(p.freqs.size() == 33);
    for (double v : p.power) CHECK(v == doctest::Approx(1.0));
  }

  TEST_CASE("two-tap first difference") {
    std::vector<double> x(128, 0.0);
    x[0] = 1.0;
    x[1] = -1.0;
    const double fs = 8000.0;
    const auto p = power_spectrum(SampledSignal(x, fs), 128);
    for (std::size_t k = 0; k < p.freqs.size(); ++k) {
      const double s = std::sin(std::numbers::pi * p.freqs[k] / fs);
      CHECK(p.power[k] == doctest::Approx(4.0 * s * s).epsilon(1e-12));
    }
  }

  TEST_CASE("invalid lengths") {
    const SampledSignal x(std::vector<double>(10, 1.0), 8000.0);
    CHECK_THROWS_AS(power_spectrum(x, 11), ValidationError);
    CHECK_THROWS_AS(power_spectrum(x, 0), ValidationError);
  }

  TEST_CASE("truncating to the direct path removes the reflection comb") {
    const double fs = 44100.0;
    std::vector<double> ir(4410, 0.0);
    ir[0] = 1.0;
    ir[441] = 0.7;  // 10 ms reflection
    const SampledSignal h(ir, fs);
    const auto whole = third_octave_smooth(power_spectrum(h, h.size()));
    const auto direct = third_octave_smooth(power_spectrum(h, 141));  // 3.2 ms
    auto ripple = [](const SmoothedSpectrum& s, double lo, double hi) {
      double mn = 1e300, mx = -1e300;
      for (std::size_t i = 0; i < s.freqs.size(); ++i)
        if (s.freqs[i] >= lo && s.freqs[i] <= hi) mn = std::min(mn, s.level_db[i]), mx = std::max(mx, s.level_db[i]);
      return mx - mn;
    };
    const double r_whole = ripple(whole, 350.0, 700.0);
    const double r_direct = ripple(direct, 350.0, 700.0);
    MESSAGE("ripple whole " << r_whole << " dB, direct " << r_direct << " dB");
    CHECK(r_whole > 1.0);
    CHECK(r_direct < 0.1);
  }
}

TEST_SUITE("third-octave smoothing") {
  TEST_CASE("constant is preserved") {
    auto p = grid(48000.0, 2048);
    p.power.assign(p.freqs.size(), 0.125);
    const auto q = third_octave_smooth(p);
    REQUIRE(!q.freqs.empty());
    for (double v : q.power) CHECK(std::abs(v - 0.125) < 1e-12);
  }

  TEST_CASE("linear ramp") {
    auto p = grid(48000.0, 2048);
    p.power = p.freqs;
    const auto q = third_octave_smooth(p);
    const double c = (std::pow(2.0, 1.0 / 6.0) + std::pow(2.0, -1.0 / 6.0)) / 2.0;
    CHECK(std::abs(c - 1.00668) < 1e-5);
    for (std::size_t i = 0; i < q.freqs.size(); ++i) CHECK(std::abs(q.power[i] / (q.freqs[i] * c) - 1.0) < 1e-9);
  }

  TEST_CASE("single bin, window containing the whole bin") {
    auto p = grid(48000.0, 4096);
    const std::size_t k0 = 200;
    p.power[k0] = 3.0;
    const double df = p.bin_width();
    const auto q = third_octave_smooth(p);
    std::size_t checked = 0;
    for (std::size_t i = 0; i < q.freqs.size(); ++i) {
      const double fl = q.freqs[i] * std::pow(2.0, -1.0 / 6.0), fh = q.freqs[i] * std::pow(2.0, 1.0 / 6.0);
      if (fl <= p.freqs[k0] - df && p.freqs[k0] + df <= fh) {
        CHECK(std::abs(q.power[i] - 3.0 * df / (fh - fl)) < 1e-9 * 3.0 * df / (fh - fl));
        ++checked;
      } else if (fh <= p.freqs[k0] - df || fl >= p.freqs[k0] + df) {
        CHECK(q.power[i] == 0.0);
      }
    }
    CHECK(checked > 0);
  }

  TEST_CASE("windows stay inside the band and keep the 2^(1/3) ratio") {
    auto p = grid(8000.0, 256);
    p.power.assign(p.freqs.size(), 1.0);
    const auto q = third_octave_smooth(p);
    for (double f : q.freqs) {
      CHECK(f * std::pow(2.0, -1.0 / 6.0) >= p.freqs[1] - 1e-9);
      CHECK(f * std::pow(2.0, 1.0 / 6.0) <= 4000.0 + 1e-9);
      CHECK(std::pow(2.0, 1.0 / 6.0) / std::pow(2.0, -1.0 / 6.0) == doctest::Approx(std::pow(2.0, 1.0 / 3.0)));
    }
  }

  TEST_CASE("positive linear operator") {
    auto p1 = grid(16000.0, 512), p2 = grid(16000.0, 512);
    for (std::size_t k = 0; k < p1.freqs.size(); ++k) {
      p1.power[k] = 1.0 + std::sin(0.1 * static_cast<double>(k)) * 0.5;
      p2.power[k] = static_cast<double>(k % 7);
    }
    auto p3 = p1;
    for (std::size_t k = 0; k < p3.power.size(); ++k) p3.power[k] = 2.0 * p1.power[k] + 0.5 * p2.power[k];
    const auto q1 = third_octave_smooth(p1), q2 = third_octave_smooth(p2), q3 = third_octave_smooth(p3);
    for (std::size_t i = 0; i < q3.power.size(); ++i) CHECK(q3.power[i] == doctest::Approx(2.0 * q1.power[i] + 0.5 * q2.power[i]));
  }

  TEST_CASE("dB reference and calibration") {
    auto p = grid(8000.0, 256);
    p.power.assign(p.freqs.size(), 10.0);
    const auto q = third_octave_smooth(p, {0.1, 3.0});
    for (double l : q.level_db) CHECK(l == doctest::Approx(23.0));
  }

  TEST_CASE("partial-bin integration") {
    const std::vector<double> f{0.0, 1.0, 2.0};
    const std::vector<double> pw{0.0, 2.0, 0.0};
    CHECK(integrate_piecewise_linear(f, pw, 0.0, 2.0) == doctest::Approx(2.0));
    CHECK(integrate_piecewise_linear(f, pw, 0.5, 1.0) == doctest::Approx(0.75));
    CHECK(integrate_piecewise_linear(f, pw, 0.25, 1.75) == doctest::Approx(2.0 - 2.0 * 0.0625));
  }
}

TEST_SUITE("reporting") {
  TEST_CASE("CSV header and rows") {
    SmoothedSpectrum s{{100.0, 200.0}, {1.0, 0.1}, {0.0, -10.0}};
    std::ostringstream out;
    write_spectrum_csv(out, s);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "frequency_Hz,level_dB");
    std::getline(in, line);
    CHECK(line.rfind("100,", 0) == 0);
  }

  TEST_CASE("octave slope") {
    SmoothedSpectrum s;
    for (double f = 50.0; f < 20000.0; f *= 1.1) {
      s.freqs.push_back(f);
      s.level_db.push_back(-3.0 * std::log2(f));
      s.power.push_back(0.0);
    }
    CHECK(octave_slope_db(s, 50.0, 10000.0) == doctest::Approx(-3.0));
  }
}
