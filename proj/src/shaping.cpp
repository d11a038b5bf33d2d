#include "fvnlab/shaping.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "fvnlab/fft.hpp"

namespace fvnlab {

bool is_minimum_phase(std::span<const double> a) {
  std::vector<double> poly(a.begin(), a.end());
  for (std::size_t m = poly.size(); m > 0; --m) {
    const double k = poly[m - 1];
    if (!std::isfinite(k) || std::abs(k) >= 1.0) return false;
    const double denom = 1.0 - k * k;
    std::vector<double> next(m - 1);
    for (std::size_t i = 0; i + 1 < m; ++i) next[i] = (poly[i] - k * poly[m - 2 - i]) / denom;
    poly = std::move(next);
  }
  return true;
}

ShapingFilter::ShapingFilter(std::vector<double> a) : a_(std::move(a)) {
  require(is_minimum_phase(a_), "shaping filter is unstable (a pole lies on or outside the unit circle)");
}

std::complex<double> ShapingFilter::denominator_response(double f, double fs) const {
  const double w = 2.0 * std::numbers::pi * f / fs;
  std::complex<double> sum = 1.0;
  for (std::size_t k = 0; k < a_.size(); ++k) sum += a_[k] * std::polar(1.0, -w * static_cast<double>(k + 1));
  return sum;
}

double ShapingFilter::magnitude_db(double f, double fs) const {
  return -20.0 * std::log10(std::abs(denominator_response(f, fs)));
}

SampledSignal shape_spectrum(const SampledSignal& signal, const ShapingFilter& filter) {
  const auto x = signal.samples();
  const auto a = filter.coefficients();
  std::vector<double> y(x.size());
  for (std::size_t n = 0; n < x.size(); ++n) {
    double acc = x[n];
    const std::size_t depth = std::min(a.size(), n);
    for (std::size_t k = 1; k <= depth; ++k) acc -= a[k - 1] * y[n - k];
    y[n] = acc;
  }
  return SampledSignal(std::move(y), signal.fs());
}

SampledSignal inverse_shape(const SampledSignal& signal, const ShapingFilter& filter) {
  const auto y = signal.samples();
  const auto a = filter.coefficients();
  std::vector<double> x(y.size());
  for (std::size_t n = 0; n < y.size(); ++n) {
    double acc = y[n];
    const std::size_t depth = std::min(a.size(), n);
    for (std::size_t k = 1; k <= depth; ++k) acc += a[k - 1] * y[n - k];
    x[n] = acc;
  }
  return SampledSignal(std::move(x), signal.fs());
}

namespace {

std::vector<double> log_grid(double lo, double hi, std::size_t points) {
  std::vector<double> f(points);
  for (std::size_t i = 0; i < points; ++i)
    f[i] = lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(points - 1));
  return f;
}

// Levinson-Durbin on autocorrelation r[0..p]; returns a_1..a_p.
std::vector<double> levinson(std::span<const double> r, std::size_t order) {
  std::vector<double> a(order, 0.0);
  double err = r[0];
  for (std::size_t m = 0; m < order; ++m) {
    double acc = r[m + 1];
    for (std::size_t i = 0; i < m; ++i) acc += a[i] * r[m - i];
    const double k = -acc / err;
    std::vector<double> prev(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(m));
    for (std::size_t i = 0; i < m; ++i) a[i] = prev[i] + k * prev[m - 1 - i];
    a[m] = k;
    err *= (1.0 - k * k);
    if (err <= 0.0) break;
  }
  return a;
}

struct Residuals {
  Eigen::VectorXd values;
  double cost = 0.0;
};

Residuals residuals(std::span<const double> a, std::span<const double> freqs, std::span<const double> target,
                    double fs) {
  Eigen::VectorXd e(static_cast<Eigen::Index>(freqs.size()));
  for (std::size_t j = 0; j < freqs.size(); ++j) {
    const double w = 2.0 * std::numbers::pi * freqs[j] / fs;
    std::complex<double> A = 1.0;
    for (std::size_t k = 0; k < a.size(); ++k) A += a[k] * std::polar(1.0, -w * static_cast<double>(k + 1));
    e[static_cast<Eigen::Index>(j)] = -20.0 * std::log10(std::abs(A)) - target[j];
  }
  e.array() -= e.mean();
  return {e, e.squaredNorm()};
}

}  // namespace

ShapingFilter fit_shaping_filter(const std::function<double(double)>& target_db, double fs,
                                 const ShapingFitOptions& options) {
  require(fs > 0.0, "fit: sampling rate must be positive");
  require(options.order >= 1, "fit: order must be at least 1");
  require(options.f_low > 0.0 && options.f_high > options.f_low && options.f_high < fs / 2.0,
          "fit: band must satisfy 0 < f_low < f_high < fs/2");
  require(options.grid_points >= 2 * options.order, "fit: grid must have at least twice as many points as the order");

  auto clamped_target = [&](double f) { return target_db(std::clamp(f, options.f_low, options.f_high)); };

  // Initial all-pole fit from the autocorrelation of the target power spectrum.
  const std::size_t n = 65536;
  std::vector<std::complex<double>> power(n / 2 + 1);
  for (std::size_t k = 0; k <= n / 2; ++k) {
    const double f = static_cast<double>(k) * fs / static_cast<double>(n);
    power[k] = std::pow(10.0, clamped_target(std::max(f, 1e-3)) / 10.0);
  }
  const auto r = fft::inverse_real(power, n);
  std::vector<double> a = levinson(r, options.order);
  if (!is_minimum_phase(a)) a.assign(options.order, 0.0);

  // Damped Gauss-Newton on the log-frequency grid.
  const auto freqs = log_grid(options.f_low, options.f_high, options.grid_points);
  std::vector<double> target(freqs.size());
  std::transform(freqs.begin(), freqs.end(), target.begin(), clamped_target);
  const auto p = static_cast<Eigen::Index>(options.order);
  const auto m = static_cast<Eigen::Index>(freqs.size());
  const double db_scale = 20.0 / std::numbers::ln10;

  auto current = residuals(a, freqs, target, fs);
  double lambda = 1e-3;
  for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
    Eigen::MatrixXd jac(m, p);
    for (Eigen::Index j = 0; j < m; ++j) {
      const double w = 2.0 * std::numbers::pi * freqs[static_cast<std::size_t>(j)] / fs;
      std::complex<double> A = 1.0;
      for (std::size_t k = 0; k < a.size(); ++k) A += a[k] * std::polar(1.0, -w * static_cast<double>(k + 1));
      const double mag2 = std::norm(A);
      for (Eigen::Index i = 0; i < p; ++i) {
        const auto zi = std::polar(1.0, -w * static_cast<double>(i + 1));
        jac(j, i) = -db_scale * (std::conj(A) * zi).real() / mag2;
      }
    }
    // The free level offset is profiled out, so center each column.
    jac.rowwise() -= jac.colwise().mean();
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd grad = jac.transpose() * current.values;

    bool improved = false;
    for (int attempt = 0; attempt < 12 && !improved; ++attempt) {
      Eigen::MatrixXd lhs = jtj;
      lhs.diagonal().array() += lambda * (jtj.diagonal().array() + 1e-12);
      const Eigen::VectorXd step = lhs.ldlt().solve(-grad);
      std::vector<double> trial(a);
      for (Eigen::Index i = 0; i < p; ++i) trial[static_cast<std::size_t>(i)] += step[i];
      if (is_minimum_phase(trial)) {
        auto res = residuals(trial, freqs, target, fs);
        if (res.cost < current.cost) {
          a = std::move(trial);
          current = std::move(res);
          lambda = std::max(lambda / 3.0, 1e-9);
          improved = true;
          break;
        }
      }
      lambda *= 4.0;
    }
    if (!improved) break;
  }
  return ShapingFilter(std::move(a));
}

ShapingFilter fit_slope_filter(double db_per_octave, double fs, const ShapingFitOptions& options) {
  const double ref = options.f_low;
  return fit_shaping_filter([=](double f) { return db_per_octave * std::log2(f / ref); }, fs, options);
}

double shaping_fit_error_db(const ShapingFilter& filter, const std::function<double(double)>& target_db,
                            double fs, double f_low, double f_high, std::size_t points) {
  const auto freqs = log_grid(f_low, f_high, points);
  std::vector<double> diff(freqs.size());
  for (std::size_t j = 0; j < freqs.size(); ++j) diff[j] = filter.magnitude_db(freqs[j], fs) - target_db(freqs[j]);
  const double mean = std::accumulate(diff.begin(), diff.end(), 0.0) / static_cast<double>(diff.size());
  double worst = 0.0;
  for (double d : diff) worst = std::max(worst, std::abs(d - mean));
  return worst;
}

}  // namespace fvnlab
