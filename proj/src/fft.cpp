#include "fvnlab/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cstring>
#include <memory>
#include <mutex>

#include "fvnlab/signal.hpp"

namespace fvnlab::fft {
namespace {

// The FFTW planner is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const noexcept { fftw_free(p); }
};

template <typename T>
using FftwBuffer = std::unique_ptr<T[], FftwFree>;

template <typename T>
FftwBuffer<T> allocate(std::size_t n) {
  auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * std::max<std::size_t>(n, 1)));
  if (p == nullptr) throw std::bad_alloc();
  return FftwBuffer<T>(p);
}

class Plan {
 public:
  explicit Plan(fftw_plan p) : plan_(p) {
    if (plan_ == nullptr) throw ProcessingError("FFTW failed to create a plan");
  }
  Plan(const Plan&) = delete;
  Plan& operator=(const Plan&) = delete;
  ~Plan() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan_);
  }
  void execute() const { fftw_execute(plan_); }

 private:
  fftw_plan plan_;
};

std::vector<Complex> complex_transform(std::span<const Complex> x, int sign) {
  const std::size_t n = x.size();
  if (n == 0) return {};
  auto in = allocate<fftw_complex>(n);
  auto out = allocate<fftw_complex>(n);
  std::unique_ptr<Plan> plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = std::make_unique<Plan>(
        fftw_plan_dft_1d(static_cast<int>(n), in.get(), out.get(), sign, FFTW_ESTIMATE));
  }
  std::memcpy(static_cast<void*>(in.get()), static_cast<const void*>(x.data()), sizeof(fftw_complex) * n);
  plan->execute();
  std::vector<Complex> result(n);
  std::memcpy(static_cast<void*>(result.data()), static_cast<const void*>(out.get()), sizeof(fftw_complex) * n);
  return result;
}

}  // namespace

std::vector<Complex> forward(std::span<const Complex> x) { return complex_transform(x, FFTW_FORWARD); }

std::vector<Complex> inverse(std::span<const Complex> X) {
  auto x = complex_transform(X, FFTW_BACKWARD);
  const double scale = 1.0 / static_cast<double>(X.size());
  for (auto& v : x) v *= scale;
  return x;
}

std::vector<Complex> forward_real(std::span<const double> x, std::size_t n) {
  require(n > 0, "forward_real: transform size must be positive");
  auto in = allocate<double>(n);
  auto out = allocate<fftw_complex>(n / 2 + 1);
  std::unique_ptr<Plan> plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = std::make_unique<Plan>(
        fftw_plan_dft_r2c_1d(static_cast<int>(n), in.get(), out.get(), FFTW_ESTIMATE));
  }
  const std::size_t copy = std::min(n, x.size());
  std::fill(in.get(), in.get() + n, 0.0);
  std::copy_n(x.data(), copy, in.get());
  plan->execute();
  std::vector<Complex> result(n / 2 + 1);
  std::memcpy(static_cast<void*>(result.data()), static_cast<const void*>(out.get()), sizeof(fftw_complex) * result.size());
  return result;
}

std::vector<double> inverse_real(std::span<const Complex> half_spectrum, std::size_t n) {
  require(half_spectrum.size() == n / 2 + 1, "inverse_real: spectrum size must be n/2+1");
  auto in = allocate<fftw_complex>(n / 2 + 1);
  auto out = allocate<double>(n);
  std::unique_ptr<Plan> plan;
  {
    std::lock_guard lock(planner_mutex());
    // c2r destroys its input, which is a private copy here.
    plan = std::make_unique<Plan>(
        fftw_plan_dft_c2r_1d(static_cast<int>(n), in.get(), out.get(), FFTW_ESTIMATE));
  }
  std::memcpy(in.get(), half_spectrum.data(), sizeof(fftw_complex) * half_spectrum.size());
  plan->execute();
  std::vector<double> result(out.get(), out.get() + n);
  const double scale = 1.0 / static_cast<double>(n);
  for (auto& v : result) v *= scale;
  return result;
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

std::vector<double> convolve(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  const std::size_t out_len = a.size() + b.size() - 1;
  if (std::min(a.size(), b.size()) <= 32) {
    std::vector<double> y(out_len, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = 0; j < b.size(); ++j) y[i + j] += a[i] * b[j];
    return y;
  }
  const std::size_t n = next_pow2(out_len);
  auto A = forward_real(a, n);
  const auto B = forward_real(b, n);
  for (std::size_t k = 0; k < A.size(); ++k) A[k] *= B[k];
  auto y = inverse_real(A, n);
  y.resize(out_len);
  return y;
}

std::vector<Complex> convolve(std::span<const double> a, std::span<const Complex> taps) {
  if (a.empty() || taps.empty()) return {};
  const std::size_t out_len = a.size() + taps.size() - 1;
  const std::size_t n = next_pow2(out_len);
  std::vector<Complex> xa(n, Complex{});
  std::vector<Complex> xb(n, Complex{});
  std::transform(a.begin(), a.end(), xa.begin(), [](double v) { return Complex(v, 0.0); });
  std::copy(taps.begin(), taps.end(), xb.begin());
  auto A = forward(xa);
  const auto B = forward(xb);
  for (std::size_t k = 0; k < n; ++k) A[k] *= B[k];
  auto y = inverse(A);
  y.resize(out_len);
  return y;
}

}  // namespace fvnlab::fft
