#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace fvnlab::fft {

using Complex = std::complex<double>;

// Thin wrappers over FFTW. Plans are built with FFTW_ESTIMATE on aligned scratch
// buffers, so results are bit-reproducible across runs for a given size.

/// Forward DFT, unnormalized: X[k] = sum_n x[n] exp(-2 pi j k n / N).
std::vector<Complex> forward(std::span<const Complex> x);

/// Inverse DFT with 1/N normalization.
std::vector<Complex> inverse(std::span<const Complex> X);

/// Real-input forward DFT of x zero-padded (or truncated) to n points; returns n/2+1 bins.
std::vector<Complex> forward_real(std::span<const double> x, std::size_t n);

/// Inverse of forward_real for an n-point real signal (1/n normalization).
std::vector<double> inverse_real(std::span<const Complex> half_spectrum, std::size_t n);

/// Smallest power of two >= n.
std::size_t next_pow2(std::size_t n);

/// Full linear convolution, length a.size() + b.size() - 1.
std::vector<double> convolve(std::span<const double> a, std::span<const double> b);

/// Linear convolution of a real signal with complex taps, length a.size() + taps.size() - 1.
std::vector<Complex> convolve(std::span<const double> a, std::span<const Complex> taps);

}  // namespace fvnlab::fft
