#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fvnlab {

/// Raised when an input violates a documented precondition. Maps to CLI exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when processing fails on valid-looking input (undetectable fundamental,
/// symmetry residue, unreadable file). Maps to CLI exit code 2.
class ProcessingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A finite, non-empty real sample sequence with its sampling rate.
class SampledSignal {
 public:
  SampledSignal(std::vector<double> samples, double fs);

  /// All-zero signal of the given length.
  static SampledSignal zeros(std::size_t length, double fs);

  [[nodiscard]] double fs() const noexcept { return fs_; }
  [[nodiscard]] std::size_t size() const noexcept { return samples_.size(); }
  [[nodiscard]] double duration() const noexcept { return static_cast<double>(size()) / fs_; }

  [[nodiscard]] std::span<const double> samples() const noexcept { return samples_; }
  [[nodiscard]] const std::vector<double>& vector() const noexcept { return samples_; }
  [[nodiscard]] std::vector<double> release() && noexcept { return std::move(samples_); }

  [[nodiscard]] double operator[](std::size_t i) const noexcept { return samples_[i]; }

  [[nodiscard]] double rms() const noexcept;
  [[nodiscard]] double energy() const noexcept;
  [[nodiscard]] double peak_abs() const noexcept;

  friend bool operator==(const SampledSignal&, const SampledSignal&) = default;

 private:
  std::vector<double> samples_;
  double fs_;
};

// Small numeric helpers shared across modules.
double rms(std::span<const double> x) noexcept;

/// ||a - b|| / ||b|| over the common prefix; lengths must match.
double relative_rms_error(std::span<const double> estimate, std::span<const double> truth);

void require(bool condition, const std::string& message);

}  // namespace fvnlab
