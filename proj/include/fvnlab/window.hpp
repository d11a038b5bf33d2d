#pragma once

#include <array>
#include <span>

namespace fvnlab {

/// Coefficients a0..a5 of the six-term cosine series used for phase manipulation
/// units and for the analytic probe. Sum is 1, alternating sum is 0.
inline constexpr std::array<double, 6> kSixTermCoefficients{
    0.2624710164, 0.4265335164, 0.2250165621, 0.0726831633, 0.0125124215, 0.0007833203};

/// sum_m coeffs[m] * cos(pi * m * x) for |x| <= 1, else 0. x is the offset
/// normalized by the support half-width.
double cosine_series(double x, std::span<const double> coeffs = kSixTermCoefficients) noexcept;

/// Phase manipulation unit w_p(offset, B): the six-term series over [-B, B],
/// exactly zero outside. Even in offset. Requires half_width > 0.
double phase_unit(double offset, double half_width);

}  // namespace fvnlab
