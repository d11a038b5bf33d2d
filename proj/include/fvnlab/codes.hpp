#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fvnlab {

/// Matrix of mutually orthogonal +/-1 rows used to modulate FVN polarities.
/// Row 0 is all ones; row k >= 1 alternates blocks of 2^(k-1) ones and minus ones.
/// Rows have length N = 2^(rows+1), so B * B^T = N * I.
class CodeMatrix {
 public:
  /// Raw construction; entries are row-major and must all be +1 or -1.
  CodeMatrix(std::size_t rows, std::size_t length, std::vector<int> entries);

  [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
  [[nodiscard]] std::size_t length() const noexcept { return length_; }
  [[nodiscard]] std::span<const int> row(std::size_t r) const;
  [[nodiscard]] int at(std::size_t r, std::size_t n) const { return entries_.at(r * length_ + n); }

  /// Copy with entry (r, n) negated.
  [[nodiscard]] CodeMatrix with_flipped(std::size_t r, std::size_t n) const;

 private:
  std::size_t rows_;
  std::size_t length_;
  std::vector<int> entries_;
};

inline constexpr std::size_t kMaxCodeRows = 16;

/// Builds the block code matrix with `rows` rows (1 <= rows <= 16).
CodeMatrix build_code_matrix(std::size_t rows);

/// Exact integer check of B * B^T == N * I.
bool verify_orthogonality(const CodeMatrix& codes);

}  // namespace fvnlab
