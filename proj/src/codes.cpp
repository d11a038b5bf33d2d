#include "fvnlab/codes.hpp"

#include <algorithm>
#include <cstdint>

#include "fvnlab/signal.hpp"

namespace fvnlab {

CodeMatrix::CodeMatrix(std::size_t rows, std::size_t length, std::vector<int> entries)
    : rows_(rows), length_(length), entries_(std::move(entries)) {
  require(rows_ >= 1 && length_ >= 1, "code matrix must be non-empty");
  require(entries_.size() == rows_ * length_, "code matrix entry count does not match its shape");
  require(std::all_of(entries_.begin(), entries_.end(), [](int v) { return v == 1 || v == -1; }),
          "code matrix entries must be +1 or -1");
}

std::span<const int> CodeMatrix::row(std::size_t r) const {
  require(r < rows_, "code row index out of range");
  return std::span<const int>(entries_).subspan(r * length_, length_);
}

CodeMatrix CodeMatrix::with_flipped(std::size_t r, std::size_t n) const {
  require(r < rows_ && n < length_, "code matrix index out of range");
  auto entries = entries_;
  entries[r * length_ + n] = -entries[r * length_ + n];
  return CodeMatrix(rows_, length_, std::move(entries));
}

CodeMatrix build_code_matrix(std::size_t rows) {
  if (rows < 1 || rows > kMaxCodeRows) throw ValidationError("code row count must lie in 1..16");
  const std::size_t length = std::size_t{1} << (rows + 1);
  std::vector<int> entries(rows * length, 1);
  for (std::size_t r = 1; r < rows; ++r) {
    const std::size_t block = std::size_t{1} << (r - 1);
    for (std::size_t n = 0; n < length; ++n) entries[r * length + n] = ((n / block) % 2 == 0) ? 1 : -1;
  }
  return CodeMatrix(rows, length, std::move(entries));
}

bool verify_orthogonality(const CodeMatrix& codes) {
  const auto n = static_cast<std::int64_t>(codes.length());
  for (std::size_t i = 0; i < codes.rows(); ++i) {
    const auto ri = codes.row(i);
    for (std::size_t j = i; j < codes.rows(); ++j) {
      const auto rj = codes.row(j);
      std::int64_t dot = 0;
      for (std::size_t k = 0; k < ri.size(); ++k) dot += static_cast<std::int64_t>(ri[k]) * rj[k];
      if (dot != (i == j ? n : 0)) return false;
    }
  }
  return true;
}

}  // namespace fvnlab
