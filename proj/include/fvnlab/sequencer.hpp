#pragma once

#include <cstddef>
#include <span>

#include "fvnlab/codes.hpp"
#include "fvnlab/signal.hpp"
#include "fvnlab/velvet.hpp"

namespace fvnlab {

/// Placement of one unit FVN every `period` samples with polarity taken from a code row.
struct SequencePlan {
  FvnSpec fvn;
  std::size_t code_row = 0;       ///< 0-based row of the CodeMatrix
  std::size_t period = 0;         ///< n_o, samples between placements
  std::size_t repetitions = 0;    ///< number of placements
  std::size_t guard_periods = 2;  ///< placements excluded from averaging at each end

  /// Checks code_row, period and repetitions >= N + 2 * guard_periods.
  void validate(const CodeMatrix& codes) const;
};

/// max(repetitions * period, (repetitions - 1) * period + unit_length)
std::size_t sequence_length(std::size_t unit_length, std::size_t period, std::size_t repetitions);

/// Places `unit` at r * period for r in [0, repetitions) with polarity codes.row(code_row)[r mod N].
/// Overlapping tails add linearly.
SampledSignal assemble_sequence(const SampledSignal& unit, const SequencePlan& plan, const CodeMatrix& codes);

/// Same, with the unit built from plan.fvn via placement_unit().
SampledSignal assemble_sequence(const SequencePlan& plan, const CodeMatrix& codes);

/// Samplewise sum, zero-padding shorter signals. All inputs must share fs.
SampledSignal multiplex(std::span<const SampledSignal> signals);

}  // namespace fvnlab
