#include "fvnlab/sequencer.hpp"

#include <algorithm>

namespace fvnlab {

void SequencePlan::validate(const CodeMatrix& codes) const {
  require(code_row < codes.rows(), "sequence plan code row is outside the code matrix");
  require(period >= 1, "sequence period must be at least one sample");
  require(repetitions >= codes.length() + 2 * guard_periods,
          "sequence repetitions must cover one code length plus guard periods at each end");
}

std::size_t sequence_length(std::size_t unit_length, std::size_t period, std::size_t repetitions) {
  if (repetitions == 0) return unit_length;
  return std::max(repetitions * period, (repetitions - 1) * period + unit_length);
}

SampledSignal assemble_sequence(const SampledSignal& unit, const SequencePlan& plan, const CodeMatrix& codes) {
  plan.validate(codes);
  const auto row = codes.row(plan.code_row);
  const auto x = unit.samples();
  std::vector<double> out(sequence_length(x.size(), plan.period, plan.repetitions), 0.0);
  for (std::size_t r = 0; r < plan.repetitions; ++r) {
    const double polarity = row[r % row.size()];
    double* dst = out.data() + r * plan.period;
    for (std::size_t n = 0; n < x.size(); ++n) dst[n] += polarity * x[n];
  }
  return SampledSignal(std::move(out), unit.fs());
}

SampledSignal assemble_sequence(const SequencePlan& plan, const CodeMatrix& codes) {
  return assemble_sequence(placement_unit(plan.fvn), plan, codes);
}

SampledSignal multiplex(std::span<const SampledSignal> signals) {
  require(!signals.empty(), "multiplex needs at least one signal");
  const double fs = signals.front().fs();
  std::size_t length = 0;
  for (const auto& s : signals) {
    require(s.fs() == fs, "multiplex: sampling rates differ");
    length = std::max(length, s.size());
  }
  std::vector<double> out(length, 0.0);
  for (const auto& s : signals)
    for (std::size_t n = 0; n < s.size(); ++n) out[n] += s[n];
  return SampledSignal(std::move(out), fs);
}

}  // namespace fvnlab
