#pragma once

#include <span>
#include <string>
#include <vector>

#include "fvnlab/signal.hpp"

namespace fvnlab::wav {

/// Writes 32-bit IEEE float RIFF WAVE, one channel per signal (all must share fs and length).
void write(const std::string& path, std::span<const SampledSignal> channels);
void write(const std::string& path, const SampledSignal& signal);

/// Reads 32-bit float or 16/24/32-bit PCM RIFF WAVE. Returns one signal per channel.
std::vector<SampledSignal> read(const std::string& path);

/// First channel of read(path).
SampledSignal read_mono(const std::string& path);

}  // namespace fvnlab::wav
