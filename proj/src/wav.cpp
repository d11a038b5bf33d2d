#include "fvnlab/wav.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

namespace fvnlab::wav {

static_assert(std::endian::native == std::endian::little, "WAV I/O assumes a little-endian host");

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

template <typename T>
void put(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(const std::vector<char>& buf, std::size_t at) {
  if (at + sizeof(T) > buf.size()) throw ProcessingError("truncated WAV file");
  T v;
  std::memcpy(&v, buf.data() + at, sizeof(T));
  return v;
}

}  // namespace

void write(const std::string& path, std::span<const SampledSignal> channels) {
  require(!channels.empty(), "WAV write needs at least one channel");
  const double fs = channels.front().fs();
  const std::size_t frames = channels.front().size();
  for (const auto& c : channels)
    require(c.fs() == fs && c.size() == frames, "WAV channels must share fs and length");
  require(fs == std::floor(fs) && fs < 4.0e9, "WAV sampling rate must be an integer");

  const auto nch = static_cast<std::uint16_t>(channels.size());
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(frames * nch * 4);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ProcessingError("cannot open for writing: " + path);
  out.write("RIFF", 4);
  put<std::uint32_t>(out, 4 + (8 + 18) + (8 + 4) + (8 + data_bytes));
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  put<std::uint32_t>(out, 18);
  put<std::uint16_t>(out, kFormatFloat);
  put<std::uint16_t>(out, nch);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(fs));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(fs) * nch * 4);
  put<std::uint16_t>(out, static_cast<std::uint16_t>(nch * 4));
  put<std::uint16_t>(out, 32);
  put<std::uint16_t>(out, 0);
  out.write("fact", 4);
  put<std::uint32_t>(out, 4);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(frames));
  out.write("data", 4);
  put<std::uint32_t>(out, data_bytes);
  std::vector<float> interleaved(frames * nch);
  for (std::size_t i = 0; i < frames; ++i)
    for (std::size_t c = 0; c < nch; ++c) interleaved[i * nch + c] = static_cast<float>(channels[c][i]);
  out.write(reinterpret_cast<const char*>(interleaved.data()), static_cast<std::streamsize>(data_bytes));
  if (!out) throw ProcessingError("failed writing: " + path);
}

void write(const std::string& path, const SampledSignal& signal) { write(path, std::span(&signal, 1)); }

std::vector<SampledSignal> read(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ProcessingError("cannot open WAV file: " + path);
  std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (buf.size() < 12 || std::memcmp(buf.data(), "RIFF", 4) != 0 || std::memcmp(buf.data() + 8, "WAVE", 4) != 0)
    throw ProcessingError("not a RIFF WAVE file: " + path);

  std::uint16_t format = 0, nch = 0, bits = 0;
  std::uint32_t rate = 0;
  std::size_t data_at = 0, data_len = 0;
  bool have_fmt = false;
  std::size_t pos = 12;
  while (pos + 8 <= buf.size()) {
    const std::string id(buf.data() + pos, 4);
    const auto len = get<std::uint32_t>(buf, pos + 4);
    const std::size_t body = pos + 8;
    if (id == "fmt ") {
      format = get<std::uint16_t>(buf, body);
      nch = get<std::uint16_t>(buf, body + 2);
      rate = get<std::uint32_t>(buf, body + 4);
      bits = get<std::uint16_t>(buf, body + 14);
      if (format == kFormatExtensible && len >= 26) format = get<std::uint16_t>(buf, body + 24);
      have_fmt = true;
    } else if (id == "data") {
      data_at = body;
      data_len = std::min<std::size_t>(len, buf.size() - body);
      break;
    }
    pos = body + len + (len & 1);
  }
  if (!have_fmt || data_at == 0) throw ProcessingError("WAV file lacks fmt or data chunk: " + path);
  if (nch == 0 || rate == 0) throw ProcessingError("WAV file has invalid format fields: " + path);
  const bool is_float = format == kFormatFloat && bits == 32;
  const bool is_pcm = format == kFormatPcm && (bits == 16 || bits == 24 || bits == 32);
  if (!is_float && !is_pcm) throw ProcessingError("unsupported WAV sample format: " + path);

  const std::size_t width = bits / 8;
  const std::size_t frames = data_len / (width * nch);
  if (frames == 0) throw ProcessingError("WAV file has no samples: " + path);
  std::vector<std::vector<double>> ch(nch, std::vector<double>(frames));
  for (std::size_t i = 0; i < frames; ++i) {
    for (std::size_t c = 0; c < nch; ++c) {
      const std::size_t at = data_at + (i * nch + c) * width;
      double v;
      if (is_float) {
        v = get<float>(buf, at);
      } else if (bits == 16) {
        v = get<std::int16_t>(buf, at) / 32768.0;
      } else if (bits == 24) {
        const auto b0 = static_cast<std::uint8_t>(buf[at]);
        const auto b1 = static_cast<std::uint8_t>(buf[at + 1]);
        const auto b2 = static_cast<std::uint8_t>(buf[at + 2]);
        std::int32_t s = b0 | (b1 << 8) | (b2 << 16);
        if (s & 0x800000) s -= 0x1000000;
        v = s / 8388608.0;
      } else {
        v = get<std::int32_t>(buf, at) / 2147483648.0;
      }
      ch[c][i] = v;
    }
  }
  std::vector<SampledSignal> out;
  out.reserve(nch);
  for (auto& c : ch) {
    try {
      out.emplace_back(std::move(c), static_cast<double>(rate));
    } catch (const ValidationError& e) {
      throw ProcessingError(std::string("WAV file contains invalid samples: ") + e.what());
    }
  }
  return out;
}

SampledSignal read_mono(const std::string& path) { return read(path).front(); }

}  // namespace fvnlab::wav
