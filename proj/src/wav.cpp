#include "tightfb/wav.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "tightfb/errors.hpp"

namespace tightfb {

namespace {

static_assert(std::endian::native == std::endian::little, "WAV I/O assumes a little-endian host");

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

template <typename T>
T read_le(const std::uint8_t* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return v;
}

template <typename T>
void write_le(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

}  // namespace

Signal wav_read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  const std::string name = path.string();
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw IoError(name + ": not a RIFF/WAVE file");
  }

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  const std::uint8_t* data = nullptr;
  std::size_t data_size = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* chunk = bytes.data() + pos;
    const std::uint32_t size = read_le<std::uint32_t>(chunk + 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size()) throw IoError(name + ": truncated chunk");
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) throw IoError(name + ": fmt chunk too short");
      format = read_le<std::uint16_t>(chunk + 8);
      channels = read_le<std::uint16_t>(chunk + 10);
      rate = read_le<std::uint32_t>(chunk + 12);
      bits = read_le<std::uint16_t>(chunk + 22);
      if (format == kFormatExtensible && size >= 26) {
        format = read_le<std::uint16_t>(chunk + 32);  // first two bytes of the sub-format GUID
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = chunk + 8;
      data_size = size;
    }
    pos = body + size + (size & 1u);
  }
  if (!have_fmt) throw IoError(name + ": missing fmt chunk");
  if (data == nullptr) throw IoError(name + ": missing data chunk");
  if (channels != 1) {
    throw IoError(name + ": unsupported channel count " + std::to_string(channels) +
                  " (mono only)");
  }

  RealVec samples;
  if (format == kFormatPcm && bits == 16) {
    samples.resize(data_size / 2);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      samples[i] = read_le<std::int16_t>(data + 2 * i) / 32768.0;
    }
  } else if (format == kFormatFloat && bits == 32) {
    samples.resize(data_size / 4);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      samples[i] = read_le<float>(data + 4 * i);
    }
  } else {
    throw IoError(name + ": unsupported encoding (format " + std::to_string(format) + ", " +
                  std::to_string(bits) + " bits); expected 16-bit PCM or 32-bit float");
  }
  if (samples.empty()) throw IoError(name + ": no samples");
  try {
    return Signal(std::move(samples), static_cast<int>(rate));
  } catch (const InvalidArgument& e) {
    throw IoError(name + ": " + e.what());
  }
}

void wav_write(const std::filesystem::path& path, const Signal& signal, WavEncoding encoding) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  const bool pcm = encoding == WavEncoding::kPcm16;
  const std::uint16_t bits = pcm ? 16 : 32;
  const std::uint16_t block_align = bits / 8;
  const auto data_size = static_cast<std::uint32_t>(signal.size() * block_align);
  const auto rate = static_cast<std::uint32_t>(signal.sample_rate());

  out.write("RIFF", 4);
  write_le<std::uint32_t>(out, 36 + data_size);
  out.write("WAVEfmt ", 8);
  write_le<std::uint32_t>(out, 16);
  write_le<std::uint16_t>(out, pcm ? kFormatPcm : kFormatFloat);
  write_le<std::uint16_t>(out, 1);
  write_le<std::uint32_t>(out, rate);
  write_le<std::uint32_t>(out, rate * block_align);
  write_le<std::uint16_t>(out, block_align);
  write_le<std::uint16_t>(out, bits);
  out.write("data", 4);
  write_le<std::uint32_t>(out, data_size);
  for (double s : signal.samples()) {
    if (pcm) {
      const double scaled = std::round(s * 32768.0);
      write_le<std::int16_t>(out, static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0)));
    } else {
      write_le<float>(out, static_cast<float>(s));
    }
  }
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace tightfb
