#pragma once

#include <filesystem>

#include "tightfb/signal.hpp"

namespace tightfb {

enum class WavEncoding { kPcm16, kFloat32 };

// Mono RIFF/WAVE, 16-bit PCM or 32-bit IEEE float. PCM maps to [-1, 1) by
// division by 32768.
Signal wav_read(const std::filesystem::path& path);
void wav_write(const std::filesystem::path& path, const Signal& signal,
               WavEncoding encoding = WavEncoding::kFloat32);

}  // namespace tightfb
