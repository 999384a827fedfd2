#pragma once

#include <filesystem>

#include "perisal/audio_features.hpp"

namespace perisal::audio {

/// Reads RIFF/WAVE with PCM format code 1, 16-bit, mono. Anything else
/// throws FormatError.
AudioSignal read_wav(const std::filesystem::path& path);

/// Writes 16-bit mono PCM; samples are clamped to [-1, 1].
void write_wav(const std::filesystem::path& path, const AudioSignal& signal);

}  // namespace perisal::audio
