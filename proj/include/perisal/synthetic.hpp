#pragma once

#include <cstdint>
#include <filesystem>
#include <random>

#include "perisal/audio_features.hpp"
#include "perisal/image.hpp"
#include "perisal/manifest.hpp"

namespace perisal::synthetic {

struct CorpusOptions {
    std::size_t train_per_class = 10;
    std::size_t test_per_class = 10;
    double duration_s = 6.0;
    double fps = 5.0;
    int sample_rate = 44100;
    int width = 320;
    int height = 240;
    std::uint64_t seed = 7;
};

// Class A: periodic tone bursts over a faint noise floor.
audio::AudioSignal periodic_bursts(std::mt19937_64& rng, double duration_s, int sample_rate);
// Class B: stationary white noise.
audio::AudioSignal stationary_noise(std::mt19937_64& rng, double duration_s, int sample_rate);

// Class A: textured skin-coloured blob on a cool background.
RgbImage blob_frame(std::mt19937_64& rng, int width, int height, double cx, double cy);
// Class B: uniform or smooth-textured frame with no skin tones.
RgbImage plain_frame(std::mt19937_64& rng, int width, int height);

struct Corpus {
    pipeline::DatasetManifest train;
    pipeline::DatasetManifest test;
};

/// Writes `train.csv`, `test.csv` and `videos/<id>/{audio.wav,frames/}` under
/// `dir`. Manifest paths are relative to `dir`; the returned manifests hold
/// absolute paths.
Corpus generate_corpus(const std::filesystem::path& dir, const CorpusOptions& opts = {});

}  // namespace perisal::synthetic
