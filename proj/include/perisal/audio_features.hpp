#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace perisal::audio {

inline constexpr std::size_t kMfccCount = 13;
inline constexpr std::size_t kMelFilterCount = 26;
inline constexpr std::size_t kSubbandCount = 4;
inline constexpr std::size_t kFeatureDim = 36;
inline constexpr double kDefaultFrameMs = 20.0;
inline constexpr double kLogFloor = 1e-10;

struct AudioSignal {
    std::vector<double> samples;  // normalized to [-1, 1]
    int sample_rate = 44100;
};

struct AudioFrame {
    std::size_t index = 0;
    std::vector<double> samples;
};

using FeatureVector = std::array<double, kFeatureDim>;

struct AudioFrameFeatures {
    std::array<double, kMfccCount> mfcc{};
    std::array<double, kMfccCount> delta_mfcc{};
    double zcr = 0.0;
    double ste = 0.0;
    std::array<double, kSubbandCount> subband_ste{};
    std::array<double, kSubbandCount> subband_ratio{};

    /// [mfcc | delta_mfcc | zcr | ste | subband_ste | subband_ratio]
    FeatureVector to_vector() const;
};

struct SubbandFeatures {
    std::array<double, kSubbandCount> energy{};
    std::array<double, kSubbandCount> ratio{};
};

/// Samples per frame: round(sample_rate * frame_ms / 1000). Throws
/// ConfigError when the rate is invalid or the frame would be shorter
/// than two samples.
std::size_t frame_length(int sample_rate, double frame_ms = kDefaultFrameMs);

/// Non-overlapping frames; a trailing partial frame is dropped.
std::vector<AudioFrame> frame_signal(const AudioSignal& signal, double frame_ms = kDefaultFrameMs);

/// Mean of squared samples.
double short_time_energy(std::span<const double> frame);

/// Sign changes between adjacent samples over (length - 1). Zeros carry the
/// previous sign; leading zeros carry none.
double zero_crossing_rate(std::span<const double> frame);

/// Triangular mel filterbank over the magnitude spectrum of a
/// Hann-windowed frame, before the log.
std::array<double, kMelFilterCount> mel_filter_energies(std::span<const double> frame, int sample_rate);

/// Center frequency (Hz) of every mel filter for the given rate.
std::array<double, kMelFilterCount> mel_filter_centers(int sample_rate);

/// Row k of the orthonormal DCT-II basis of size kMelFilterCount.
std::array<double, kMelFilterCount> dct_basis_row(std::size_t k);

std::array<double, kMfccCount> mfcc(std::span<const double> frame, int sample_rate);

/// Regression delta over a +/-2 window; indices clamp to the sequence edges.
std::array<double, kMfccCount> delta_mfcc(std::span<const std::array<double, kMfccCount>> sequence,
                                          std::size_t frame_index);

/// Power spectrum split into four equal-width bands of [0, Nyquist): per-band
/// mean power, and each band's share of the summed band energies.
SubbandFeatures subband_features(std::span<const double> frame, int sample_rate);

std::vector<AudioFrameFeatures> extract_frame_features(const AudioSignal& signal,
                                                       double frame_ms = kDefaultFrameMs);

}  // namespace perisal::audio
