#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace perisal::envelope {

inline constexpr double kEnergyFloor = 1e-12;

struct DetectionSeries {
    std::vector<double> values;  // d_i for i in [0, M - lookahead)
    std::size_t lookahead = 3;
};

struct SoftThresholdSeries {
    std::vector<double> values;  // P(i) in [0, 1]
    double t1 = 1.2;
    double t2 = 3.0;
};

struct EnergyEnvelope {
    std::size_t start_frame = 0;  // inclusive
    std::size_t end_frame = 0;    // exclusive
    std::size_t id = 0;

    std::size_t length() const noexcept { return end_frame - start_frame; }
    bool operator==(const EnergyEnvelope&) const = default;
};

struct PeriodEstimate {
    std::size_t period_frames = 2;
    double confidence = 0.0;
};

struct SegmentationConfig {
    std::size_t lookahead = 3;
    double t1 = 1.2;
    double t2 = 3.0;
    double cutoff = 0.5;
    std::size_t min_len = 5;
    std::size_t l_max = 150;
    double min_period_confidence = 0.2;
};

/// d_i = max over j in [1, J] of E[i+j] / E[i], with E[i] floored at
/// kEnergyFloor. Throws InvalidInput unless len(energies) > J >= 1.
DetectionSeries detection_function(std::span<const double> energies, std::size_t lookahead);

/// Piecewise-linear ramp from 0 at t1 to 1 at t2. Throws ConfigError if t1 >= t2.
SoftThresholdSeries soft_threshold(const DetectionSeries& d, double t1, double t2);

/// Boundaries sit at peaks of P that reach `cutoff` and lie at least
/// `min_len` frames after the previous boundary. A peak is a run of equal
/// values with strictly smaller neighbours on both sides (a missing right
/// neighbour counts as smaller); the boundary is placed at the run's last
/// index. Index 0 never opens a boundary. The result partitions
/// [0, frame_count).
std::vector<EnergyEnvelope> segment_envelopes(const SoftThresholdSeries& p, std::size_t frame_count,
                                              double cutoff, std::size_t min_len);

/// Among the local maxima of the mean-removed autocorrelation (normalized by
/// its zero-lag value) at lags [2, len/2], the highest. Constant input, or
/// no local maximum, yields {len/2, 0}. Throws InvalidInput for fewer than four values.
PeriodEstimate estimate_period(std::span<const double> energies);

/// Envelopes of at least l_max frames are cut into period-sized chunks (the
/// last keeps the remainder). When the period is unreliable
/// (confidence below `min_confidence`) or not shorter than l_max, the cut
/// uses l_max-sized chunks instead. Output ids mirror the input id.
std::vector<EnergyEnvelope> split_long_envelope(const EnergyEnvelope& ee, const PeriodEstimate& period,
                                                std::size_t l_max, double min_confidence = 0.2);

/// Detection, soft threshold, boundary picking and long-envelope splitting
/// over a whole signal's frame energies; ids are assigned 0, 1, ...
std::vector<EnergyEnvelope> segment_signal(std::span<const double> energies, const SegmentationConfig& cfg);

struct KeyframeAlignment {
    std::size_t frame_index = 0;
    bool clamped = false;  // midpoint fell past the last video frame
};

/// Video frame whose timestamp is nearest the EE's temporal midpoint (ties
/// go to the earlier frame). `video_frame_count` of 0 disables clamping.
KeyframeAlignment align_keyframe(const EnergyEnvelope& ee, double frame_ms, double video_fps,
                                 std::size_t video_frame_count = 0);

/// CSV `ee_id,start_frame,end_frame,keyframe_index`.
void write_segment_csv(std::ostream& out, std::span<const EnergyEnvelope> envelopes,
                       std::span<const std::size_t> keyframes);

}  // namespace perisal::envelope
