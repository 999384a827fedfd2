#include "perisal/envelope.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "perisal/error.hpp"

namespace perisal::envelope {

DetectionSeries detection_function(std::span<const double> energies, std::size_t lookahead) {
    if (lookahead < 1) throw InvalidInput("detection lookahead must be >= 1");
    if (energies.size() <= lookahead) throw InvalidInput("energy sequence shorter than lookahead + 1");
    DetectionSeries d;
    d.lookahead = lookahead;
    d.values.resize(energies.size() - lookahead);
    for (std::size_t i = 0; i < d.values.size(); ++i) {
        if (energies[i] < 0.0) throw InvalidInput("negative frame energy");
        const double base = std::max(energies[i], kEnergyFloor);
        double best = energies[i + 1] / base;
        for (std::size_t j = 2; j <= lookahead; ++j) best = std::max(best, energies[i + j] / base);
        d.values[i] = best;
    }
    return d;
}

SoftThresholdSeries soft_threshold(const DetectionSeries& d, double t1, double t2) {
    if (!(t1 < t2)) throw ConfigError("soft threshold requires t1 < t2");
    SoftThresholdSeries p;
    p.t1 = t1;
    p.t2 = t2;
    p.values.reserve(d.values.size());
    // Centered form so the midpoint maps to exactly 0.5.
    const double mid = (t1 + t2) / 2.0;
    for (double v : d.values) {
        if (v >= t2)
            p.values.push_back(1.0);
        else if (v > t1)
            p.values.push_back(0.5 + (v - mid) / (t2 - t1));
        else
            p.values.push_back(0.0);
    }
    return p;
}

std::vector<EnergyEnvelope> segment_envelopes(const SoftThresholdSeries& p, std::size_t frame_count,
                                              double cutoff, std::size_t min_len) {
    if (!(cutoff > 0.0 && cutoff <= 1.0)) throw ConfigError("segmentation cutoff must lie in (0, 1]");
    if (min_len < 1) throw ConfigError("min_len must be >= 1");
    std::vector<EnergyEnvelope> out;
    if (frame_count == 0) return out;

    const auto& v = p.values;
    const std::size_t n = std::min(v.size(), frame_count);
    std::size_t start = 0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t run_end = i;  // last index of the run of values equal to v[i]
        while (run_end + 1 < n && v[run_end + 1] == v[i]) ++run_end;
        const bool left_lower = i > 0 && v[i - 1] < v[i];
        const bool right_lower = run_end + 1 >= n || v[run_end + 1] < v[i];
        if (left_lower && right_lower && v[i] >= cutoff && run_end - start >= min_len) {
            out.push_back({start, run_end, 0});
            start = run_end;
        }
        i = run_end + 1;
    }
    out.push_back({start, frame_count, 0});
    for (std::size_t k = 0; k < out.size(); ++k) out[k].id = k;
    return out;
}

PeriodEstimate estimate_period(std::span<const double> energies) {
    const std::size_t n = energies.size();
    if (n < 4) throw InvalidInput("period estimation needs at least four values");
    double mean = 0.0;
    for (double e : energies) mean += e;
    mean /= static_cast<double>(n);
    std::vector<double> x(n);
    double zero_lag = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = energies[i] - mean;
        zero_lag += x[i] * x[i];
    }
    // Relative test so that a constant series with rounding residue reads as flat.
    double scale = 0.0;
    for (double e : energies) scale = std::max(scale, std::abs(e));
    if (zero_lag <= 1e-24 * scale * scale * static_cast<double>(n) || zero_lag == 0.0) return {n / 2, 0.0};

    // r over lags 1 .. n/2 + 1 so every candidate has both neighbours.
    const std::size_t hi = n / 2;
    std::vector<double> r(hi + 2, 0.0);
    for (std::size_t lag = 1; lag < r.size() && lag < n; ++lag) {
        double acc = 0.0;
        for (std::size_t i = 0; i + lag < n; ++i) acc += x[i] * x[i + lag];
        r[lag] = acc / zero_lag;
    }
    // Only local maxima count, so the decay from lag 0 is never taken for a period.
    PeriodEstimate best{hi, 0.0};
    bool found = false;
    for (std::size_t lag = 2; lag <= hi; ++lag) {
        if (!(r[lag] > r[lag - 1] && r[lag] >= r[lag + 1])) continue;
        if (!found || r[lag] > best.confidence) {
            best = {lag, r[lag]};
            found = true;
        }
    }
    best.confidence = std::clamp(best.confidence, 0.0, 1.0);
    return best;
}

std::vector<EnergyEnvelope> split_long_envelope(const EnergyEnvelope& ee, const PeriodEstimate& period,
                                                std::size_t l_max, double min_confidence) {
    if (l_max < 2) throw ConfigError("l_max must be >= 2");
    if (ee.length() < l_max) return {ee};
    std::size_t chunk = period.period_frames;
    if (period.confidence < min_confidence || chunk < 1 || chunk >= l_max) chunk = l_max;
    std::vector<EnergyEnvelope> out;
    for (std::size_t s = ee.start_frame; s < ee.end_frame; s += chunk)
        out.push_back({s, std::min(s + chunk, ee.end_frame), ee.id});
    return out;
}

std::vector<EnergyEnvelope> segment_signal(std::span<const double> energies, const SegmentationConfig& cfg) {
    const std::size_t m = energies.size();
    std::vector<EnergyEnvelope> coarse;
    if (m == 0) return coarse;
    if (m <= cfg.lookahead) {
        coarse.push_back({0, m, 0});
    } else {
        const auto d = detection_function(energies, cfg.lookahead);
        const auto p = soft_threshold(d, cfg.t1, cfg.t2);
        coarse = segment_envelopes(p, m, cfg.cutoff, cfg.min_len);
    }

    std::vector<EnergyEnvelope> out;
    for (const auto& ee : coarse) {
        PeriodEstimate period{cfg.l_max, 0.0};
        if (ee.length() >= cfg.l_max && ee.length() >= 4)
            period = estimate_period(energies.subspan(ee.start_frame, ee.length()));
        for (auto& piece : split_long_envelope(ee, period, cfg.l_max, cfg.min_period_confidence))
            out.push_back(piece);
    }
    for (std::size_t k = 0; k < out.size(); ++k) out[k].id = k;
    return out;
}

KeyframeAlignment align_keyframe(const EnergyEnvelope& ee, double frame_ms, double video_fps,
                                 std::size_t video_frame_count) {
    if (!(video_fps > 0.0)) throw InvalidInput("video fps must be positive");
    const double mid_seconds =
        static_cast<double>(ee.start_frame + ee.end_frame) * frame_ms / 2000.0;
    const double pos = mid_seconds * video_fps;
    const double nearest = std::max(0.0, std::ceil(pos - 0.5));
    KeyframeAlignment a{static_cast<std::size_t>(nearest), false};
    if (video_frame_count > 0 && a.frame_index >= video_frame_count) {
        a.frame_index = video_frame_count - 1;
        a.clamped = true;
    }
    return a;
}

void write_segment_csv(std::ostream& out, std::span<const EnergyEnvelope> envelopes,
                       std::span<const std::size_t> keyframes) {
    out << "ee_id,start_frame,end_frame,keyframe_index\n";
    for (std::size_t i = 0; i < envelopes.size(); ++i) {
        const auto& e = envelopes[i];
        out << e.id << ',' << e.start_frame << ',' << e.end_frame << ','
            << (i < keyframes.size() ? keyframes[i] : 0) << '\n';
    }
}

}  // namespace perisal::envelope
