#include "perisal/audio_features.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "perisal/error.hpp"

namespace perisal::audio {

namespace {

// FFTW planning is not thread-safe; execution on a plan owned by one thread is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

class RealDft {
public:
    explicit RealDft(std::size_t n) : n_(n) {
        std::lock_guard lock(planner_mutex());
        in_ = static_cast<double*>(fftw_malloc(sizeof(double) * n));
        out_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)));
        plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_, out_, FFTW_ESTIMATE);
    }
    ~RealDft() {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan_);
        fftw_free(out_);
        fftw_free(in_);
    }
    RealDft(const RealDft&) = delete;
    RealDft& operator=(const RealDft&) = delete;

    // Bins 0..n/2 of the DFT of `frame` multiplied by `window` (if non-empty).
    std::vector<std::complex<double>> transform(std::span<const double> frame, std::span<const double> window) {
        for (std::size_t i = 0; i < n_; ++i) in_[i] = window.empty() ? frame[i] : frame[i] * window[i];
        fftw_execute(plan_);
        std::vector<std::complex<double>> bins(n_ / 2 + 1);
        for (std::size_t k = 0; k < bins.size(); ++k) bins[k] = {out_[k][0], out_[k][1]};
        return bins;
    }

private:
    std::size_t n_;
    double* in_ = nullptr;
    fftw_complex* out_ = nullptr;
    fftw_plan plan_ = nullptr;
};

RealDft& dft_for(std::size_t n) {
    thread_local std::map<std::size_t, std::unique_ptr<RealDft>> cache;
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<RealDft>(n);
    return *slot;
}

const std::vector<double>& hann_window(std::size_t n) {
    thread_local std::map<std::size_t, std::vector<double>> cache;
    auto& w = cache[n];
    if (w.empty()) {
        w.resize(n);
        for (std::size_t i = 0; i < n; ++i)
            w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n - 1));
    }
    return w;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

// kMelFilterCount + 2 equally spaced mel points from 0 Hz to Nyquist.
std::array<double, kMelFilterCount + 2> mel_edges(int sample_rate) {
    std::array<double, kMelFilterCount + 2> edges{};
    const double top = hz_to_mel(sample_rate / 2.0);
    for (std::size_t i = 0; i < edges.size(); ++i)
        edges[i] = mel_to_hz(top * static_cast<double>(i) / static_cast<double>(kMelFilterCount + 1));
    return edges;
}

}  // namespace

FeatureVector AudioFrameFeatures::to_vector() const {
    FeatureVector v{};
    auto it = std::copy(mfcc.begin(), mfcc.end(), v.begin());
    it = std::copy(delta_mfcc.begin(), delta_mfcc.end(), it);
    *it++ = zcr;
    *it++ = ste;
    it = std::copy(subband_ste.begin(), subband_ste.end(), it);
    std::copy(subband_ratio.begin(), subband_ratio.end(), it);
    return v;
}

std::size_t frame_length(int sample_rate, double frame_ms) {
    if (sample_rate <= 0) throw ConfigError("sample rate must be positive");
    if (!(frame_ms > 0.0)) throw ConfigError("frame duration must be positive");
    const double len = std::round(sample_rate * frame_ms / 1000.0);
    if (len < 2.0) throw ConfigError("frame shorter than two samples");
    return static_cast<std::size_t>(len);
}

std::vector<AudioFrame> frame_signal(const AudioSignal& signal, double frame_ms) {
    const std::size_t len = frame_length(signal.sample_rate, frame_ms);
    const std::size_t count = signal.samples.size() / len;
    std::vector<AudioFrame> frames;
    frames.reserve(count);
    for (std::size_t f = 0; f < count; ++f) {
        const auto first = signal.samples.begin() + static_cast<std::ptrdiff_t>(f * len);
        frames.push_back({f, std::vector<double>(first, first + static_cast<std::ptrdiff_t>(len))});
    }
    return frames;
}

double short_time_energy(std::span<const double> frame) {
    if (frame.empty()) return 0.0;
    double acc = 0.0;
    for (double s : frame) acc += s * s;
    return acc / static_cast<double>(frame.size());
}

double zero_crossing_rate(std::span<const double> frame) {
    if (frame.size() < 2) return 0.0;
    int prev_sign = 0;
    std::size_t crossings = 0;
    for (double s : frame) {
        const int sign = s > 0.0 ? 1 : (s < 0.0 ? -1 : prev_sign);
        if (prev_sign != 0 && sign != prev_sign) ++crossings;
        prev_sign = sign;
    }
    return static_cast<double>(crossings) / static_cast<double>(frame.size() - 1);
}

std::array<double, kMelFilterCount> mel_filter_centers(int sample_rate) {
    const auto edges = mel_edges(sample_rate);
    std::array<double, kMelFilterCount> centers{};
    for (std::size_t m = 0; m < kMelFilterCount; ++m) centers[m] = edges[m + 1];
    return centers;
}

std::array<double, kMelFilterCount> mel_filter_energies(std::span<const double> frame, int sample_rate) {
    const std::size_t n = frame.size();
    const auto bins = dft_for(n).transform(frame, hann_window(n));
    const auto edges = mel_edges(sample_rate);
    const double bin_hz = static_cast<double>(sample_rate) / static_cast<double>(n);

    std::array<double, kMelFilterCount> energies{};
    for (std::size_t k = 0; k < bins.size(); ++k) {
        const double f = static_cast<double>(k) * bin_hz;
        const double mag = std::abs(bins[k]);
        for (std::size_t m = 0; m < kMelFilterCount; ++m) {
            const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
            if (f <= lo || f >= hi) continue;
            const double w = f <= mid ? (f - lo) / (mid - lo) : (hi - f) / (hi - mid);
            energies[m] += w * mag;
        }
    }
    return energies;
}

std::array<double, kMelFilterCount> dct_basis_row(std::size_t k) {
    constexpr double n = static_cast<double>(kMelFilterCount);
    const double scale = k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
    std::array<double, kMelFilterCount> row{};
    for (std::size_t i = 0; i < kMelFilterCount; ++i)
        row[i] = scale * std::cos(std::numbers::pi * static_cast<double>(k) * (static_cast<double>(i) + 0.5) / n);
    return row;
}

std::array<double, kMfccCount> mfcc(std::span<const double> frame, int sample_rate) {
    static const auto basis = [] {
        std::array<std::array<double, kMelFilterCount>, kMfccCount> b{};
        for (std::size_t k = 0; k < kMfccCount; ++k) b[k] = dct_basis_row(k);
        return b;
    }();
    auto energies = mel_filter_energies(frame, sample_rate);
    for (double& e : energies) e = std::log(std::max(e, kLogFloor));
    std::array<double, kMfccCount> c{};
    for (std::size_t k = 0; k < kMfccCount; ++k)
        for (std::size_t i = 0; i < kMelFilterCount; ++i) c[k] += basis[k][i] * energies[i];
    return c;
}

std::array<double, kMfccCount> delta_mfcc(std::span<const std::array<double, kMfccCount>> sequence,
                                          std::size_t frame_index) {
    std::array<double, kMfccCount> delta{};
    if (sequence.empty()) return delta;
    const auto last = static_cast<std::ptrdiff_t>(sequence.size()) - 1;
    auto at = [&](std::ptrdiff_t t) -> const std::array<double, kMfccCount>& {
        return sequence[static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(t, 0, last))];
    };
    const auto t = static_cast<std::ptrdiff_t>(frame_index);
    constexpr double denom = 2.0 * (1.0 + 4.0);
    for (std::ptrdiff_t n = 1; n <= 2; ++n) {
        const auto& ahead = at(t + n);
        const auto& behind = at(t - n);
        for (std::size_t k = 0; k < kMfccCount; ++k) delta[k] += static_cast<double>(n) * (ahead[k] - behind[k]);
    }
    for (double& d : delta) d /= denom;
    return delta;
}

SubbandFeatures subband_features(std::span<const double> frame, int sample_rate) {
    (void)sample_rate;  // bands are fractions of Nyquist, so only the bin index matters
    const std::size_t n = frame.size();
    const auto bins = dft_for(n).transform(frame, {});
    std::array<double, kSubbandCount> sum{};
    std::array<std::size_t, kSubbandCount> count{};
    // Bin k sits at k/n of the sample rate; band = floor(k / (n/2) * 4).
    for (std::size_t k = 0; 2 * k < n; ++k) {
        const std::size_t band = std::min<std::size_t>(kSubbandCount - 1, (2 * kSubbandCount * k) / n);
        sum[band] += std::norm(bins[k]) / static_cast<double>(n);
        ++count[band];
    }
    SubbandFeatures out;
    double total = 0.0;
    for (std::size_t b = 0; b < kSubbandCount; ++b) {
        out.energy[b] = count[b] ? sum[b] / static_cast<double>(count[b]) : 0.0;
        total += out.energy[b];
    }
    if (total > 0.0)
        for (std::size_t b = 0; b < kSubbandCount; ++b) out.ratio[b] = out.energy[b] / total;
    return out;
}

std::vector<AudioFrameFeatures> extract_frame_features(const AudioSignal& signal, double frame_ms) {
    const auto frames = frame_signal(signal, frame_ms);
    std::vector<AudioFrameFeatures> features(frames.size());
    std::vector<std::array<double, kMfccCount>> cepstra(frames.size());
    for (std::size_t i = 0; i < frames.size(); ++i) {
        const auto& s = frames[i].samples;
        cepstra[i] = mfcc(s, signal.sample_rate);
        auto& f = features[i];
        f.mfcc = cepstra[i];
        f.zcr = zero_crossing_rate(s);
        f.ste = short_time_energy(s);
        const auto sub = subband_features(s, signal.sample_rate);
        f.subband_ste = sub.energy;
        f.subband_ratio = sub.ratio;
    }
    for (std::size_t i = 0; i < frames.size(); ++i) features[i].delta_mfcc = delta_mfcc(cepstra, i);
    return features;
}

}  // namespace perisal::audio
