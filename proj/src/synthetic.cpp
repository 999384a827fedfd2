#include "perisal/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "perisal/error.hpp"
#include "perisal/wav.hpp"

namespace perisal::synthetic {

namespace fs = std::filesystem;

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double gaussian(std::mt19937_64& rng) {
    const double u1 = std::max(uniform(rng, 0.0, 1.0), 1e-300);
    const double u2 = uniform(rng, 0.0, 1.0);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint8_t clamp_byte(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

// Cool colour: red never exceeds green or blue, which keeps Cr at or below 128.
Rgb cool(double r, double g, double b) {
    const double m = std::min(g, b);
    return {clamp_byte(std::min(r, m)), clamp_byte(g), clamp_byte(b)};
}

}  // namespace

audio::AudioSignal periodic_bursts(std::mt19937_64& rng, double duration_s, int sample_rate) {
    const auto n = static_cast<std::size_t>(duration_s * sample_rate);
    const double period = uniform(rng, 0.4, 0.6);
    const double burst = period * uniform(rng, 0.35, 0.5);
    const double freq = uniform(rng, 300.0, 900.0);
    const double offset = uniform(rng, 0.0, period);
    const double attack = 0.01;
    audio::AudioSignal s{std::vector<double>(n), sample_rate};
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / sample_rate;
        const double phase = std::fmod(t + offset, period);
        double env = 0.0;
        if (phase < burst) {
            env = phase < attack ? phase / attack : 1.0;
            env *= 1.0 - 0.6 * (phase / burst);
        }
        s.samples[i] = 0.5 * env * std::sin(2.0 * std::numbers::pi * freq * t) + 0.005 * gaussian(rng);
    }
    return s;
}

audio::AudioSignal stationary_noise(std::mt19937_64& rng, double duration_s, int sample_rate) {
    const auto n = static_cast<std::size_t>(duration_s * sample_rate);
    const double level = uniform(rng, 0.05, 0.2);
    audio::AudioSignal s{std::vector<double>(n), sample_rate};
    for (double& v : s.samples) v = level * gaussian(rng);
    return s;
}

RgbImage blob_frame(std::mt19937_64& rng, int width, int height, double cx, double cy) {
    RgbImage img(width, height);
    const double bg_g = uniform(rng, 90, 140), bg_b = uniform(rng, 140, 200);
    const double rx = width * uniform(rng, 0.14, 0.2), ry = height * uniform(rng, 0.2, 0.28);
    const double spot_f = uniform(rng, 0.25, 0.4);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            const double n = 6.0 * gaussian(rng);
            img.set(x, y, cool(bg_g * 0.4 + n, bg_g + n, bg_b + n));
        }
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            const double dx = (x - cx) / rx, dy = (y - cy) / ry;
            const double r2 = dx * dx + dy * dy;
            if (r2 > 1.0) continue;
            const double shade = 1.0 - 0.15 * r2;
            const double spots = 0.5 + 0.5 * std::sin(x * spot_f) * std::sin(y * spot_f);
            const double k = shade * (0.8 + 0.2 * spots) + 0.02 * gaussian(rng);
            img.set(x, y, {clamp_byte(224 * k), clamp_byte(172 * k), clamp_byte(140 * k)});
        }
    return img;
}

RgbImage plain_frame(std::mt19937_64& rng, int width, int height) {
    RgbImage img(width, height);
    const double g = uniform(rng, 60, 200), b = uniform(rng, 60, 200), r = uniform(rng, 0.2, 1.0) * std::min(g, b);
    const bool textured = (rng() & 1U) != 0;
    const double f = uniform(rng, 0.02, 0.08), amp = textured ? uniform(rng, 10, 30) : 0.0;
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            const double t = amp * std::sin(x * f) * std::cos(y * f * 0.7) + 2.0 * gaussian(rng);
            img.set(x, y, cool(r + t, g + t, b + t));
        }
    return img;
}

namespace {

pipeline::ManifestEntry write_video(const fs::path& root, const std::string& id, bool positive,
                                    const CorpusOptions& opts, std::mt19937_64& rng) {
    const fs::path rel = fs::path("videos") / id;
    const fs::path frames = root / rel / "frames";
    fs::create_directories(frames);
    audio::write_wav(root / rel / "audio.wav", positive ? periodic_bursts(rng, opts.duration_s, opts.sample_rate)
                                                        : stationary_noise(rng, opts.duration_s, opts.sample_rate));
    const auto count = static_cast<std::size_t>(std::lround(opts.duration_s * opts.fps));
    double cx = opts.width * uniform(rng, 0.35, 0.65), cy = opts.height * uniform(rng, 0.35, 0.65);
    const RgbImage plain = plain_frame(rng, opts.width, opts.height);
    for (std::size_t f = 0; f < count; ++f) {
        char name[32];
        std::snprintf(name, sizeof name, "%06zu.png", f);
        if (positive) {
            cx = std::clamp(cx + uniform(rng, -4, 4), opts.width * 0.3, opts.width * 0.7);
            cy = std::clamp(cy + uniform(rng, -3, 3), opts.height * 0.3, opts.height * 0.7);
            write_png(frames / name, blob_frame(rng, opts.width, opts.height, cx, cy));
        } else {
            write_png(frames / name, plain);
        }
    }
    return {id, rel / "audio.wav", rel / "frames", opts.fps,
            positive ? pipeline::Label::positive : pipeline::Label::negative};
}

pipeline::DatasetManifest write_split(const fs::path& root, const std::string& split, std::size_t per_class,
                                      const CorpusOptions& opts, std::mt19937_64& rng) {
    pipeline::DatasetManifest rel, abs;
    for (std::size_t i = 0; i < 2 * per_class; ++i) {
        const bool positive = i % 2 == 0;
        char id[64];
        std::snprintf(id, sizeof id, "%s_%c%03zu", split.c_str(), positive ? 'a' : 'b', i / 2);
        auto e = write_video(root, id, positive, opts, rng);
        rel.entries.push_back(e);
        e.audio_path = root / e.audio_path;
        e.frames_dir = root / e.frames_dir;
        abs.entries.push_back(e);
    }
    std::ofstream out(root / (split + ".csv"));
    if (!out) throw Error("cannot write " + (root / (split + ".csv")).string());
    pipeline::write_manifest(out, rel);
    return abs;
}

}  // namespace

Corpus generate_corpus(const fs::path& dir, const CorpusOptions& opts) {
    if (opts.duration_s <= 0 || opts.fps <= 0 || opts.sample_rate <= 0 || opts.width < 16 || opts.height < 16)
        throw ConfigError("invalid synthetic corpus options");
    fs::create_directories(dir);
    const fs::path root = fs::absolute(dir);
    std::mt19937_64 rng(opts.seed);
    Corpus c;
    c.train = write_split(root, "train", opts.train_per_class, opts, rng);
    c.test = write_split(root, "test", opts.test_per_class, opts, rng);
    return c;
}

}  // namespace perisal::synthetic
