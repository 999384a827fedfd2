#include "perisal/wav.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "perisal/error.hpp"

namespace perisal::audio {

namespace {

std::uint32_t le32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
std::uint16_t le16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put32(std::ostream& out, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                                static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}
void put16(std::ostream& out, std::uint16_t v) {
    const unsigned char b[2] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8)};
    out.write(reinterpret_cast<const char*>(b), 2);
}

}  // namespace

AudioSignal read_wav(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open WAV file: " + path.string());
    std::array<unsigned char, 12> riff{};
    if (!in.read(reinterpret_cast<char*>(riff.data()), riff.size()) ||
        std::memcmp(riff.data(), "RIFF", 4) != 0 || std::memcmp(riff.data() + 8, "WAVE", 4) != 0)
        throw FormatError("not a RIFF/WAVE file: " + path.string());

    bool have_fmt = false;
    int sample_rate = 0;
    AudioSignal signal;
    for (;;) {
        std::array<unsigned char, 8> hdr{};
        if (!in.read(reinterpret_cast<char*>(hdr.data()), hdr.size())) break;
        const std::uint32_t size = le32(hdr.data() + 4);
        if (std::memcmp(hdr.data(), "fmt ", 4) == 0) {
            if (size < 16) throw FormatError("short fmt chunk: " + path.string());
            std::vector<unsigned char> fmt(size);
            if (!in.read(reinterpret_cast<char*>(fmt.data()), size)) throw FormatError("truncated fmt chunk");
            const std::uint16_t format = le16(fmt.data());
            const std::uint16_t channels = le16(fmt.data() + 2);
            sample_rate = static_cast<int>(le32(fmt.data() + 4));
            const std::uint16_t bits = le16(fmt.data() + 14);
            if (format != 1) throw FormatError("unsupported WAV format code " + std::to_string(format) + ": " + path.string());
            if (channels != 1) throw FormatError("unsupported channel count " + std::to_string(channels) + ": " + path.string());
            if (bits != 16) throw FormatError("unsupported bit depth " + std::to_string(bits) + ": " + path.string());
            if (sample_rate <= 0) throw FormatError("invalid sample rate: " + path.string());
            have_fmt = true;
            if (size & 1u) in.seekg(1, std::ios::cur);
        } else if (std::memcmp(hdr.data(), "data", 4) == 0) {
            if (!have_fmt) throw FormatError("data chunk before fmt chunk: " + path.string());
            std::vector<unsigned char> raw(size);
            in.read(reinterpret_cast<char*>(raw.data()), size);
            if (static_cast<std::uint32_t>(in.gcount()) != size) throw FormatError("truncated data chunk: " + path.string());
            signal.samples.resize(size / 2);
            for (std::size_t i = 0; i < signal.samples.size(); ++i)
                signal.samples[i] = static_cast<std::int16_t>(le16(raw.data() + 2 * i)) / 32768.0;
            signal.sample_rate = sample_rate;
            return signal;
        } else {
            in.seekg(size + (size & 1u), std::ios::cur);
        }
    }
    throw FormatError("missing fmt or data chunk: " + path.string());
}

void write_wav(const std::filesystem::path& path, const AudioSignal& signal) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write WAV file: " + path.string());
    const auto data_bytes = static_cast<std::uint32_t>(signal.samples.size() * 2);
    out.write("RIFF", 4);
    put32(out, 36 + data_bytes);
    out.write("WAVE", 4);
    out.write("fmt ", 4);
    put32(out, 16);
    put16(out, 1);
    put16(out, 1);
    put32(out, static_cast<std::uint32_t>(signal.sample_rate));
    put32(out, static_cast<std::uint32_t>(signal.sample_rate) * 2);
    put16(out, 2);
    put16(out, 16);
    out.write("data", 4);
    put32(out, data_bytes);
    for (double s : signal.samples) {
        const long q = std::lround(std::clamp(s, -1.0, 1.0) * 32767.0);
        put16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
    }
}

}  // namespace perisal::audio
