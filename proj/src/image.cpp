#include "perisal/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "perisal/error.hpp"

namespace perisal {

RgbImage::RgbImage(int width, int height, Rgb fill)
    : width_(width), height_(height), data_(3 * static_cast<std::size_t>(std::max(width, 0)) *
                                            static_cast<std::size_t>(std::max(height, 0))) {
    if (width < 0 || height < 0) throw InvalidInput("negative image dimensions");
    for (std::size_t i = 0; i < data_.size(); i += 3) {
        data_[i] = fill.r;
        data_[i + 1] = fill.g;
        data_[i + 2] = fill.b;
    }
}

GrayMap::GrayMap(int width, int height, double fill)
    : width_(width),
      height_(height),
      values_(static_cast<std::size_t>(std::max(width, 0)) * static_cast<std::size_t>(std::max(height, 0)),
              fill) {
    if (width < 0 || height < 0) throw InvalidInput("negative map dimensions");
}

double GrayMap::max_value() const noexcept {
    return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end());
}

double GrayMap::min_value() const noexcept {
    return values_.empty() ? 0.0 : *std::min_element(values_.begin(), values_.end());
}

BinaryMask::BinaryMask(int width, int height, bool fill)
    : width_(width),
      height_(height),
      bits_(static_cast<std::size_t>(std::max(width, 0)) * static_cast<std::size_t>(std::max(height, 0)),
            fill ? 1 : 0) {
    if (width < 0 || height < 0) throw InvalidInput("negative mask dimensions");
}

std::size_t BinaryMask::count() const noexcept {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

namespace {

struct Tap {
    int i0;
    int i1;
    double w1;
};

std::vector<Tap> bilinear_taps(int src_len, int dst_len) {
    std::vector<Tap> taps(static_cast<std::size_t>(dst_len));
    const double ratio = static_cast<double>(src_len) / dst_len;
    for (int d = 0; d < dst_len; ++d) {
        double s = (d + 0.5) * ratio - 0.5;
        s = std::clamp(s, 0.0, static_cast<double>(src_len - 1));
        const int i0 = static_cast<int>(std::floor(s));
        const int i1 = std::min(i0 + 1, src_len - 1);
        taps[static_cast<std::size_t>(d)] = {i0, i1, s - i0};
    }
    return taps;
}

}  // namespace

GrayMap resize_bilinear(const GrayMap& src, int width, int height) {
    if (src.empty() || width <= 0 || height <= 0) throw InvalidInput("resize of empty map");
    if (src.width() == width && src.height() == height) return src;
    const auto tx = bilinear_taps(src.width(), width);
    const auto ty = bilinear_taps(src.height(), height);
    GrayMap out(width, height);
    for (int y = 0; y < height; ++y) {
        const Tap& v = ty[static_cast<std::size_t>(y)];
        for (int x = 0; x < width; ++x) {
            const Tap& h = tx[static_cast<std::size_t>(x)];
            const double top = src.at(h.i0, v.i0) * (1.0 - h.w1) + src.at(h.i1, v.i0) * h.w1;
            const double bot = src.at(h.i0, v.i1) * (1.0 - h.w1) + src.at(h.i1, v.i1) * h.w1;
            out.at(x, y) = top * (1.0 - v.w1) + bot * v.w1;
        }
    }
    return out;
}

RgbImage resize_bilinear(const RgbImage& src, int width, int height) {
    if (src.empty() || width <= 0 || height <= 0) throw InvalidInput("resize of empty image");
    if (src.width() == width && src.height() == height) return src;
    const auto tx = bilinear_taps(src.width(), width);
    const auto ty = bilinear_taps(src.height(), height);
    RgbImage out(width, height);
    auto lerp = [](double a, double b, double w) { return a * (1.0 - w) + b * w; };
    for (int y = 0; y < height; ++y) {
        const Tap& v = ty[static_cast<std::size_t>(y)];
        for (int x = 0; x < width; ++x) {
            const Tap& h = tx[static_cast<std::size_t>(x)];
            const Rgb a = src.at(h.i0, v.i0), b = src.at(h.i1, v.i0);
            const Rgb c = src.at(h.i0, v.i1), d = src.at(h.i1, v.i1);
            auto mix = [&](std::uint8_t Rgb::*ch) {
                const double top = lerp(a.*ch, b.*ch, h.w1);
                const double bot = lerp(c.*ch, d.*ch, h.w1);
                return static_cast<std::uint8_t>(std::clamp(std::lround(lerp(top, bot, v.w1)), 0L, 255L));
            };
            out.set(x, y, {mix(&Rgb::r), mix(&Rgb::g), mix(&Rgb::b)});
        }
    }
    return out;
}

namespace {

std::string lower_ext(const std::filesystem::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext;
}

// Reads the next whitespace-separated header token, skipping '#' comments.
std::string pnm_token(std::istream& in) {
    std::string tok;
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        } else if (std::isspace(c)) {
            if (!tok.empty()) break;
        } else {
            tok.push_back(static_cast<char>(c));
        }
        c = in.get();
    }
    return tok;
}

}  // namespace

RgbImage read_image(const std::filesystem::path& path) {
    const std::string ext = lower_ext(path);
    if (ext == ".ppm") return read_ppm(path);
    if (ext == ".png") return read_png(path);
    throw FormatError("unsupported image extension: " + path.string());
}

RgbImage read_ppm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open image: " + path.string());
    if (pnm_token(in) != "P6") throw FormatError("not a binary PPM (P6): " + path.string());
    int w = 0, h = 0, maxval = 0;
    try {
        w = std::stoi(pnm_token(in));
        h = std::stoi(pnm_token(in));
        maxval = std::stoi(pnm_token(in));
    } catch (const std::exception&) {
        throw FormatError("malformed PPM header: " + path.string());
    }
    if (w <= 0 || h <= 0 || maxval != 255) throw FormatError("unsupported PPM geometry or depth: " + path.string());
    RgbImage img(w, h);
    in.read(reinterpret_cast<char*>(img.bytes().data()), static_cast<std::streamsize>(img.bytes().size()));
    if (in.gcount() != static_cast<std::streamsize>(img.bytes().size()))
        throw FormatError("truncated PPM data: " + path.string());
    return img;
}

void write_ppm(const std::filesystem::path& path, const RgbImage& image) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write image: " + path.string());
    out << "P6\n" << image.width() << ' ' << image.height() << "\n255\n";
    out.write(reinterpret_cast<const char*>(image.bytes().data()),
              static_cast<std::streamsize>(image.bytes().size()));
}

RgbImage read_png(const std::filesystem::path& path) {
    png_image png;
    std::memset(&png, 0, sizeof(png));
    png.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&png, path.c_str()))
        throw FormatError("cannot read PNG " + path.string() + ": " + png.message);
    png.format = PNG_FORMAT_RGB;
    RgbImage img(static_cast<int>(png.width), static_cast<int>(png.height));
    if (!png_image_finish_read(&png, nullptr, img.bytes().data(), 0, nullptr)) {
        std::string msg = png.message;
        png_image_free(&png);
        throw FormatError("cannot decode PNG " + path.string() + ": " + msg);
    }
    return img;
}

void write_png(const std::filesystem::path& path, const RgbImage& image) {
    png_image png;
    std::memset(&png, 0, sizeof(png));
    png.version = PNG_IMAGE_VERSION;
    png.width = static_cast<png_uint_32>(image.width());
    png.height = static_cast<png_uint_32>(image.height());
    png.format = PNG_FORMAT_RGB;
    png.flags = PNG_IMAGE_FLAG_FAST;
    if (!png_image_write_to_file(&png, path.c_str(), 0, image.bytes().data(), 0, nullptr))
        throw FormatError("cannot write PNG " + path.string() + ": " + png.message);
}

void write_pgm(const std::filesystem::path& path, const GrayMap& map) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write map: " + path.string());
    out << "P5\n" << map.width() << ' ' << map.height() << "\n255\n";
    std::vector<std::uint8_t> row(static_cast<std::size_t>(map.width()));
    for (int y = 0; y < map.height(); ++y) {
        for (int x = 0; x < map.width(); ++x)
            row[static_cast<std::size_t>(x)] =
                static_cast<std::uint8_t>(std::clamp(std::lround(map.at(x, y)), 0L, 255L));
        out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
    }
}

}  // namespace perisal
