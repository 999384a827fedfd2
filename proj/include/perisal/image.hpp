#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace perisal {

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    bool operator==(const Rgb&) const = default;
};

/// Interleaved 8-bit RGB image, row-major.
class RgbImage {
public:
    RgbImage() = default;
    RgbImage(int width, int height, Rgb fill = {});

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    bool empty() const noexcept { return width_ == 0 || height_ == 0; }
    std::size_t pixel_count() const noexcept {
        return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
    }

    Rgb at(int x, int y) const noexcept {
        const std::size_t i = index(x, y);
        return {data_[i], data_[i + 1], data_[i + 2]};
    }
    void set(int x, int y, Rgb c) noexcept {
        const std::size_t i = index(x, y);
        data_[i] = c.r;
        data_[i + 1] = c.g;
        data_[i + 2] = c.b;
    }

    const std::vector<std::uint8_t>& bytes() const noexcept { return data_; }
    std::vector<std::uint8_t>& bytes() noexcept { return data_; }

    bool operator==(const RgbImage&) const = default;

private:
    std::size_t index(int x, int y) const noexcept {
        return 3 * (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
                    static_cast<std::size_t>(x));
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> data_;
};

/// Single-channel real-valued map, row-major.
class GrayMap {
public:
    GrayMap() = default;
    GrayMap(int width, int height, double fill = 0.0);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    bool empty() const noexcept { return width_ == 0 || height_ == 0; }
    std::size_t size() const noexcept { return values_.size(); }

    double at(int x, int y) const noexcept { return values_[offset(x, y)]; }
    double& at(int x, int y) noexcept { return values_[offset(x, y)]; }

    const std::vector<double>& values() const noexcept { return values_; }
    std::vector<double>& values() noexcept { return values_; }

    double max_value() const noexcept;
    double min_value() const noexcept;

private:
    std::size_t offset(int x, int y) const noexcept {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(x);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<double> values_;
};

/// One boolean per pixel.
class BinaryMask {
public:
    BinaryMask() = default;
    BinaryMask(int width, int height, bool fill = false);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }

    bool at(int x, int y) const noexcept { return bits_[offset(x, y)] != 0; }
    void set(int x, int y, bool v) noexcept { bits_[offset(x, y)] = v ? 1 : 0; }

    std::size_t count() const noexcept;
    bool none() const noexcept { return count() == 0; }
    bool same_shape(const BinaryMask& o) const noexcept {
        return width_ == o.width_ && height_ == o.height_;
    }

    const std::vector<std::uint8_t>& bits() const noexcept { return bits_; }

    bool operator==(const BinaryMask&) const = default;

private:
    std::size_t offset(int x, int y) const noexcept {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(x);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> bits_;
};

// Bilinear resampling with pixel-center alignment and edge clamping.
GrayMap resize_bilinear(const GrayMap& src, int width, int height);
RgbImage resize_bilinear(const RgbImage& src, int width, int height);

/// Binary PPM (P6) and PNG, chosen by extension.
RgbImage read_image(const std::filesystem::path& path);
RgbImage read_ppm(const std::filesystem::path& path);
RgbImage read_png(const std::filesystem::path& path);
void write_ppm(const std::filesystem::path& path, const RgbImage& image);
void write_png(const std::filesystem::path& path, const RgbImage& image);

/// 8-bit grayscale PGM (P5); values are clamped to [0,255] and rounded.
void write_pgm(const std::filesystem::path& path, const GrayMap& map);

}  // namespace perisal
