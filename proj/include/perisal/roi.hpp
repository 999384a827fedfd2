#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "perisal/image.hpp"

namespace perisal::roi {

struct SkinModelConfig {
    double cb_min = 77.0;
    double cb_max = 127.0;
    double cr_min = 133.0;
    double cr_max = 173.0;

    void validate() const;
};

struct YCbCr {
    double y = 0.0;
    double cb = 0.0;
    double cr = 0.0;
};

/// ITU-R BT.601 full-range conversion.
YCbCr to_ycbcr(Rgb p) noexcept;

bool is_skin_chroma(double cb, double cr, const SkinModelConfig& cfg) noexcept;

/// Per-pixel chrominance box test without any filtering.
BinaryMask raw_skin_mask(const RgbImage& image, const SkinModelConfig& cfg);

/// 3x3 majority vote: a pixel is kept when more than half of its (in-bounds)
/// 3x3 neighbourhood is set.
BinaryMask majority_filter(const BinaryMask& mask);

BinaryMask skin_mask(const RgbImage& image, const SkinModelConfig& cfg);

/// Summed-area table with a zero guard row and column.
class IntegralImage {
public:
    explicit IntegralImage(const GrayMap& map);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }

    /// Sum over map[x0 .. x0+w) x [y0 .. y0+h), clipped to the image.
    double rect_sum(int x0, int y0, int w, int h) const noexcept;

    /// Sum over the inclusive rectangle [0, x] x [0, y].
    double prefix(int x, int y) const noexcept { return at(x + 1, y + 1); }

private:
    double at(int x, int y) const noexcept {
        return table_[static_cast<std::size_t>(y) * static_cast<std::size_t>(width_ + 1) + static_cast<std::size_t>(x)];
    }

    int width_;
    int height_;
    std::vector<double> table_;
};

struct HaarRect {
    int x = 0, y = 0, w = 0, h = 0;
    double weight = 0.0;
};

struct HaarFeature {
    std::vector<HaarRect> rects;
    double threshold = 0.0;
    double left_val = 0.0;   // vote when value < threshold
    double right_val = 0.0;  // vote otherwise
};

struct CascadeStage {
    std::vector<HaarFeature> features;
    double threshold = 0.0;
};

struct CascadeModel {
    int window_w = 0;
    int window_h = 0;
    std::vector<CascadeStage> stages;

    void validate() const;

    /// Runs every stage on the window at (x, y) of the integral image.
    bool accepts(const IntegralImage& ii, int x, int y) const;
};

CascadeModel parse_cascade(std::istream& in);
CascadeModel load_cascade(const std::filesystem::path& path);

struct FaceDetectorOptions {
    double scale_step = 1.25;
    int stride = 2;
    int max_levels = 0;  // 0 = as many as fit
};

/// Union of accepted windows over an image pyramid of the intensity
/// channel. Without a cascade the mask is empty.
BinaryMask face_mask(const RgbImage& image, const CascadeModel* cascade, const FaceDetectorOptions& opts = {});

/// salient AND skin AND NOT face. Throws InvalidInput on shape mismatch.
BinaryMask hybrid_roi(const BinaryMask& salient, const BinaryMask& skin, const BinaryMask& face);

}  // namespace perisal::roi
