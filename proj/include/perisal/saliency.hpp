#pragma once

#include <array>
#include <optional>
#include <vector>

#include "perisal/image.hpp"

namespace perisal::saliency {

inline constexpr int kTargetWidth = 640;
inline constexpr int kTargetHeight = 480;
inline constexpr int kPyramidLevels = 9;
inline constexpr int kCommonScale = 4;

/// Aspect-preserving bilinear resize so the image fits 640x480 exactly on
/// its binding side. Throws InvalidInput on an empty image.
RgbImage preprocess(const RgbImage& image);

/// (r + g + b) / 3 per pixel.
GrayMap intensity_image(const RgbImage& image);

struct BroadColorChannels {
    GrayMap r, g, b, y;
};

/// Broadly tuned R, G, B, Y with negatives clamped to zero.
BroadColorChannels broad_color_channels(const RgbImage& image);

struct GaussianPyramid {
    std::vector<GrayMap> levels;  // levels[0] is the source map
    bool reduced = false;         // fewer than kPyramidLevels levels were feasible

    bool has(int level) const noexcept { return level >= 0 && level < static_cast<int>(levels.size()); }
};

/// 5x5 binomial blur (reflect padding) followed by 2x decimation per level.
/// Level k exists while the larger source dimension is at least 2^k.
GaussianPyramid gaussian_pyramid(const GrayMap& map, int max_levels = kPyramidLevels);

/// |center - upsample(surround)| at the center's resolution.
GrayMap across_scale_difference(const GrayMap& center, const GrayMap& surround);

/// I(c, s), or nullopt when either level is missing.
std::optional<GrayMap> center_surround(const GaussianPyramid& pyr, int c, int s);

struct OpponencyMaps {
    GrayMap rg;
    GrayMap by;
};

struct ColorPyramids {
    GaussianPyramid r, g, b, y;
};

/// RG(c, s) = |(R(c) - G(c)) - up(G(s) - R(s))| and the analogous BY(c, s).
std::optional<OpponencyMaps> color_opponency_maps(const ColorPyramids& pyr, int c, int s);

/// The N(.) operator: rescale to [0, 1], average the 3x3 local maxima that
/// are below the global maximum, multiply by (1 - mean)^2.
GrayMap normalize_map(const GrayMap& map);

struct FeatureMaps {
    std::vector<GrayMap> intensity;  // I(c, s) for every available (c, s)
    std::vector<GrayMap> rg;
    std::vector<GrayMap> by;
    int common_width = 0;
    int common_height = 0;
    bool reduced = false;
};

/// All center-surround maps for c in {2,3,4}, s = c + {3,4}, in (c, s) order.
FeatureMaps compute_feature_maps(const RgbImage& image);

struct SaliencyResult {
    GrayMap saliency;               // values in [0, 255], at the common scale
    GrayMap intensity_conspicuity;  // I-bar
    GrayMap color_conspicuity;      // C-bar
    bool reduced = false;
};

/// Conspicuity maps summed at the common scale and fused into S. Throws
/// InvalidInput when no (c, s) pair was computable.
SaliencyResult conspicuity_and_saliency(const FeatureMaps& maps);

/// Convenience: feature maps and saliency of an (already preprocessed) image.
SaliencyResult compute_saliency(const RgbImage& image);

struct BlockContrastMap {
    int block_w = 8;
    int block_h = 8;
    GrayMap values;  // one value per block, in [0, 255]
};

/// Sum of Euclidean distances between a block's mean RGB and each of its
/// 8-connected neighbours, scaled so the largest value is 255.
BlockContrastMap block_contrast(const RgbImage& image, int block = 8);

/// Pixels where max(up(S), up(C)) reaches threshold_frac of its global
/// maximum, at the given resolution.
BinaryMask attention_mask(const GrayMap& saliency, const BlockContrastMap& contrast, int width, int height,
                          double threshold_frac);

}  // namespace perisal::saliency
