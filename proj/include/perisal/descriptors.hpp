#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "perisal/image.hpp"
#include "perisal/roi.hpp"

namespace perisal::descriptors {

inline constexpr std::size_t kDescriptorDim = 64;
inline constexpr std::size_t kColorMomentDim = 9;

struct InterestPoint {
    int x = 0;
    int y = 0;
    double scale = 0.0;
    double response = 0.0;
};

struct LocalDescriptor {
    int x = 0;
    int y = 0;
    double scale = 0.0;
    std::array<double, kDescriptorDim> vector{};
};

using GlobalColorMoments = std::array<double, kColorMomentDim>;

struct DetectorOptions {
    int octaves = 3;
    double hessian_threshold = 0.0004;
};

/// Responses of one box-filter size sampled every `step` pixels.
struct ResponseLayer {
    int filter_size = 9;
    int step = 1;
    int width = 0;   // grid columns
    int height = 0;  // grid rows
    std::vector<double> det;
    std::vector<std::uint8_t> valid;  // filter fits inside the image

    double at(int gx, int gy) const noexcept {
        return det[static_cast<std::size_t>(gy) * static_cast<std::size_t>(width) + static_cast<std::size_t>(gx)];
    }
};

/// Filter sizes of one octave: 9, 15, 21, 27 for octave 0; each later
/// octave doubles the size increment.
std::array<int, 4> octave_filter_sizes(int octave);

/// Approximated Hessian determinant at pixel (x, y) for one box-filter size,
/// with second derivatives normalized by filter area and intensity by 255.
double hessian_response(const roi::IntegralImage& ii, int x, int y, int filter_size);

ResponseLayer response_layer(const roi::IntegralImage& ii, int filter_size, int step);

/// Determinant-of-Hessian extrema (3x3x3 suppression inside each octave)
/// above the threshold whose centre lies in the ROI, ordered by descending
/// response, then y, then x. Throws InvalidInput on a shape mismatch.
std::vector<InterestPoint> detect_interest_points(const GrayMap& intensity, const BinaryMask& roi,
                                                  const DetectorOptions& opts = {});

/// Upright descriptor: a 20s window of 4x4 subregions, each summing
/// (dx, dy, |dx|, |dy|) of Gaussian-weighted Haar responses over 5x5 samples,
/// then L2-normalized. Flat patches give the zero vector; windows leaving the
/// image give nullopt.
std::optional<LocalDescriptor> describe_point(const roi::IntegralImage& ii, const InterestPoint& point);

/// Detection plus description; points whose window leaves the image are
/// dropped. `max_descriptors` of 0 keeps everything.
std::vector<LocalDescriptor> extract_descriptors(const GrayMap& intensity, const BinaryMask& roi,
                                                 const DetectorOptions& opts, std::size_t max_descriptors = 0);

/// Per channel (r, g, b order): mean, population standard deviation and the
/// signed cube root of the third central moment.
GlobalColorMoments color_moments(const RgbImage& image);

/// CSV `x,y,scale,v0..v63`.
void write_descriptor_csv(std::ostream& out, std::span<const LocalDescriptor> descriptors);

}  // namespace perisal::descriptors
