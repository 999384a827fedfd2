#include "perisal/descriptors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "perisal/error.hpp"

namespace perisal::descriptors {

namespace {

constexpr int kIntervals = 4;

bool filter_fits(const roi::IntegralImage& ii, int x, int y, int filter_size) {
    const int b = (filter_size - 1) / 2 + 1;
    return x - b >= 0 && y - b >= 0 && x + b < ii.width() && y + b < ii.height();
}

}  // namespace

std::array<int, 4> octave_filter_sizes(int octave) {
    std::array<int, 4> sizes{};
    for (int i = 0; i < kIntervals; ++i) sizes[static_cast<std::size_t>(i)] = 3 * ((2 << octave) * (i + 1) + 1);
    return sizes;
}

double hessian_response(const roi::IntegralImage& ii, int x, int y, int filter_size) {
    const int l = filter_size / 3;
    const int b = (filter_size - 1) / 2;
    const double dxx = ii.rect_sum(x - b, y - l + 1, filter_size, 2 * l - 1) -
                       3.0 * ii.rect_sum(x - l / 2, y - l + 1, l, 2 * l - 1);
    const double dyy = ii.rect_sum(x - l + 1, y - b, 2 * l - 1, filter_size) -
                       3.0 * ii.rect_sum(x - l + 1, y - l / 2, 2 * l - 1, l);
    const double dxy = ii.rect_sum(x + 1, y - l, l, l) + ii.rect_sum(x - l, y + 1, l, l) -
                       ii.rect_sum(x - l, y - l, l, l) - ii.rect_sum(x + 1, y + 1, l, l);
    const double norm = 1.0 / (255.0 * filter_size * filter_size);
    const double xx = dxx * norm, yy = dyy * norm, xy = dxy * norm;
    return xx * yy - 0.81 * xy * xy;
}

ResponseLayer response_layer(const roi::IntegralImage& ii, int filter_size, int step) {
    ResponseLayer layer;
    layer.filter_size = filter_size;
    layer.step = step;
    layer.width = (ii.width() + step - 1) / step;
    layer.height = (ii.height() + step - 1) / step;
    const auto n = static_cast<std::size_t>(layer.width) * static_cast<std::size_t>(layer.height);
    layer.det.assign(n, 0.0);
    layer.valid.assign(n, 0);
    for (int gy = 0; gy < layer.height; ++gy)
        for (int gx = 0; gx < layer.width; ++gx) {
            const int x = gx * step, y = gy * step;
            if (!filter_fits(ii, x, y, filter_size)) continue;
            const auto i = static_cast<std::size_t>(gy) * static_cast<std::size_t>(layer.width) + static_cast<std::size_t>(gx);
            layer.det[i] = hessian_response(ii, x, y, filter_size);
            layer.valid[i] = 1;
        }
    return layer;
}

std::vector<InterestPoint> detect_interest_points(const GrayMap& intensity, const BinaryMask& roi,
                                                  const DetectorOptions& opts) {
    if (intensity.width() != roi.width() || intensity.height() != roi.height())
        throw InvalidInput("intensity map and ROI mask differ in size");
    if (opts.octaves < 1) throw ConfigError("detector needs at least one octave");
    std::vector<InterestPoint> points;
    if (roi.none()) return points;

    const roi::IntegralImage ii(intensity);
    for (int o = 0; o < opts.octaves; ++o) {
        const int step = 1 << o;
        std::vector<ResponseLayer> layers;
        for (int size : octave_filter_sizes(o)) layers.push_back(response_layer(ii, size, step));
        const int gw = layers[0].width, gh = layers[0].height;
        for (int i = 1; i + 1 < kIntervals; ++i) {
            const ResponseLayer& mid = layers[static_cast<std::size_t>(i)];
            const ResponseLayer& top = layers[static_cast<std::size_t>(i + 1)];
            for (int gy = 1; gy + 1 < gh; ++gy)
                for (int gx = 1; gx + 1 < gw; ++gx) {
                    const auto idx = static_cast<std::size_t>(gy) * static_cast<std::size_t>(gw) + static_cast<std::size_t>(gx);
                    if (!top.valid[idx]) continue;
                    const double v = mid.det[idx];
                    if (v < opts.hessian_threshold) continue;
                    const int x = gx * step, y = gy * step;
                    if (!roi.at(x, y)) continue;
                    bool is_max = true;
                    for (int li = i - 1; li <= i + 1 && is_max; ++li)
                        for (int dy = -1; dy <= 1 && is_max; ++dy)
                            for (int dx = -1; dx <= 1; ++dx) {
                                if (li == i && dx == 0 && dy == 0) continue;
                                if (layers[static_cast<std::size_t>(li)].at(gx + dx, gy + dy) >= v) {
                                    is_max = false;
                                    break;
                                }
                            }
                    if (is_max) points.push_back({x, y, 1.2 * mid.filter_size / 9.0, v});
                }
        }
    }
    std::sort(points.begin(), points.end(), [](const InterestPoint& a, const InterestPoint& b) {
        if (a.response != b.response) return a.response > b.response;
        if (a.y != b.y) return a.y < b.y;
        if (a.x != b.x) return a.x < b.x;
        return a.scale < b.scale;
    });
    return points;
}

std::optional<LocalDescriptor> describe_point(const roi::IntegralImage& ii, const InterestPoint& point) {
    const double s = point.scale;
    const int half = std::max(1, static_cast<int>(std::lround(s)));  // half of the Haar wavelet side
    const double sigma = 3.3 * s;

    // Integer sample offsets, identical for every point of this scale.
    std::array<int, 20> offsets{};
    for (int k = 0; k < 20; ++k) offsets[static_cast<std::size_t>(k)] = static_cast<int>(std::lround((k - 9.5) * s));
    const int reach = std::max(-offsets.front(), offsets.back()) + half;
    if (point.x - reach < 0 || point.y - reach < 0 || point.x + reach > ii.width() || point.y + reach > ii.height())
        return std::nullopt;

    LocalDescriptor d{point.x, point.y, point.scale, {}};
    for (int sy = 0; sy < 4; ++sy)
        for (int sx = 0; sx < 4; ++sx) {
            double sum_dx = 0.0, sum_dy = 0.0, abs_dx = 0.0, abs_dy = 0.0;
            for (int ky = 0; ky < 5; ++ky)
                for (int kx = 0; kx < 5; ++kx) {
                    const int du = offsets[static_cast<std::size_t>(sx * 5 + kx)];
                    const int dv = offsets[static_cast<std::size_t>(sy * 5 + ky)];
                    const int cx = point.x + du, cy = point.y + dv;
                    const double haar_x = ii.rect_sum(cx, cy - half, half, 2 * half) -
                                          ii.rect_sum(cx - half, cy - half, half, 2 * half);
                    const double haar_y = ii.rect_sum(cx - half, cy, 2 * half, half) -
                                          ii.rect_sum(cx - half, cy - half, 2 * half, half);
                    const double g = std::exp(-(static_cast<double>(du) * du + static_cast<double>(dv) * dv) /
                                              (2.0 * sigma * sigma));
                    const double gx = g * haar_x, gy = g * haar_y;
                    sum_dx += gx;
                    sum_dy += gy;
                    abs_dx += std::abs(gx);
                    abs_dy += std::abs(gy);
                }
            const auto base = static_cast<std::size_t>(4 * (sy * 4 + sx));
            d.vector[base] = sum_dx;
            d.vector[base + 1] = sum_dy;
            d.vector[base + 2] = abs_dx;
            d.vector[base + 3] = abs_dy;
        }
    double norm = 0.0;
    for (double v : d.vector) norm += v * v;
    norm = std::sqrt(norm);
    if (norm < 1e-12) {
        d.vector.fill(0.0);
    } else {
        for (double& v : d.vector) v /= norm;
    }
    return d;
}

std::vector<LocalDescriptor> extract_descriptors(const GrayMap& intensity, const BinaryMask& roi,
                                                 const DetectorOptions& opts, std::size_t max_descriptors) {
    std::vector<LocalDescriptor> out;
    const auto points = detect_interest_points(intensity, roi, opts);
    if (points.empty()) return out;
    const roi::IntegralImage ii(intensity);
    for (const auto& p : points) {
        if (max_descriptors && out.size() >= max_descriptors) break;
        if (auto d = describe_point(ii, p)) out.push_back(*d);
    }
    return out;
}

GlobalColorMoments color_moments(const RgbImage& image) {
    if (image.empty()) throw InvalidInput("color moments of an empty image");
    GlobalColorMoments m{};
    const auto n = static_cast<double>(image.pixel_count());
    const auto& bytes = image.bytes();
    for (std::size_t ch = 0; ch < 3; ++ch) {
        double mean = 0.0;
        for (std::size_t i = ch; i < bytes.size(); i += 3) mean += bytes[i];
        mean /= n;
        double m2 = 0.0, m3 = 0.0;
        for (std::size_t i = ch; i < bytes.size(); i += 3) {
            const double d = bytes[i] - mean;
            m2 += d * d;
            m3 += d * d * d;
        }
        m[3 * ch] = mean;
        m[3 * ch + 1] = std::sqrt(m2 / n);
        m[3 * ch + 2] = std::cbrt(m3 / n);
    }
    return m;
}

void write_descriptor_csv(std::ostream& out, std::span<const LocalDescriptor> descriptors) {
    out << "x,y,scale";
    for (std::size_t i = 0; i < kDescriptorDim; ++i) out << ",v" << i;
    out << '\n';
    char buf[32];
    for (const auto& d : descriptors) {
        out << d.x << ',' << d.y;
        std::snprintf(buf, sizeof buf, ",%.9g", d.scale);
        out << buf;
        for (double v : d.vector) {
            std::snprintf(buf, sizeof buf, ",%.9g", v);
            out << buf;
        }
        out << '\n';
    }
}

}  // namespace perisal::descriptors
