#include "perisal/saliency.hpp"

#include <algorithm>
#include <cmath>

#include "perisal/error.hpp"

namespace perisal::saliency {

namespace {

int reflect(int i, int n) {
    if (n == 1) return 0;
    while (i < 0 || i >= n) {
        if (i < 0) i = -i;
        if (i >= n) i = 2 * (n - 1) - i;
    }
    return i;
}

constexpr double kBinomial[5] = {1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16};

GrayMap blur_binomial(const GrayMap& src) {
    const int w = src.width(), h = src.height();
    GrayMap tmp(w, h), out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int k = -2; k <= 2; ++k) acc += kBinomial[k + 2] * src.at(reflect(x + k, w), y);
            tmp.at(x, y) = acc;
        }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int k = -2; k <= 2; ++k) acc += kBinomial[k + 2] * tmp.at(x, reflect(y + k, h));
            out.at(x, y) = acc;
        }
    return out;
}

GrayMap decimate(const GrayMap& src) {
    const int w = (src.width() + 1) / 2, h = (src.height() + 1) / 2;
    GrayMap out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) out.at(x, y) = src.at(2 * x, 2 * y);
    return out;
}

GrayMap subtract(const GrayMap& a, const GrayMap& b) {
    GrayMap out(a.width(), a.height());
    for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] = a.values()[i] - b.values()[i];
    return out;
}

void accumulate(GrayMap& acc, const GrayMap& map) {
    const GrayMap resized = resize_bilinear(map, acc.width(), acc.height());
    for (std::size_t i = 0; i < acc.size(); ++i) acc.values()[i] += resized.values()[i];
}

// Linear rescale to [0, hi]; a constant map becomes all zeros.
GrayMap rescale(const GrayMap& map, double hi) {
    GrayMap out(map.width(), map.height());
    const double lo = map.min_value(), top = map.max_value();
    if (!(top > lo)) return out;
    const double k = hi / (top - lo);
    for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] = (map.values()[i] - lo) * k;
    return out;
}

constexpr std::pair<int, int> kScalePairs[] = {{2, 5}, {2, 6}, {3, 6}, {3, 7}, {4, 7}, {4, 8}};

}  // namespace

RgbImage preprocess(const RgbImage& image) {
    if (image.empty()) throw InvalidInput("cannot preprocess an empty image");
    const double scale = std::min(static_cast<double>(kTargetWidth) / image.width(),
                                  static_cast<double>(kTargetHeight) / image.height());
    const int w = std::max(1, static_cast<int>(std::lround(image.width() * scale)));
    const int h = std::max(1, static_cast<int>(std::lround(image.height() * scale)));
    return resize_bilinear(image, w, h);
}

GrayMap intensity_image(const RgbImage& image) {
    GrayMap out(image.width(), image.height());
    for (int y = 0; y < image.height(); ++y)
        for (int x = 0; x < image.width(); ++x) {
            const Rgb p = image.at(x, y);
            out.at(x, y) = (static_cast<double>(p.r) + p.g + p.b) / 3.0;
        }
    return out;
}

BroadColorChannels broad_color_channels(const RgbImage& image) {
    const int w = image.width(), h = image.height();
    BroadColorChannels c{GrayMap(w, h), GrayMap(w, h), GrayMap(w, h), GrayMap(w, h)};
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const Rgb p = image.at(x, y);
            const double r = p.r, g = p.g, b = p.b;
            c.r.at(x, y) = std::max(0.0, r - (g + b) / 2.0);
            c.g.at(x, y) = std::max(0.0, g - (r + b) / 2.0);
            c.b.at(x, y) = std::max(0.0, b - (r + g) / 2.0);
            c.y.at(x, y) = std::max(0.0, (r + g) / 2.0 - std::abs(r - g) / 2.0 - b);
        }
    return c;
}

GaussianPyramid gaussian_pyramid(const GrayMap& map, int max_levels) {
    if (map.empty()) throw InvalidInput("pyramid of an empty map");
    const int larger = std::max(map.width(), map.height());
    int feasible = 1;
    while (feasible < max_levels && (larger >> feasible) >= 1) ++feasible;
    GaussianPyramid pyr;
    pyr.reduced = feasible < kPyramidLevels;
    pyr.levels.reserve(static_cast<std::size_t>(feasible));
    pyr.levels.push_back(map);
    for (int k = 1; k < feasible; ++k) pyr.levels.push_back(decimate(blur_binomial(pyr.levels.back())));
    return pyr;
}

GrayMap across_scale_difference(const GrayMap& center, const GrayMap& surround) {
    const GrayMap up = resize_bilinear(surround, center.width(), center.height());
    GrayMap out(center.width(), center.height());
    for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] = std::abs(center.values()[i] - up.values()[i]);
    return out;
}

std::optional<GrayMap> center_surround(const GaussianPyramid& pyr, int c, int s) {
    if (!pyr.has(c) || !pyr.has(s)) return std::nullopt;
    return across_scale_difference(pyr.levels[static_cast<std::size_t>(c)], pyr.levels[static_cast<std::size_t>(s)]);
}

std::optional<OpponencyMaps> color_opponency_maps(const ColorPyramids& pyr, int c, int s) {
    for (const auto* p : {&pyr.r, &pyr.g, &pyr.b, &pyr.y})
        if (!p->has(c) || !p->has(s)) return std::nullopt;
    const auto lc = static_cast<std::size_t>(c), ls = static_cast<std::size_t>(s);
    OpponencyMaps m;
    m.rg = across_scale_difference(subtract(pyr.r.levels[lc], pyr.g.levels[lc]),
                                   subtract(pyr.g.levels[ls], pyr.r.levels[ls]));
    m.by = across_scale_difference(subtract(pyr.b.levels[lc], pyr.y.levels[lc]),
                                   subtract(pyr.y.levels[ls], pyr.b.levels[ls]));
    return m;
}

GrayMap normalize_map(const GrayMap& map) {
    GrayMap out = rescale(map, 1.0);
    const double top = out.max_value();
    if (!(top > 0.0)) return out;

    const int w = out.width(), h = out.height();
    double sum = 0.0;
    std::size_t count = 0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double v = out.at(x, y);
            if (v >= top) continue;
            bool ge_all = true, gt_any = false;
            for (int dy = -1; dy <= 1 && ge_all; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    const int nx = x + dx, ny = y + dy;
                    if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                    const double n = out.at(nx, ny);
                    if (n > v) {
                        ge_all = false;
                        break;
                    }
                    if (n < v) gt_any = true;
                }
            if (ge_all && gt_any) {
                sum += v;
                ++count;
            }
        }
    const double mean_other = count ? sum / static_cast<double>(count) : 0.0;
    const double gain = (1.0 - mean_other) * (1.0 - mean_other);
    for (double& v : out.values()) v *= gain;
    return out;
}

FeatureMaps compute_feature_maps(const RgbImage& image) {
    const GaussianPyramid ipyr = gaussian_pyramid(intensity_image(image));
    const BroadColorChannels ch = broad_color_channels(image);
    const ColorPyramids cpyr{gaussian_pyramid(ch.r), gaussian_pyramid(ch.g), gaussian_pyramid(ch.b),
                             gaussian_pyramid(ch.y)};
    FeatureMaps maps;
    maps.reduced = ipyr.reduced;
    if (ipyr.has(kCommonScale)) {
        maps.common_width = ipyr.levels[kCommonScale].width();
        maps.common_height = ipyr.levels[kCommonScale].height();
    }
    for (auto [c, s] : kScalePairs) {
        if (auto i = center_surround(ipyr, c, s)) maps.intensity.push_back(std::move(*i));
        if (auto o = color_opponency_maps(cpyr, c, s)) {
            maps.rg.push_back(std::move(o->rg));
            maps.by.push_back(std::move(o->by));
        }
    }
    return maps;
}

SaliencyResult conspicuity_and_saliency(const FeatureMaps& maps) {
    if (maps.intensity.empty() || maps.rg.empty() || maps.by.empty() || maps.common_width == 0)
        throw InvalidInput("image too small: no center-surround pair available");
    SaliencyResult r;
    r.reduced = maps.reduced;
    r.intensity_conspicuity = GrayMap(maps.common_width, maps.common_height);
    r.color_conspicuity = GrayMap(maps.common_width, maps.common_height);
    for (const auto& m : maps.intensity) accumulate(r.intensity_conspicuity, normalize_map(m));
    for (std::size_t i = 0; i < maps.rg.size(); ++i) {
        accumulate(r.color_conspicuity, normalize_map(maps.rg[i]));
        accumulate(r.color_conspicuity, normalize_map(maps.by[i]));
    }
    const GrayMap ni = normalize_map(r.intensity_conspicuity);
    const GrayMap nc = normalize_map(r.color_conspicuity);
    GrayMap s(maps.common_width, maps.common_height);
    for (std::size_t i = 0; i < s.size(); ++i) s.values()[i] = 0.5 * (ni.values()[i] + nc.values()[i]);
    r.saliency = rescale(s, 255.0);
    return r;
}

SaliencyResult compute_saliency(const RgbImage& image) {
    return conspicuity_and_saliency(compute_feature_maps(image));
}

BlockContrastMap block_contrast(const RgbImage& image, int block) {
    if (block < 1) throw InvalidInput("block size must be >= 1");
    if (image.empty()) throw InvalidInput("block contrast of an empty image");
    const int gw = (image.width() + block - 1) / block;
    const int gh = (image.height() + block - 1) / block;
    std::vector<std::array<double, 3>> means(static_cast<std::size_t>(gw) * static_cast<std::size_t>(gh));
    for (int by = 0; by < gh; ++by)
        for (int bx = 0; bx < gw; ++bx) {
            std::array<double, 3> acc{};
            int n = 0;
            for (int y = by * block; y < std::min(image.height(), (by + 1) * block); ++y)
                for (int x = bx * block; x < std::min(image.width(), (bx + 1) * block); ++x) {
                    const Rgb p = image.at(x, y);
                    acc[0] += p.r;
                    acc[1] += p.g;
                    acc[2] += p.b;
                    ++n;
                }
            for (double& a : acc) a /= n;
            means[static_cast<std::size_t>(by * gw + bx)] = acc;
        }

    BlockContrastMap out{block, block, GrayMap(gw, gh)};
    for (int by = 0; by < gh; ++by)
        for (int bx = 0; bx < gw; ++bx) {
            const auto& p = means[static_cast<std::size_t>(by * gw + bx)];
            double c = 0.0;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    const int nx = bx + dx, ny = by + dy;
                    if (nx < 0 || ny < 0 || nx >= gw || ny >= gh) continue;
                    const auto& q = means[static_cast<std::size_t>(ny * gw + nx)];
                    c += std::sqrt((p[0] - q[0]) * (p[0] - q[0]) + (p[1] - q[1]) * (p[1] - q[1]) +
                                   (p[2] - q[2]) * (p[2] - q[2]));
                }
            out.values.at(bx, by) = c;
        }
    const double top = out.values.max_value();
    if (top > 0.0)
        for (double& v : out.values.values()) v = v / top * 255.0;
    return out;
}

BinaryMask attention_mask(const GrayMap& saliency, const BlockContrastMap& contrast, int width, int height,
                          double threshold_frac) {
    if (!(threshold_frac > 0.0 && threshold_frac <= 1.0))
        throw ConfigError("attention threshold fraction must lie in (0, 1]");
    const GrayMap s = resize_bilinear(saliency, width, height);
    const GrayMap c = resize_bilinear(contrast.values, width, height);
    GrayMap fused(width, height);
    for (std::size_t i = 0; i < fused.size(); ++i) fused.values()[i] = std::max(s.values()[i], c.values()[i]);
    BinaryMask mask(width, height);
    const double top = fused.max_value();
    if (!(top > 0.0)) return mask;
    const double cut = threshold_frac * top;
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            if (fused.at(x, y) >= cut && fused.at(x, y) > 0.0) mask.set(x, y, true);
    return mask;
}

}  // namespace perisal::saliency
