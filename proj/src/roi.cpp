#include "perisal/roi.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <string>

#include "perisal/error.hpp"
#include "perisal/saliency.hpp"

namespace perisal::roi {

void SkinModelConfig::validate() const {
    for (double v : {cb_min, cb_max, cr_min, cr_max})
        if (!(v >= 0.0 && v <= 255.0)) throw ConfigError("skin chrominance bounds must lie in [0, 255]");
    if (!(cb_min < cb_max) || !(cr_min < cr_max)) throw ConfigError("skin bounds require min < max");
}

YCbCr to_ycbcr(Rgb p) noexcept {
    const double r = p.r, g = p.g, b = p.b;
    return {0.299 * r + 0.587 * g + 0.114 * b, 128.0 - 0.168736 * r - 0.331264 * g + 0.5 * b,
            128.0 + 0.5 * r - 0.418688 * g - 0.081312 * b};
}

bool is_skin_chroma(double cb, double cr, const SkinModelConfig& cfg) noexcept {
    return cb >= cfg.cb_min && cb <= cfg.cb_max && cr >= cfg.cr_min && cr <= cfg.cr_max;
}

BinaryMask raw_skin_mask(const RgbImage& image, const SkinModelConfig& cfg) {
    BinaryMask mask(image.width(), image.height());
    for (int y = 0; y < image.height(); ++y)
        for (int x = 0; x < image.width(); ++x) {
            const YCbCr c = to_ycbcr(image.at(x, y));
            mask.set(x, y, is_skin_chroma(c.cb, c.cr, cfg));
        }
    return mask;
}

BinaryMask majority_filter(const BinaryMask& mask) {
    const int w = mask.width(), h = mask.height();
    BinaryMask out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            int on = 0, total = 0;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    const int nx = x + dx, ny = y + dy;
                    if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                    ++total;
                    on += mask.at(nx, ny) ? 1 : 0;
                }
            out.set(x, y, 2 * on > total);
        }
    return out;
}

BinaryMask skin_mask(const RgbImage& image, const SkinModelConfig& cfg) {
    cfg.validate();
    return majority_filter(raw_skin_mask(image, cfg));
}

IntegralImage::IntegralImage(const GrayMap& map)
    : width_(map.width()),
      height_(map.height()),
      table_(static_cast<std::size_t>(map.width() + 1) * static_cast<std::size_t>(map.height() + 1), 0.0) {
    const auto stride = static_cast<std::size_t>(width_ + 1);
    for (int y = 0; y < height_; ++y) {
        double row = 0.0;
        for (int x = 0; x < width_; ++x) {
            row += map.at(x, y);
            table_[static_cast<std::size_t>(y + 1) * stride + static_cast<std::size_t>(x + 1)] =
                table_[static_cast<std::size_t>(y) * stride + static_cast<std::size_t>(x + 1)] + row;
        }
    }
}

double IntegralImage::rect_sum(int x0, int y0, int w, int h) const noexcept {
    int x1 = std::min(x0 + w, width_), y1 = std::min(y0 + h, height_);
    x0 = std::max(x0, 0);
    y0 = std::max(y0, 0);
    if (x1 <= x0 || y1 <= y0) return 0.0;
    return at(x1, y1) - at(x0, y1) - at(x1, y0) + at(x0, y0);
}

void CascadeModel::validate() const {
    if (window_w <= 0 || window_h <= 0) throw ConfigError("cascade window must be positive");
    if (stages.empty()) throw ConfigError("cascade has no stages");
    for (const auto& st : stages)
        for (const auto& f : st.features)
            for (const auto& r : f.rects)
                if (r.x < 0 || r.y < 0 || r.w <= 0 || r.h <= 0 || r.x + r.w > window_w || r.y + r.h > window_h)
                    throw ConfigError("cascade rectangle outside the detection window");
}

bool CascadeModel::accepts(const IntegralImage& ii, int x, int y) const {
    const double area = static_cast<double>(window_w) * window_h;
    for (const auto& st : stages) {
        double votes = 0.0;
        for (const auto& f : st.features) {
            double value = 0.0;
            for (const auto& r : f.rects) value += r.weight * ii.rect_sum(x + r.x, y + r.y, r.w, r.h);
            value /= area;
            votes += value < f.threshold ? f.left_val : f.right_val;
        }
        if (!(votes >= st.threshold)) return false;
    }
    return true;
}

namespace {

class TokenReader {
public:
    explicit TokenReader(std::istream& in) : in_(in) {}

    double real() {
        const std::string tok = next();
        char* end = nullptr;
        const double v = std::strtod(tok.c_str(), &end);
        if (end == tok.c_str() || *end != '\0') throw ConfigError("malformed cascade number: " + tok);
        return v;
    }
    int integer() {
        const double v = real();
        if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError("expected an integer in cascade file");
        return static_cast<int>(v);
    }

private:
    std::string next() {
        std::string tok;
        if (!(in_ >> tok)) throw ConfigError("truncated cascade file");
        return tok;
    }
    std::istream& in_;
};

}  // namespace

CascadeModel parse_cascade(std::istream& in) {
    TokenReader rd(in);
    CascadeModel m;
    m.window_w = rd.integer();
    m.window_h = rd.integer();
    const int n_stages = rd.integer();
    if (n_stages <= 0) throw ConfigError("cascade has no stages");
    for (int s = 0; s < n_stages; ++s) {
        CascadeStage st;
        const int n_features = rd.integer();
        if (n_features < 0) throw ConfigError("negative feature count in cascade");
        st.threshold = rd.real();
        for (int f = 0; f < n_features; ++f) {
            HaarFeature feat;
            const int n_rects = rd.integer();
            if (n_rects <= 0) throw ConfigError("cascade feature without rectangles");
            feat.threshold = rd.real();
            feat.left_val = rd.real();
            feat.right_val = rd.real();
            for (int r = 0; r < n_rects; ++r) {
                HaarRect rect;
                rect.x = rd.integer();
                rect.y = rd.integer();
                rect.w = rd.integer();
                rect.h = rd.integer();
                rect.weight = rd.real();
                feat.rects.push_back(rect);
            }
            st.features.push_back(std::move(feat));
        }
        m.stages.push_back(std::move(st));
    }
    m.validate();
    return m;
}

CascadeModel load_cascade(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open cascade file: " + path.string());
    try {
        return parse_cascade(in);
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

BinaryMask face_mask(const RgbImage& image, const CascadeModel* cascade, const FaceDetectorOptions& opts) {
    BinaryMask mask(image.width(), image.height());
    if (!cascade || image.empty()) return mask;
    if (!(opts.scale_step > 1.0) || opts.stride < 1) throw ConfigError("invalid face detector options");
    const GrayMap base = saliency::intensity_image(image);

    double scale = 1.0;
    for (int level = 0; opts.max_levels == 0 || level < opts.max_levels; ++level, scale *= opts.scale_step) {
        const int w = static_cast<int>(std::floor(image.width() / scale));
        const int h = static_cast<int>(std::floor(image.height() / scale));
        if (w < cascade->window_w || h < cascade->window_h) break;
        const IntegralImage ii(level == 0 ? base : resize_bilinear(base, w, h));

        auto positions = [&](int extent, int window) {
            std::vector<int> p;
            for (int v = 0; v + window <= extent; v += opts.stride) p.push_back(v);
            if (p.back() != extent - window) p.push_back(extent - window);
            return p;
        };
        const auto xs = positions(w, cascade->window_w);
        const auto ys = positions(h, cascade->window_h);
        for (int y : ys)
            for (int x : xs) {
                if (!cascade->accepts(ii, x, y)) continue;
                const int x0 = static_cast<int>(std::floor(x * scale));
                const int y0 = static_cast<int>(std::floor(y * scale));
                const int x1 = std::min(image.width(), static_cast<int>(std::ceil((x + cascade->window_w) * scale)));
                const int y1 = std::min(image.height(), static_cast<int>(std::ceil((y + cascade->window_h) * scale)));
                for (int yy = y0; yy < y1; ++yy)
                    for (int xx = x0; xx < x1; ++xx) mask.set(xx, yy, true);
            }
    }
    return mask;
}

BinaryMask hybrid_roi(const BinaryMask& salient, const BinaryMask& skin, const BinaryMask& face) {
    if (!salient.same_shape(skin) || !salient.same_shape(face))
        throw InvalidInput("ROI masks must share dimensions");
    BinaryMask out(salient.width(), salient.height());
    for (int y = 0; y < out.height(); ++y)
        for (int x = 0; x < out.width(); ++x)
            out.set(x, y, salient.at(x, y) && skin.at(x, y) && !face.at(x, y));
    return out;
}

}  // namespace perisal::roi
