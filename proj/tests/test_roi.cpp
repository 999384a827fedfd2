#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include "perisal/error.hpp"
#include "perisal/roi.hpp"
#include "support.hpp"

using namespace perisal;
using namespace perisal::roi;

namespace {

double brute_sum(const GrayMap& m, int x0, int y0, int w, int h) {
    double s = 0.0;
    for (int y = std::max(0, y0); y < std::min(m.height(), y0 + h); ++y)
        for (int x = std::max(0, x0); x < std::min(m.width(), x0 + w); ++x) s += m.at(x, y);
    return s;
}

CascadeModel single_box_cascade(int window, double threshold) {
    std::istringstream in(std::to_string(window) + " " + std::to_string(window) + " 1\n1 1\n1 " +
                          std::to_string(threshold) + " 0 1\n0 0 " + std::to_string(window) + " " +
                          std::to_string(window) + " 1\n");
    return parse_cascade(in);
}

}  // namespace

TEST_CASE("YCbCr conversion and the chrominance box") {
    const SkinModelConfig cfg;
    const auto blue = to_ycbcr({0, 0, 255});
    CHECK(blue.cb == doctest::Approx(128.0 + 0.5 * 255.0));
    CHECK(blue.cr == doctest::Approx(128.0 - 0.081312 * 255.0));
    CHECK_FALSE(is_skin_chroma(blue.cb, blue.cr, cfg));
    CHECK(is_skin_chroma(100, 150, cfg));
    CHECK_FALSE(is_skin_chroma(100, 132.9, cfg));
    CHECK(is_skin_chroma(77, 173, cfg));

    const auto black = to_ycbcr({0, 0, 0});
    CHECK(black.cb == 128.0);
    CHECK(black.cr == 128.0);
    CHECK(skin_mask(RgbImage(20, 20), cfg).none());

    const auto skin = to_ycbcr({224, 172, 140});
    CHECK(is_skin_chroma(skin.cb, skin.cr, cfg));
    CHECK(skin_mask(RgbImage(20, 20, {224, 172, 140}), cfg).count() == 400);

    SkinModelConfig bad;
    bad.cb_min = 200;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("raw skin mask is pixelwise") {
    std::mt19937_64 rng(4);
    const int w = 17, h = 11;
    RgbImage img(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            img.set(x, y, rng() % 2 ? Rgb{224, 172, 140} : Rgb{static_cast<std::uint8_t>(rng() % 256),
                                                                static_cast<std::uint8_t>(rng() % 256),
                                                                static_cast<std::uint8_t>(rng() % 256)});
    std::vector<int> perm(static_cast<std::size_t>(w * h));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    RgbImage shuffled(w, h);
    for (int i = 0; i < w * h; ++i) shuffled.set(perm[i] % w, perm[i] / w, img.at(i % w, i / w));
    const auto a = raw_skin_mask(img, {}), b = raw_skin_mask(shuffled, {});
    for (int i = 0; i < w * h; ++i) CHECK(a.at(i % w, i / w) == b.at(perm[i] % w, perm[i] / w));
}

TEST_CASE("majority filter") {
    BinaryMask lone(9, 9);
    lone.set(4, 4, true);
    CHECK(majority_filter(lone).none());

    BinaryMask block(9, 9);
    for (int y = 2; y < 7; ++y)
        for (int x = 2; x < 7; ++x) block.set(x, y, true);
    const auto f = majority_filter(block);
    CHECK(f.at(4, 4));
    CHECK(f.at(3, 3));
    CHECK_FALSE(f.at(0, 0));
    CHECK(majority_filter(BinaryMask(5, 5, true)).count() == 25);
}

TEST_CASE("integral image") {
    const IntegralImage ones(GrayMap(3, 3, 1.0));
    CHECK(ones.prefix(2, 2) == 9.0);
    CHECK(ones.rect_sum(1, 1, 0, 2) == 0.0);
    CHECK(ones.rect_sum(5, 5, 2, 2) == 0.0);
    CHECK(ones.rect_sum(-1, -1, 2, 2) == 1.0);

    std::mt19937_64 rng(77);
    GrayMap m(53, 41);
    for (double& v : m.values()) v = testsupport::uniform_int(rng, -1000, 1000);
    const IntegralImage ii(m);
    for (int q = 0; q < 100; ++q) {
        const int x0 = testsupport::uniform_int(rng, -5, 52), y0 = testsupport::uniform_int(rng, -5, 40);
        const int w = testsupport::uniform_int(rng, 0, 60), h = testsupport::uniform_int(rng, 0, 50);
        CHECK(ii.rect_sum(x0, y0, w, h) == brute_sum(m, x0, y0, w, h));
    }

    GrayMap real(40, 30);
    for (double& v : real.values()) v = testsupport::uniform(rng, 0.0, 1.0);
    const IntegralImage ri(real);
    for (int q = 0; q < 100; ++q) {
        const int x0 = testsupport::uniform_int(rng, 0, 39), y0 = testsupport::uniform_int(rng, 0, 29);
        const int w = testsupport::uniform_int(rng, 1, 40 - x0), h = testsupport::uniform_int(rng, 1, 30 - y0);
        CHECK(ri.rect_sum(x0, y0, w, h) == doctest::Approx(brute_sum(real, x0, y0, w, h)).epsilon(1e-6));
    }
}

TEST_CASE("cascade files") {
    std::istringstream degenerate("8 8 1\n0 -inf\n");
    const auto all = parse_cascade(degenerate);
    CHECK(all.stages.size() == 1);
    const RgbImage img(40, 30, {10, 20, 30});
    CHECK(face_mask(img, nullptr).none());
    CHECK(face_mask(img, &all).count() == 1200);

    std::istringstream truncated("8 8 1\n1 0\n1 0.5 0 1\n0 0 4");
    CHECK_THROWS_AS(parse_cascade(truncated), ConfigError);
    std::istringstream outside("8 8 1\n1 0\n1 0.5 0 1\n4 4 8 8 1\n");
    CHECK_THROWS_AS(parse_cascade(outside), ConfigError);
    CHECK_THROWS_AS(load_cascade("/nonexistent/cascade.txt"), ConfigError);
}

TEST_CASE("cascade fires exactly on its pattern") {
    RgbImage img(48, 36, {0, 0, 0});
    for (int y = 12; y < 20; ++y)
        for (int x = 20; x < 28; ++x) img.set(x, y, {255, 255, 255});
    const auto cascade = single_box_cascade(8, 250.0);
    const auto mask = face_mask(img, &cascade, {1.25, 1, 1});

    // Oracle: mean intensity of every 8x8 window evaluated directly.
    BinaryMask expect(48, 36);
    for (int y = 0; y + 8 <= 36; ++y)
        for (int x = 0; x + 8 <= 48; ++x) {
            double s = 0.0;
            for (int yy = y; yy < y + 8; ++yy)
                for (int xx = x; xx < x + 8; ++xx) {
                    const Rgb p = img.at(xx, yy);
                    s += (p.r + p.g + p.b) / 3.0;
                }
            if (s / 64.0 >= 250.0)
                for (int yy = y; yy < y + 8; ++yy)
                    for (int xx = x; xx < x + 8; ++xx) expect.set(xx, yy, true);
        }
    CHECK(expect.count() == 64);
    CHECK(mask.bits() == expect.bits());

    // With the pyramid, the pattern is still found and nothing far from it.
    const auto multi = face_mask(img, &cascade, {1.25, 1, 0});
    CHECK(multi.at(24, 16));
    CHECK_FALSE(multi.at(2, 2));
}

TEST_CASE("hybrid ROI set algebra") {
    const BinaryMask full(10, 6, true), empty(10, 6, false);
    CHECK(hybrid_roi(full, empty, empty).none());
    CHECK(hybrid_roi(full, full, full).none());
    BinaryMask left(10, 6);
    for (int y = 0; y < 6; ++y)
        for (int x = 0; x < 5; ++x) left.set(x, y, true);
    const auto right = hybrid_roi(full, full, left);
    for (int y = 0; y < 6; ++y)
        for (int x = 0; x < 10; ++x) CHECK(right.at(x, y) == (x >= 5));
    CHECK_THROWS_AS(hybrid_roi(full, BinaryMask(9, 6), empty), InvalidInput);

    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 200; ++trial) {
        const int w = testsupport::uniform_int(rng, 1, 30), h = testsupport::uniform_int(rng, 1, 30);
        const auto a = testsupport::random_mask(rng, w, h, testsupport::uniform(rng, 0, 1));
        const auto b = testsupport::random_mask(rng, w, h, testsupport::uniform(rng, 0, 1));
        const auto c = testsupport::random_mask(rng, w, h, testsupport::uniform(rng, 0, 1));
        const auto r = hybrid_roi(a, b, c);
        CHECK(r.count() <= b.count());
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) CHECK(r.at(x, y) == (a.at(x, y) && b.at(x, y) && !c.at(x, y)));
    }
}
