#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "perisal/descriptors.hpp"
#include "perisal/error.hpp"
#include "support.hpp"

using namespace perisal;
using namespace perisal::descriptors;

namespace {

GrayMap blob_map(int w, int h, int cx, int cy, double sigma, double depth, double base = 200.0) {
    GrayMap m(w, h, base);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double r2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
            m.at(x, y) = base - depth * std::exp(-r2 / (2 * sigma * sigma));
        }
    return m;
}

GrayMap integer_texture(std::mt19937_64& rng, int w, int h) {
    GrayMap m(w, h);
    for (double& v : m.values()) v = testsupport::uniform_int(rng, 0, 200);
    return m;
}

double norm(const LocalDescriptor& d) {
    double s = 0.0;
    for (double v : d.vector) s += v * v;
    return std::sqrt(s);
}

}  // namespace

TEST_CASE("octave filter sizes") {
    CHECK(octave_filter_sizes(0) == std::array<int, 4>{9, 15, 21, 27});
    CHECK(octave_filter_sizes(1) == std::array<int, 4>{15, 27, 39, 51});
    CHECK(octave_filter_sizes(2) == std::array<int, 4>{27, 51, 75, 99});
}

TEST_CASE("uniform image has no interest points") {
    const GrayMap flat(200, 150, 128.0);
    CHECK(detect_interest_points(flat, BinaryMask(200, 150, true)).empty());
    CHECK_THROWS_AS(detect_interest_points(flat, BinaryMask(10, 10, true)), InvalidInput);
}

TEST_CASE("dark blob is found at its centre") {
    const auto m = blob_map(200, 200, 100, 100, 4.0, 150.0);
    const auto pts = detect_interest_points(m, BinaryMask(200, 200, true));
    REQUIRE_FALSE(pts.empty());
    CHECK(std::abs(pts[0].x - 100) <= 3);
    CHECK(std::abs(pts[0].y - 100) <= 3);
    for (std::size_t i = 1; i < pts.size(); ++i) CHECK(pts[i].response <= pts[i - 1].response);

    // Brute-force argmax of the response over all pixels and first-octave sizes.
    const roi::IntegralImage ii(m);
    double best = -1e300;
    int bx = 0, by = 0;
    for (int size : octave_filter_sizes(0))
        for (int y = 20; y < 180; ++y)
            for (int x = 20; x < 180; ++x) {
                const double r = hessian_response(ii, x, y, size);
                if (r > best) {
                    best = r;
                    bx = x;
                    by = y;
                }
            }
    CHECK(std::abs(bx - 100) <= 3);
    CHECK(std::abs(by - 100) <= 3);
    CHECK(pts[0].response <= best);

    BinaryMask away(200, 200, true);
    for (int y = 60; y < 140; ++y)
        for (int x = 60; x < 140; ++x) away.set(x, y, false);
    CHECK(detect_interest_points(m, away).empty());
    CHECK(detect_interest_points(m, BinaryMask(200, 200, false)).empty());
}

TEST_CASE("detection is deterministic and monotone in the ROI") {
    std::mt19937_64 rng(12);
    GrayMap m(160, 120, 128.0);
    for (int b = 0; b < 12; ++b) {
        const int cx = testsupport::uniform_int(rng, 20, 140), cy = testsupport::uniform_int(rng, 20, 100);
        const auto blob = blob_map(160, 120, cx, cy, testsupport::uniform(rng, 2, 6), 80.0, 0.0);
        for (std::size_t i = 0; i < m.size(); ++i) m.values()[i] += blob.values()[i];
    }
    const BinaryMask full(160, 120, true);
    const auto a = detect_interest_points(m, full);
    const auto b = detect_interest_points(m, full);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].x == b[i].x);
        CHECK(a[i].y == b[i].y);
        CHECK(a[i].scale == b[i].scale);
        CHECK(a[i].response == b[i].response);
    }

    for (int trial = 0; trial < 10; ++trial) {
        const auto big = testsupport::random_mask(rng, 160, 120, 0.8);
        BinaryMask small = big;
        for (int y = 0; y < 120; ++y)
            for (int x = 0; x < 160; ++x)
                if (rng() % 3 == 0) small.set(x, y, false);
        const auto pb = detect_interest_points(m, big), ps = detect_interest_points(m, small);
        CHECK(ps.size() <= pb.size());
        for (const auto& p : ps) {
            bool found = false;
            for (const auto& q : pb) found = found || (q.x == p.x && q.y == p.y && q.scale == p.scale);
            CHECK(found);
        }
    }
}

TEST_CASE("descriptor normalization and flat patches") {
    const roi::IntegralImage flat(GrayMap(120, 120, 90.0));
    const auto d = describe_point(flat, {60, 60, 1.2, 0.0});
    REQUIRE(d.has_value());
    for (double v : d->vector) CHECK(v == 0.0);

    std::mt19937_64 rng(6);
    const roi::IntegralImage tex(integer_texture(rng, 120, 120));
    for (double s : {1.2, 2.0, 2.8}) {
        const auto t = describe_point(tex, {60, 60, s, 0.0});
        REQUIRE(t.has_value());
        CHECK(t->vector.size() == kDescriptorDim);
        CHECK(norm(*t) == doctest::Approx(1.0).epsilon(1e-9));
    }
    CHECK_FALSE(describe_point(tex, {3, 3, 2.0, 0.0}).has_value());
}

TEST_CASE("descriptor is translation and brightness invariant") {
    std::mt19937_64 rng(8);
    const GrayMap base = integer_texture(rng, 150, 150);
    const int dx = 7, dy = 3;
    GrayMap shifted(150, 150, 0.0), brighter(150, 150, 0.0);
    for (int y = 0; y < 150; ++y)
        for (int x = 0; x < 150; ++x) {
            shifted.at(x, y) = base.at(std::clamp(x - dx, 0, 149), std::clamp(y - dy, 0, 149));
            brighter.at(x, y) = base.at(x, y) + 37.0;
        }
    const roi::IntegralImage ib(base), is(shifted), ih(brighter);
    for (double s : {1.2, 2.0}) {
        const auto a = describe_point(ib, {70, 70, s, 0.0});
        const auto b = describe_point(is, {70 + dx, 70 + dy, s, 0.0});
        const auto c = describe_point(ih, {70, 70, s, 0.0});
        REQUIRE(a.has_value());
        REQUIRE(b.has_value());
        REQUIRE(c.has_value());
        CHECK(a->vector == b->vector);
        CHECK(a->vector == c->vector);
    }
}

TEST_CASE("descriptor extraction") {
    const auto m = blob_map(200, 200, 100, 100, 4.0, 150.0);
    const auto all = extract_descriptors(m, BinaryMask(200, 200, true), {});
    REQUIRE_FALSE(all.empty());
    for (const auto& d : all) CHECK(norm(d) == doctest::Approx(1.0).epsilon(1e-9));
    const auto capped = extract_descriptors(m, BinaryMask(200, 200, true), {}, 1);
    REQUIRE(capped.size() == 1);
    CHECK(capped[0].vector == all[0].vector);

    std::ostringstream out;
    write_descriptor_csv(out, capped);
    const auto text = out.str();
    CHECK(text.rfind("x,y,scale,v0,", 0) == 0);
    CHECK(text.find("v63\n") != std::string::npos);
}

TEST_CASE("colour moments") {
    const auto u = color_moments(RgbImage(10, 10, {40, 90, 250}));
    CHECK(u.size() == kColorMomentDim);
    CHECK(u == GlobalColorMoments{40, 0, 0, 90, 0, 0, 250, 0, 0});

    RgbImage half(10, 10, {0, 0, 0});
    for (int y = 0; y < 5; ++y)
        for (int x = 0; x < 10; ++x) half.set(x, y, {255, 255, 255});
    const auto h = color_moments(half);
    for (int c = 0; c < 3; ++c) {
        CHECK(h[3 * c] == doctest::Approx(127.5));
        CHECK(h[3 * c + 1] == doctest::Approx(127.5));
        CHECK(h[3 * c + 2] == doctest::Approx(0.0).scale(1.0));
    }

    std::mt19937_64 rng(2);
    RgbImage img(13, 9), perm(13, 9);
    for (int y = 0; y < 9; ++y)
        for (int x = 0; x < 13; ++x) {
            const Rgb p{static_cast<std::uint8_t>(rng() % 256), static_cast<std::uint8_t>(rng() % 64),
                        static_cast<std::uint8_t>(rng() % 128)};
            img.set(x, y, p);
            perm.set(x, y, {p.b, p.r, p.g});
        }
    const auto a = color_moments(img), b = color_moments(perm);
    for (int k = 0; k < 3; ++k) {
        CHECK(b[k] == doctest::Approx(a[6 + k]));
        CHECK(b[3 + k] == doctest::Approx(a[k]));
        CHECK(b[6 + k] == doctest::Approx(a[3 + k]));
    }
    // Skewed channel: a single bright pixel gives a positive third moment.
    RgbImage sk(4, 4, {0, 0, 0});
    sk.set(0, 0, {255, 0, 0});
    CHECK(color_moments(sk)[2] > 0.0);
}
