#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include "perisal/codebook.hpp"
#include "perisal/error.hpp"
#include "support.hpp"

using namespace perisal;
using namespace perisal::codebook;

namespace {

std::vector<Vector> random_points(std::mt19937_64& rng, std::size_t n, std::size_t d, double lo = -1, double hi = 1) {
    std::vector<Vector> p(n, Vector(d));
    for (auto& v : p)
        for (double& x : v) x = testsupport::uniform(rng, lo, hi);
    return p;
}

double objective(const std::vector<Vector>& pts, const std::vector<std::size_t>& assign, std::size_t k) {
    const std::size_t d = pts[0].size();
    std::vector<Vector> mean(k, Vector(d, 0.0));
    std::vector<std::size_t> cnt(k, 0);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        ++cnt[assign[i]];
        for (std::size_t j = 0; j < d; ++j) mean[assign[i]][j] += pts[i][j];
    }
    for (std::size_t c = 0; c < k; ++c)
        for (double& v : mean[c]) v /= static_cast<double>(std::max<std::size_t>(cnt[c], 1));
    double s = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) s += squared_distance(pts[i], mean[assign[i]]);
    return s;
}

// Minimum within-cluster sum of squares over every assignment with no empty cluster.
double brute_force_optimum(const std::vector<Vector>& pts, std::size_t k) {
    const std::size_t n = pts.size();
    std::vector<std::size_t> a(n, 0);
    double best = std::numeric_limits<double>::infinity();
    while (true) {
        std::set<std::size_t> used(a.begin(), a.end());
        if (used.size() == k) best = std::min(best, objective(pts, a, k));
        std::size_t i = 0;
        while (i < n && ++a[i] == k) a[i++] = 0;
        if (i == n) break;
    }
    return best;
}

std::size_t scan_nearest(const Vector& v, const std::vector<Vector>& cs) {
    std::size_t best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < cs.size(); ++c) {
        double s = 0.0;
        for (std::size_t j = 0; j < v.size(); ++j) s += (v[j] - cs[c][j]) * (v[j] - cs[c][j]);
        if (s < bd) {
            bd = s;
            best = c;
        }
    }
    return best;
}

audio::AudioFrameFeatures frame_with_mfcc0(double v) {
    audio::AudioFrameFeatures f;
    f.mfcc[0] = v;
    return f;
}

Vector audio_centroid(double v) {
    Vector c(audio::kFeatureDim, 0.0);
    c[0] = v;
    return c;
}

descriptors::LocalDescriptor desc_at(double v) {
    descriptors::LocalDescriptor d;
    d.vector.fill(0.0);
    d.vector[0] = v;
    return d;
}

Codebook visual_book(std::size_t k) {
    std::vector<Vector> cs;
    for (std::size_t c = 0; c < k; ++c) {
        Vector v(descriptors::kDescriptorDim, 0.0);
        v[0] = static_cast<double>(c);
        cs.push_back(v);
    }
    return {Modality::visual, cs};
}

}  // namespace

TEST_CASE("k-means with k equal to the point count") {
    std::mt19937_64 rng(3);
    const auto pts = random_points(rng, 6, 3);
    const auto r = kmeans(pts, 6, 1, 50);
    CHECK(r.objective_history.back() == 0.0);
    std::set<Vector> a(pts.begin(), pts.end()), b(r.centroids.begin(), r.centroids.end());
    CHECK(a == b);
    CHECK_THROWS_AS(kmeans(pts, 7, 1, 50), InvalidInput);
}

TEST_CASE("two separated pairs") {
    const std::vector<Vector> pts{{0, 0}, {0, 1}, {10, 10}, {10, 11}};
    const auto r = kmeans(pts, 2, 5, 50);
    std::set<Vector> got(r.centroids.begin(), r.centroids.end());
    CHECK(got == std::set<Vector>{{0, 0.5}, {10, 10.5}});
    CHECK(r.objective_history.back() == doctest::Approx(brute_force_optimum(pts, 2)));
    CHECK(r.converged);
}

TEST_CASE("k-means reaches a Lloyd fixed point with non-increasing objective") {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = static_cast<std::size_t>(testsupport::uniform_int(rng, 3, 8));
        const std::size_t k = static_cast<std::size_t>(testsupport::uniform_int(rng, 1, 3));
        const auto pts = random_points(rng, n, 2);
        const auto r = kmeans(pts, k, rng(), 100);
        REQUIRE(r.converged);
        for (std::size_t i = 1; i < r.objective_history.size(); ++i)
            CHECK(r.objective_history[i] <= r.objective_history[i - 1] + 1e-12);
        for (std::size_t i = 0; i < n; ++i) CHECK(r.assignment[i] == scan_nearest(pts[i], r.centroids));
        for (std::size_t c = 0; c < k; ++c) {
            Vector mean(2, 0.0);
            std::size_t cnt = 0;
            for (std::size_t i = 0; i < n; ++i)
                if (r.assignment[i] == c) {
                    ++cnt;
                    mean[0] += pts[i][0];
                    mean[1] += pts[i][1];
                }
            REQUIRE(cnt > 0);
            CHECK(r.centroids[c][0] == doctest::Approx(mean[0] / cnt));
            CHECK(r.centroids[c][1] == doctest::Approx(mean[1] / cnt));
        }
        CHECK(r.objective_history.back() >= brute_force_optimum(pts, k) - 1e-9);
    }
}

TEST_CASE("k-means is deterministic per seed") {
    std::mt19937_64 rng(5);
    const auto pts = random_points(rng, 300, 8);
    const auto a = kmeans(pts, 12, 42, 100), b = kmeans(pts, 12, 42, 100);
    CHECK(a.centroids == b.centroids);
    CHECK(a.assignment == b.assignment);

    // Duplicated points still give k distinct clusters.
    std::vector<Vector> dup(20, Vector{1.0, 1.0});
    dup.push_back({5.0, 5.0});
    dup.push_back({9.0, 1.0});
    const auto d = kmeans(dup, 3, 7, 50);
    CHECK(std::set<std::size_t>(d.assignment.begin(), d.assignment.end()).size() == 3);
}

TEST_CASE("quantization") {
    std::mt19937_64 rng(13);
    const auto cs = random_points(rng, 10, 5);
    const Codebook cb(Modality::audio, cs);
    CHECK(quantize(cs[3], cb) == 3);
    for (int q = 0; q < 100; ++q) {
        const auto v = random_points(rng, 1, 5)[0];
        CHECK(quantize(v, cb) == scan_nearest(v, cs));
    }

    std::vector<Vector> tie(5, Vector{100.0, 100.0});
    tie[1] = {1.0, 0.0};
    tie[4] = {-1.0, 0.0};
    CHECK(quantize(Vector{0.0, 0.0}, Codebook(Modality::audio, tie)) == 1);
    CHECK_THROWS_AS(quantize(Vector{0.0}, cb), InvalidInput);
    CHECK_THROWS_AS(Codebook(Modality::audio, {}), InvalidInput);
}

TEST_CASE("audio envelope histograms") {
    std::vector<Vector> cs;
    for (int c = 0; c < 4; ++c) cs.push_back(audio_centroid(c));
    const Codebook cb(Modality::audio, cs);

    std::vector<audio::AudioFrameFeatures> zeros(10, frame_with_mfcc0(0.0));
    const auto h0 = audio_ee_histogram(zeros, {0, 10, 0}, cb);
    CHECK(h0.bins == std::vector<double>{1.0, 0.0, 0.0, 0.0});

    const std::vector<audio::AudioFrameFeatures> votes{frame_with_mfcc0(9), frame_with_mfcc0(0), frame_with_mfcc0(0),
                                                       frame_with_mfcc0(1), frame_with_mfcc0(2)};
    const auto h = audio_ee_histogram(votes, {1, 5, 0}, cb);
    CHECK(h.bins == std::vector<double>{0.5, 0.25, 0.25, 0.0});
    CHECK_FALSE(h.empty);
    CHECK_THROWS_AS(audio_ee_histogram(votes, {3, 3, 0}, cb), InvalidInput);
    CHECK_THROWS_AS(audio_ee_histogram(votes, {0, 6, 0}, cb), InvalidInput);

    std::mt19937_64 rng(7);
    std::vector<audio::AudioFrameFeatures> random(200);
    for (auto& f : random) f.mfcc[0] = testsupport::uniform(rng, -1, 5);
    for (int t = 0; t < 100; ++t) {
        const std::size_t s = static_cast<std::size_t>(testsupport::uniform_int(rng, 0, 150));
        const std::size_t e = s + static_cast<std::size_t>(testsupport::uniform_int(rng, 1, 49));
        const auto hr = audio_ee_histogram(random, {s, e, 0}, cb);
        double sum = 0.0;
        for (double b : hr.bins) {
            CHECK(b >= 0.0);
            CHECK(b <= 1.0);
            sum += b;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("visual histograms and fusion") {
    const auto cb = visual_book(6);
    const auto none = visual_histogram({}, cb);
    CHECK(none.empty);
    CHECK(none.bins == std::vector<double>(6, 0.0));

    const std::vector<descriptors::LocalDescriptor> one{desc_at(4.1)};
    CHECK(visual_histogram(one, cb).bins == std::vector<double>{0, 0, 0, 0, 1, 0});

    std::vector<descriptors::LocalDescriptor> ten;
    for (int i = 0; i < 3; ++i) ten.push_back(desc_at(2.0));
    for (int i = 0; i < 7; ++i) ten.push_back(desc_at(5.2));
    const auto h = visual_histogram(ten, cb);
    CHECK(h.bins[2] == doctest::Approx(0.3));
    CHECK(h.bins[5] == doctest::Approx(0.7));

    CHECK(fuse({{0.5, 0.5}, false}, {{1.0, 0.0}, false}) == std::vector<double>{0.5, 0.5, 1.0, 0.0});
    CHECK(fuse({{0.5, 0.5}, false}, {{0.0, 0.0, 0.0}, true}) == std::vector<double>{0.5, 0.5, 0.0, 0.0, 0.0});

    std::mt19937_64 rng(2);
    std::set<std::vector<double>> seen;
    for (int i = 0; i < 200; ++i) {
        SemanticHistogram a{{testsupport::uniform(rng, 0, 1), testsupport::uniform(rng, 0, 1)}, false};
        SemanticHistogram b{{testsupport::uniform(rng, 0, 1), testsupport::uniform(rng, 0, 1), 0.0}, false};
        const auto f = fuse(a, b);
        CHECK(f.size() == 5);
        CHECK(seen.insert(f).second);
    }
}

TEST_CASE("codebook file round trip") {
    std::mt19937_64 rng(19);
    const auto cs = random_points(rng, 16, audio::kFeatureDim, -50, 50);
    const Codebook cb(Modality::audio, cs);
    std::stringstream io;
    write_codebook(io, cb);
    const auto header = io.str().substr(0, io.str().find('\n'));
    CHECK(header == "PERISAL-CBK 1 audio 16 36");
    const auto back = read_codebook(io);
    CHECK(back.modality() == Modality::audio);
    CHECK(back.centroids() == cs);
    for (int q = 0; q < 500; ++q) {
        const auto v = random_points(rng, 1, audio::kFeatureDim, -50, 50)[0];
        CHECK(quantize(v, back) == quantize(v, cb));
    }

    std::istringstream bad_magic("PERISAL-XXX 1 audio 1 36\n");
    CHECK_THROWS_AS(read_codebook(bad_magic), FormatError);
    std::istringstream bad_version("PERISAL-CBK 2 audio 1 36\n");
    CHECK_THROWS_AS(read_codebook(bad_version), FormatError);
    std::istringstream bad_dim("PERISAL-CBK 1 visual 1 36\n");
    CHECK_THROWS_AS(read_codebook(bad_dim), FormatError);
    std::stringstream full;
    write_codebook(full, cb);
    const std::string text = full.str();
    std::istringstream truncated(text.substr(0, text.size() / 2));
    CHECK_THROWS_AS(read_codebook(truncated), FormatError);
    std::istringstream trailing(text + "1.0\n");
    CHECK_THROWS_AS(read_codebook(trailing), FormatError);

    const auto dir = testsupport::scratch_dir("codebook");
    std::ofstream(dir / "broken.cbk") << "garbage\n";
    try {
        load_codebook(dir / "broken.cbk");
        FAIL("expected a load error");
    } catch (const FormatError& e) {
        CHECK(std::string(e.what()).find("broken.cbk") != std::string::npos);
    }
    save_codebook(dir / "ok.cbk", cb);
    CHECK(load_codebook(dir / "ok.cbk").centroids() == cs);
}

TEST_CASE("modality names") {
    CHECK(to_string(Modality::audio) == "audio");
    CHECK(modality_from_string("visual") == Modality::visual);
    CHECK(modality_dimension(Modality::audio) == 36);
    CHECK(modality_dimension(Modality::visual) == 64);
    CHECK_THROWS_AS(modality_from_string("smell"), FormatError);
    std::mt19937_64 rng(1);
    CHECK_THROWS_AS(train_codebook(Modality::visual, random_points(rng, 10, 36), 2, 1, 10), InvalidInput);
    CHECK(train_codebook(Modality::audio, random_points(rng, 10, 36), 2, 1, 10).k() == 2);
}
