#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "perisal/envelope.hpp"
#include "perisal/error.hpp"
#include "support.hpp"

using namespace perisal;
using namespace perisal::envelope;

namespace {

// Boundary rule evaluated position by position: b closes a peak run when
// p[b] >= cutoff, the run [a, b] of equal values has a strictly lower left
// neighbour and a strictly lower (or missing) right neighbour, and b is at
// least min_len past the previous boundary.
std::vector<std::size_t> oracle_boundaries(const std::vector<double>& p, double cutoff, std::size_t min_len) {
    std::vector<std::size_t> out;
    std::size_t last = 0;
    for (std::size_t b = 0; b < p.size(); ++b) {
        if (b + 1 < p.size() && p[b + 1] == p[b]) continue;  // not the end of a run
        std::size_t a = b;
        while (a > 0 && p[a - 1] == p[b]) --a;
        if (a == 0) continue;
        const bool peak = p[a - 1] < p[b] && (b + 1 == p.size() || p[b + 1] < p[b]);
        if (peak && p[b] >= cutoff && b - last >= min_len) {
            out.push_back(b);
            last = b;
        }
    }
    return out;
}

void check_partition(const std::vector<EnergyEnvelope>& ees, std::size_t m) {
    if (m == 0) {
        CHECK(ees.empty());
        return;
    }
    REQUIRE(!ees.empty());
    CHECK(ees.front().start_frame == 0);
    CHECK(ees.back().end_frame == m);
    for (std::size_t k = 0; k < ees.size(); ++k) {
        CHECK(ees[k].id == k);
        CHECK(ees[k].length() > 0);
        if (k > 0) CHECK(ees[k].start_frame == ees[k - 1].end_frame);
    }
}

std::vector<double> sinusoid_energy(std::size_t n, double period) {
    std::vector<double> e(n);
    for (std::size_t i = 0; i < n; ++i) e[i] = 1.0 + std::sin(2.0 * std::numbers::pi * i / period);
    return e;
}

}  // namespace

TEST_CASE("detection function") {
    CHECK(detection_function(std::vector<double>{1, 1, 1, 1}, 2).values == std::vector<double>{1, 1});
    CHECK(detection_function(std::vector<double>{1, 2, 4}, 1).values == std::vector<double>{2, 2});
    CHECK(detection_function(std::vector<double>{4, 2, 1}, 2).values == std::vector<double>{0.5});
    CHECK_THROWS_AS(detection_function(std::vector<double>{1, 2}, 2), InvalidInput);
    CHECK_THROWS_AS(detection_function(std::vector<double>{1, 2, 3}, 0), InvalidInput);

    // Zero energy is floored rather than dividing by zero.
    const auto d = detection_function(std::vector<double>{0, 1}, 1);
    CHECK(std::isfinite(d.values[0]));
    CHECK(d.values[0] > 1e6);
}

TEST_CASE("detection function is scale invariant") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> e(60);
        for (double& v : e) v = testsupport::uniform(rng, 0.01, 5.0);
        const auto base = detection_function(e, 3);
        for (double alpha : {1e-3, 0.5, 7.0, 1e4}) {
            std::vector<double> s(e);
            for (double& v : s) v *= alpha;
            const auto scaled = detection_function(s, 3);
            REQUIRE(scaled.values.size() == base.values.size());
            for (std::size_t i = 0; i < base.values.size(); ++i)
                CHECK(scaled.values[i] == doctest::Approx(base.values[i]).epsilon(1e-9));
        }
    }
}

TEST_CASE("soft threshold") {
    DetectionSeries d{{1.2, 3.0, 2.1, 0.5, 9.0}, 3};
    const auto p = soft_threshold(d, 1.2, 3.0);
    CHECK(p.values[0] == 0.0);
    CHECK(p.values[1] == 1.0);
    CHECK(p.values[2] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(p.values[3] == 0.0);
    CHECK(p.values[4] == 1.0);

    const auto mid = soft_threshold(DetectionSeries{{2.5}, 1}, 2.0, 3.0);
    CHECK(mid.values[0] == 0.5);
    CHECK_THROWS_AS(soft_threshold(d, 3.0, 3.0), ConfigError);

    std::mt19937_64 rng(2);
    std::vector<double> sorted(500);
    for (double& v : sorted) v = testsupport::uniform(rng, 0.0, 5.0);
    std::sort(sorted.begin(), sorted.end());
    const auto ps = soft_threshold(DetectionSeries{sorted, 3}, 1.2, 3.0);
    for (std::size_t i = 0; i < ps.values.size(); ++i) {
        CHECK(ps.values[i] >= 0.0);
        CHECK(ps.values[i] <= 1.0);
        if (i > 0) CHECK(ps.values[i] >= ps.values[i - 1]);
    }
}

TEST_CASE("envelope boundaries") {
    SoftThresholdSeries zero{std::vector<double>(20, 0.0)};
    const auto one = segment_envelopes(zero, 20, 0.5, 2);
    REQUIRE(one.size() == 1);
    CHECK(one[0] == EnergyEnvelope{0, 20, 0});

    SoftThresholdSeries spike{std::vector<double>(20, 0.0)};
    spike.values[10] = 1.0;
    const auto two = segment_envelopes(spike, 20, 0.5, 2);
    REQUIRE(two.size() == 2);
    CHECK(two[0] == EnergyEnvelope{0, 10, 0});
    CHECK(two[1] == EnergyEnvelope{10, 20, 1});

    SoftThresholdSeries close = spike;
    close.values[12] = 1.0;
    const auto suppressed = segment_envelopes(close, 20, 0.5, 5);
    REQUIRE(suppressed.size() == 2);
    CHECK(suppressed[1].start_frame == 10);

    // A saturated plateau yields one boundary at its last index.
    SoftThresholdSeries plateau{std::vector<double>(20, 0.0)};
    for (int i = 7; i <= 9; ++i) plateau.values[i] = 1.0;
    const auto flat = segment_envelopes(plateau, 20, 0.5, 2);
    REQUIRE(flat.size() == 2);
    CHECK(flat[0].end_frame == 9);

    // Peaks below the cutoff never open an envelope.
    SoftThresholdSeries low{std::vector<double>(20, 0.0)};
    low.values[10] = 0.4;
    CHECK(segment_envelopes(low, 20, 0.5, 2).size() == 1);
}

TEST_CASE("boundary picking matches the rule oracle") {
    std::mt19937_64 rng(99);
    const double levels[] = {0.0, 0.2, 0.5, 0.7, 1.0};
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = static_cast<std::size_t>(testsupport::uniform_int(rng, 1, 80));
        std::vector<double> p(n);
        for (double& v : p) v = levels[testsupport::uniform_int(rng, 0, 4)];
        const double cutoff = levels[testsupport::uniform_int(rng, 1, 4)];
        const std::size_t min_len = static_cast<std::size_t>(testsupport::uniform_int(rng, 1, 8));
        const std::size_t m = n + 3;
        const auto ees = segment_envelopes(SoftThresholdSeries{p}, m, cutoff, min_len);
        const auto expect = oracle_boundaries(p, cutoff, min_len);
        REQUIRE(ees.size() == expect.size() + 1);
        for (std::size_t k = 0; k < expect.size(); ++k) CHECK(ees[k].end_frame == expect[k]);
        check_partition(ees, m);
    }
}

TEST_CASE("period estimation") {
    const auto p16 = estimate_period(sinusoid_energy(128, 16));
    CHECK(p16.period_frames == 16);
    CHECK(p16.confidence > 0.5);
    CHECK(estimate_period(std::vector<double>(64, 3.0)).confidence == 0.0);
    CHECK_THROWS_AS(estimate_period(std::vector<double>{1, 2, 3}), InvalidInput);

    std::mt19937_64 rng(4);
    std::vector<double> e(200);
    for (std::size_t i = 0; i < e.size(); ++i)
        e[i] = 2.0 + std::sin(2.0 * std::numbers::pi * i / 23.0) + testsupport::uniform(rng, -0.3, 0.3);
    const auto base = estimate_period(e);
    for (auto [a, b] : {std::pair{3.0, 1.0}, std::pair{0.01, 50.0}}) {
        std::vector<double> t(e);
        for (double& v : t) v = a * v + b;
        const auto est = estimate_period(t);
        CHECK(est.period_frames == base.period_frames);
        CHECK(est.confidence == doctest::Approx(base.confidence).epsilon(1e-9));
    }
}

TEST_CASE("period recovery across periods") {
    for (double t0 : {8.0, 16.0, 40.0}) {
        const auto est = estimate_period(sinusoid_energy(static_cast<std::size_t>(10 * t0), t0));
        CHECK(std::abs(static_cast<double>(est.period_frames) - t0) <= 0.1 * t0);
    }
}

TEST_CASE("long envelope splitting") {
    const EnergyEnvelope short_ee{0, 50, 4};
    CHECK(split_long_envelope(short_ee, {30, 0.9}, 100) == std::vector<EnergyEnvelope>{short_ee});

    const auto periodic = split_long_envelope({0, 100, 0}, {30, 0.9}, 60);
    REQUIRE(periodic.size() == 4);
    CHECK(periodic[0].length() == 30);
    CHECK(periodic[1].length() == 30);
    CHECK(periodic[2].length() == 30);
    CHECK(periodic[3].length() == 10);

    const auto fallback = split_long_envelope({0, 100, 0}, {120, 0.9}, 60);
    REQUIRE(fallback.size() == 2);
    CHECK(fallback[0].length() == 60);
    CHECK(fallback[1].length() == 40);

    const auto unreliable = split_long_envelope({0, 100, 0}, {30, 0.05}, 60);
    REQUIRE(unreliable.size() == 2);
    CHECK(unreliable[0].length() == 60);

    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t s = static_cast<std::size_t>(testsupport::uniform_int(rng, 0, 50));
        const std::size_t len = static_cast<std::size_t>(testsupport::uniform_int(rng, 1, 400));
        const PeriodEstimate period{static_cast<std::size_t>(testsupport::uniform_int(rng, 1, 200)),
                                    testsupport::uniform(rng, 0.0, 1.0)};
        const auto parts = split_long_envelope({s, s + len, 0}, period, static_cast<std::size_t>(testsupport::uniform_int(rng, 2, 200)));
        REQUIRE(!parts.empty());
        CHECK(parts.front().start_frame == s);
        CHECK(parts.back().end_frame == s + len);
        for (std::size_t k = 0; k < parts.size(); ++k) {
            CHECK(parts[k].length() > 0);
            if (k > 0) CHECK(parts[k].start_frame == parts[k - 1].end_frame);
        }
    }
}

TEST_CASE("whole-signal segmentation partitions the frames") {
    std::mt19937_64 rng(1234);
    SegmentationConfig cfg;
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t m = static_cast<std::size_t>(testsupport::uniform_int(rng, 0, 600));
        std::vector<double> e(m);
        for (double& v : e) v = testsupport::uniform(rng, 0.0, 1.0) < 0.1 ? testsupport::uniform(rng, 1, 10) : testsupport::uniform(rng, 0, 0.2);
        const auto ees = segment_signal(e, cfg);
        check_partition(ees, m);
        for (const auto& ee : ees) CHECK(ee.length() > 0);
    }
    CHECK(segment_signal(std::vector<double>{1.0, 2.0}, cfg).size() == 1);
}

TEST_CASE("periodic bursts segment at their onsets") {
    // Bursts of 10 frames every 25 frames over a faint floor.
    std::vector<double> e(300, 1e-4);
    for (std::size_t i = 0; i < e.size(); ++i)
        if (i % 25 >= 5 && i % 25 < 15) e[i] = 0.1;
    const auto ees = segment_signal(e, SegmentationConfig{});
    REQUIRE(ees.size() == 12);
    for (std::size_t k = 1; k < ees.size(); ++k) CHECK(ees[k].start_frame % 25 == 4);
}

TEST_CASE("keyframe alignment") {
    CHECK(align_keyframe({0, 50, 0}, 20.0, 25.0).frame_index == 12);
    CHECK(align_keyframe({0, 1, 0}, 20.0, 25.0).frame_index == 0);
    for (std::size_t s : {0u, 13u, 40u, 122u}) {
        const EnergyEnvelope ee{s, s + 17, 0};
        const auto a = static_cast<long>(align_keyframe(ee, 20.0, 12.5).frame_index);
        const auto b = static_cast<long>(align_keyframe(ee, 20.0, 25.0).frame_index);
        CHECK(std::abs(b - 2 * a) <= 1);
    }
    const auto clamped = align_keyframe({400, 500, 0}, 20.0, 25.0, 100);
    CHECK(clamped.clamped);
    CHECK(clamped.frame_index == 99);
    CHECK_FALSE(align_keyframe({0, 50, 0}, 20.0, 25.0, 100).clamped);
}

TEST_CASE("segment CSV") {
    std::ostringstream out;
    const std::vector<EnergyEnvelope> ees{{0, 10, 0}, {10, 30, 1}};
    const std::vector<std::size_t> keys{2, 5};
    write_segment_csv(out, ees, keys);
    CHECK(out.str() == "ee_id,start_frame,end_frame,keyframe_index\n0,0,10,2\n1,10,30,5\n");
}
