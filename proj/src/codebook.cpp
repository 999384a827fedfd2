#include "perisal/codebook.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "perisal/error.hpp"

namespace perisal::codebook {

namespace {

// Portable uniform draw in [0, 1) from the raw 64-bit engine output.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::vector<Vector> kmeanspp_seed(std::span<const Vector> points, std::size_t k, std::mt19937_64& rng) {
    const std::size_t n = points.size();
    std::vector<Vector> centers;
    std::vector<std::uint8_t> chosen(n, 0);
    std::size_t first = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n));
    first = std::min(first, n - 1);
    centers.push_back(points[first]);
    chosen[first] = 1;

    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(points[i], centers.back());
    while (centers.size() < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) total += chosen[i] ? 0.0 : d2[i];
        std::size_t pick = n;
        if (total > 0.0) {
            const double target = uniform01(rng) * total;
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (chosen[i] || d2[i] <= 0.0) continue;
                acc += d2[i];
                pick = i;
                if (acc > target) break;
            }
        }
        if (pick == n)  // every remaining point coincides with a centre
            pick = static_cast<std::size_t>(std::find(chosen.begin(), chosen.end(), 0) - chosen.begin());
        chosen[pick] = 1;
        centers.push_back(points[pick]);
        for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], squared_distance(points[i], centers.back()));
    }
    return centers;
}

}  // namespace

std::string to_string(Modality m) { return m == Modality::audio ? "audio" : "visual"; }

Modality modality_from_string(const std::string& s) {
    if (s == "audio") return Modality::audio;
    if (s == "visual") return Modality::visual;
    throw FormatError("unknown codebook modality: " + s);
}

std::size_t modality_dimension(Modality m) {
    return m == Modality::audio ? audio::kFeatureDim : descriptors::kDescriptorDim;
}

Codebook::Codebook(Modality modality, std::vector<Vector> centroids)
    : modality_(modality), centroids_(std::move(centroids)) {
    if (centroids_.empty()) throw InvalidInput("codebook needs at least one centroid");
    const std::size_t d = centroids_.front().size();
    for (const auto& c : centroids_) {
        if (c.size() != d) throw InvalidInput("codebook centroids differ in dimension");
        for (double v : c)
            if (!std::isfinite(v)) throw InvalidInput("codebook centroid is not finite");
    }
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

std::size_t nearest(std::span<const double> v, const std::vector<Vector>& centroids) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centroids.size(); ++c) {
        const double d = squared_distance(v, centroids[c]);
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    return best;
}

KMeansResult kmeans(std::span<const Vector> points, std::size_t k, std::uint64_t seed, std::size_t max_iter) {
    if (k < 1) throw InvalidInput("k must be >= 1");
    if (points.size() < k) throw InvalidInput("fewer points than clusters");
    const std::size_t d = points.front().size();
    for (const auto& p : points)
        if (p.size() != d) throw InvalidInput("k-means points differ in dimension");

    std::mt19937_64 rng(seed);
    KMeansResult r;
    r.centroids = kmeanspp_seed(points, k, rng);
    const std::size_t n = points.size();
    r.assignment.assign(n, std::numeric_limits<std::size_t>::max());

    std::vector<std::size_t> next(n);
    for (std::size_t iter = 0; iter < std::max<std::size_t>(max_iter, 1); ++iter) {
        double objective = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            next[i] = nearest(points[i], r.centroids);
            objective += squared_distance(points[i], r.centroids[next[i]]);
        }
        r.objective_history.push_back(objective);
        r.iterations = iter + 1;
        if (next == r.assignment) {
            r.converged = true;
            break;
        }
        r.assignment = next;

        // Update, repairing empty clusters one at a time.
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) ++counts[r.assignment[i]];
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] != 0) continue;
            std::size_t far = n;
            double far_d = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (counts[r.assignment[i]] < 2) continue;
                const double dd = squared_distance(points[i], r.centroids[r.assignment[i]]);
                if (dd > far_d) {
                    far_d = dd;
                    far = i;
                }
            }
            if (far == n) break;
            --counts[r.assignment[far]];
            r.assignment[far] = c;
            counts[c] = 1;
        }
        std::vector<Vector> sums(k, Vector(d, 0.0));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < d; ++j) sums[r.assignment[i]][j] += points[i][j];
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) continue;
            for (std::size_t j = 0; j < d; ++j) r.centroids[c][j] = sums[c][j] / static_cast<double>(counts[c]);
        }
    }
    return r;
}

Codebook train_codebook(Modality modality, std::span<const Vector> points, std::size_t k, std::uint64_t seed,
                        std::size_t max_iter) {
    if (!points.empty() && points.front().size() != modality_dimension(modality))
        throw InvalidInput("training vectors do not match the modality dimension");
    return Codebook(modality, kmeans(points, k, seed, max_iter).centroids);
}

std::size_t quantize(std::span<const double> v, const Codebook& cb) {
    if (v.size() != cb.dimension()) throw InvalidInput("vector dimension does not match codebook");
    return nearest(v, cb.centroids());
}

SemanticHistogram audio_ee_histogram(std::span<const audio::AudioFrameFeatures> frames,
                                     const envelope::EnergyEnvelope& ee, const Codebook& cb) {
    if (ee.end_frame <= ee.start_frame) throw InvalidInput("empty energy envelope");
    if (ee.end_frame > frames.size()) throw InvalidInput("energy envelope exceeds the frame range");
    SemanticHistogram h{std::vector<double>(cb.k(), 0.0), false};
    for (std::size_t f = ee.start_frame; f < ee.end_frame; ++f) {
        const auto v = frames[f].to_vector();
        h.bins[quantize(v, cb)] += 1.0;
    }
    const auto len = static_cast<double>(ee.length());
    for (double& b : h.bins) b /= len;
    return h;
}

SemanticHistogram visual_histogram(std::span<const descriptors::LocalDescriptor> descs, const Codebook& cb) {
    SemanticHistogram h{std::vector<double>(cb.k(), 0.0), descs.empty()};
    if (descs.empty()) return h;
    for (const auto& d : descs) h.bins[quantize(d.vector, cb)] += 1.0;
    for (double& b : h.bins) b /= static_cast<double>(descs.size());
    return h;
}

std::vector<double> fuse(const SemanticHistogram& audio_h, const SemanticHistogram& visual_h) {
    std::vector<double> out;
    out.reserve(audio_h.bins.size() + visual_h.bins.size());
    out.insert(out.end(), audio_h.bins.begin(), audio_h.bins.end());
    out.insert(out.end(), visual_h.bins.begin(), visual_h.bins.end());
    return out;
}

void write_codebook(std::ostream& out, const Codebook& cb) {
    out << "PERISAL-CBK 1 " << to_string(cb.modality()) << ' ' << cb.k() << ' ' << cb.dimension() << '\n';
    char buf[40];
    for (const auto& c : cb.centroids()) {
        for (std::size_t j = 0; j < c.size(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", c[j]);
            if (j) out << ' ';
            out << buf;
        }
        out << '\n';
    }
}

Codebook read_codebook(std::istream& in) {
    std::string header;
    if (!std::getline(in, header)) throw FormatError("empty codebook file");
    std::istringstream hs(header);
    std::string magic, modality;
    int version = 0;
    long long k = 0, d = 0;
    if (!(hs >> magic >> version >> modality >> k >> d) || magic != "PERISAL-CBK")
        throw FormatError("bad codebook header");
    if (version != 1) throw FormatError("unsupported codebook version " + std::to_string(version));
    const Modality m = modality_from_string(modality);
    if (k <= 0 || d <= 0) throw FormatError("bad codebook dimensions");
    if (static_cast<std::size_t>(d) != modality_dimension(m)) throw FormatError("codebook dimension does not match modality");
    std::vector<Vector> centroids(static_cast<std::size_t>(k), Vector(static_cast<std::size_t>(d)));
    for (auto& c : centroids)
        for (double& v : c) {
            std::string tok;
            if (!(in >> tok)) throw FormatError("truncated codebook data");
            char* end = nullptr;
            v = std::strtod(tok.c_str(), &end);
            if (*end != '\0' || !std::isfinite(v)) throw FormatError("bad codebook value: " + tok);
        }
    std::string extra;
    if (in >> extra) throw FormatError("trailing data in codebook");
    return Codebook(m, std::move(centroids));
}

void save_codebook(const std::filesystem::path& path, const Codebook& cb) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write codebook: " + path.string());
    write_codebook(out, cb);
}

Codebook load_codebook(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open codebook: " + path.string());
    try {
        return read_codebook(in);
    } catch (const Error& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

}  // namespace perisal::codebook
