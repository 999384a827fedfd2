#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "perisal/audio_features.hpp"
#include "perisal/descriptors.hpp"
#include "perisal/envelope.hpp"

namespace perisal::codebook {

enum class Modality { audio, visual };

std::string to_string(Modality m);
Modality modality_from_string(const std::string& s);
std::size_t modality_dimension(Modality m);

using Vector = std::vector<double>;

class Codebook {
public:
    Codebook() = default;
    Codebook(Modality modality, std::vector<Vector> centroids);

    Modality modality() const noexcept { return modality_; }
    std::size_t k() const noexcept { return centroids_.size(); }
    std::size_t dimension() const noexcept { return centroids_.empty() ? 0 : centroids_.front().size(); }
    const std::vector<Vector>& centroids() const noexcept { return centroids_; }

private:
    Modality modality_ = Modality::audio;
    std::vector<Vector> centroids_;
};

struct KMeansResult {
    std::vector<Vector> centroids;
    std::vector<std::size_t> assignment;
    std::vector<double> objective_history;  // after each assignment pass
    std::size_t iterations = 0;
    bool converged = false;
};

/// Lloyd iterations from seeded k-means++ initialization. A cluster that
/// goes empty takes the point farthest from its current centroid. Throws
/// InvalidInput when there are fewer points than k or dimensions disagree.
KMeansResult kmeans(std::span<const Vector> points, std::size_t k, std::uint64_t seed, std::size_t max_iter);

Codebook train_codebook(Modality modality, std::span<const Vector> points, std::size_t k, std::uint64_t seed,
                        std::size_t max_iter);

double squared_distance(std::span<const double> a, std::span<const double> b);

/// Nearest centroid; ties go to the lowest index.
std::size_t nearest(std::span<const double> v, const std::vector<Vector>& centroids);

/// Throws InvalidInput on a dimension mismatch.
std::size_t quantize(std::span<const double> v, const Codebook& cb);

struct SemanticHistogram {
    std::vector<double> bins;
    bool empty = false;  // no votes were cast
};

/// Votes of the EE's frames divided by the EE length.
SemanticHistogram audio_ee_histogram(std::span<const audio::AudioFrameFeatures> frames,
                                     const envelope::EnergyEnvelope& ee, const Codebook& cb);

/// Votes divided by descriptor count; zero descriptors give an all-zero,
/// flagged histogram.
SemanticHistogram visual_histogram(std::span<const descriptors::LocalDescriptor> descs, const Codebook& cb);

/// Audio bins followed by visual bins.
std::vector<double> fuse(const SemanticHistogram& audio_h, const SemanticHistogram& visual_h);

/// Text format: `PERISAL-CBK 1 <modality> <k> <d>` then one row per centroid.
void write_codebook(std::ostream& out, const Codebook& cb);
Codebook read_codebook(std::istream& in);
void save_codebook(const std::filesystem::path& path, const Codebook& cb);
Codebook load_codebook(const std::filesystem::path& path);

}  // namespace perisal::codebook
