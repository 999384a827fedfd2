#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "perisal/decision.hpp"
#include "perisal/envelope.hpp"
#include "perisal/roi.hpp"

namespace perisal::pipeline {

enum class CodebookSource { positive, all };

/// Every tunable of the pipeline. Keys in the flat text format match the
/// member names.
struct PipelineConfig {
    // audio framing and segmentation
    double frame_ms = 20.0;
    std::size_t j = 3;
    double t1 = 1.2;
    double t2 = 3.0;
    double cutoff = 0.5;
    std::size_t min_len = 5;
    std::size_t l_max = 150;
    double period_confidence = 0.2;

    // codebooks
    std::size_t k_audio = 128;
    std::size_t k_visual = 256;
    std::uint64_t seed = 42;
    std::size_t kmeans_max_iter = 100;
    CodebookSource codebook_source = CodebookSource::positive;

    // visual front end
    int block_size = 8;
    double saliency_threshold = 0.5;
    double skin_cb_min = 77.0;
    double skin_cb_max = 127.0;
    double skin_cr_min = 133.0;
    double skin_cr_max = 173.0;
    std::string cascade;  // empty disables face masking
    double face_scale_step = 1.25;
    int face_stride = 2;
    double hessian_threshold = 0.0004;
    int octaves = 3;
    std::size_t max_descriptors = 300;

    // classifiers and decision
    double c = 10.0;
    std::size_t epochs = 50;
    double thr = 0.0;
    std::size_t n = 3;
    double fusion_w = 0.5;

    /// Sets one key from its text value. Throws ConfigError for unknown keys,
    /// malformed values or values outside their range.
    void set(const std::string& key, const std::string& value);

    /// Range checks across all keys.
    void validate() const;

    envelope::SegmentationConfig segmentation() const;
    roi::SkinModelConfig skin() const;
    classify::DecisionConfig decision() const;

    static std::vector<std::string> keys();
    std::string get(const std::string& key) const;
};

/// `key = value` lines; `#` starts a comment.
void apply_config_text(PipelineConfig& cfg, std::istream& in);
PipelineConfig load_config(const std::filesystem::path& path);

/// Every key in a fixed order, one per line.
void write_config(std::ostream& out, const PipelineConfig& cfg);

}  // namespace perisal::pipeline
