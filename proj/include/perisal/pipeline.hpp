#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "perisal/audio_features.hpp"
#include "perisal/classifier.hpp"
#include "perisal/codebook.hpp"
#include "perisal/config.hpp"
#include "perisal/decision.hpp"
#include "perisal/descriptors.hpp"
#include "perisal/envelope.hpp"
#include "perisal/manifest.hpp"
#include "perisal/roi.hpp"

namespace perisal::pipeline {

/// Result of the visual front end on one keyframe.
struct KeyframeVisual {
    std::vector<descriptors::LocalDescriptor> descriptors;
    descriptors::GlobalColorMoments color_moments{};
    std::size_t roi_pixels = 0;
};

/// Masks produced while computing a keyframe's ROI, kept for inspection.
struct RoiBreakdown {
    RgbImage image;  // preprocessed
    BinaryMask salient;
    BinaryMask skin;
    BinaryMask face;
    BinaryMask roi;
};

/// Preprocess, saliency + block contrast, skin, face, hybrid ROI.
RoiBreakdown compute_roi(const RgbImage& frame, const PipelineConfig& cfg, const roi::CascadeModel* cascade);

KeyframeVisual analyze_keyframe(const RgbImage& frame, const PipelineConfig& cfg, const roi::CascadeModel* cascade);

struct DecisionUnit {
    envelope::EnergyEnvelope ee;
    std::size_t keyframe = 0;
    bool keyframe_clamped = false;
};

/// Audio features, envelopes and their keyframes for one video.
struct AudioAnalysis {
    std::vector<audio::AudioFrameFeatures> features;
    std::vector<DecisionUnit> units;
};

AudioAnalysis analyze_audio(const audio::AudioSignal& signal, const PipelineConfig& cfg, double fps,
                            std::size_t video_frame_count);

struct VideoAnalysis {
    AudioAnalysis audio;
    std::vector<std::size_t> keyframes;     // distinct keyframe indices, ascending
    std::vector<KeyframeVisual> visuals;    // parallel to `keyframes`
    std::vector<std::size_t> unit_visual;   // unit -> position in `visuals`

    const KeyframeVisual& visual_of(std::size_t unit) const { return visuals[unit_visual[unit]]; }
};

/// Full front end over one video's WAV and frame directory.
VideoAnalysis analyze_video(const std::filesystem::path& audio_path, const std::filesystem::path& frames_dir,
                            double fps, const PipelineConfig& cfg, const roi::CascadeModel* cascade);

struct ModelBundle {
    static constexpr int kFormatVersion = 1;

    codebook::Codebook audio_codebook;
    codebook::Codebook visual_codebook;
    classify::MarginClassifier multimodal;
    classify::MarginClassifier global;
    PipelineConfig config;

    /// Throws FormatError when the parts disagree on dimensions.
    void validate() const;
};

/// Global features fed to the global classifier: color moments scaled by 1/255.
std::vector<double> global_feature(const descriptors::GlobalColorMoments& m);

std::vector<double> fused_vector(const ModelBundle& bundle, const AudioAnalysis& audio, std::size_t unit,
                                 const KeyframeVisual& visual);

struct CodebookPair {
    codebook::Codebook audio;
    codebook::Codebook visual;
};

/// Trains both codebooks from already analysed videos.
CodebookPair train_codebooks(const DatasetManifest& dataset, const std::vector<VideoAnalysis>& analyses,
                             const PipelineConfig& cfg);

/// Analyses every entry (videos in parallel, results in manifest order).
std::vector<VideoAnalysis> analyze_dataset(const DatasetManifest& dataset, const PipelineConfig& cfg);

ModelBundle train_pipeline(const DatasetManifest& dataset, const PipelineConfig& cfg);

struct ReportRow {
    std::size_t ee_id = 0;
    double start_s = 0.0;
    double end_s = 0.0;
    double multimodal_score = 0.0;
    double global_score = 0.0;
    double fused_score = 0.0;
    int label = -1;
};

struct Classification {
    classify::VideoVerdict verdict;
    std::vector<ReportRow> rows;
};

Classification classify_analysis(const ModelBundle& bundle, const VideoAnalysis& analysis);

/// Throws PipelineError when the audio yields no decision units.
Classification classify_video(const ModelBundle& bundle, const std::filesystem::path& audio_path,
                              const std::filesystem::path& frames_dir, double fps);

/// CSV `ee_id,start_s,end_s,multimodal_score,global_score,fused_score,label`.
void write_report_csv(std::ostream& out, const std::vector<ReportRow>& rows);

struct VideoEvaluation {
    std::string video_id;
    bool positive = false;
    double max_fused_score = 0.0;
    bool flag = false;
};

struct Evaluation {
    classify::RocCurve roc;
    std::vector<VideoEvaluation> videos;
    double tpr = 0.0;  // at the configured (thr, n)
    double fpr = 0.0;
};

/// Video-level ROC over the maximum fused EE score, plus the operating point
/// of the periodic decision. Unlabeled entries are ignored.
Evaluation evaluate(const ModelBundle& bundle, const DatasetManifest& dataset);

void save_bundle(const ModelBundle& bundle, const std::filesystem::path& dir);
ModelBundle load_bundle(const std::filesystem::path& dir);

/// Loads the configured cascade, or nullopt when face masking is off.
std::optional<roi::CascadeModel> load_configured_cascade(const PipelineConfig& cfg);

}  // namespace perisal::pipeline
