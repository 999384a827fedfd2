#include "perisal/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <map>
#include <memory>
#include <ostream>
#include <thread>

#include "perisal/error.hpp"
#include "perisal/saliency.hpp"
#include "perisal/wav.hpp"

namespace perisal::pipeline {

namespace fs = std::filesystem;

namespace {

// Runs fn(i) for i in [0, n) on a small worker pool. The exception of the
// lowest failing index is rethrown so failures are reported deterministically.
template <typename Fn>
void parallel_for(std::size_t n, Fn fn) {
    const std::size_t workers = std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
    std::vector<std::exception_ptr> errors(n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) {
                    try {
                        fn(i);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

int label_sign(Label l) { return l == Label::positive ? 1 : -1; }

}  // namespace

RoiBreakdown compute_roi(const RgbImage& frame, const PipelineConfig& cfg, const roi::CascadeModel* cascade) {
    RoiBreakdown b;
    b.image = saliency::preprocess(frame);
    const int w = b.image.width(), h = b.image.height();
    const auto sal = saliency::compute_saliency(b.image);
    const auto contrast = saliency::block_contrast(b.image, cfg.block_size);
    b.salient = saliency::attention_mask(sal.saliency, contrast, w, h, cfg.saliency_threshold);
    b.skin = roi::skin_mask(b.image, cfg.skin());
    b.face = roi::face_mask(b.image, cascade, {cfg.face_scale_step, cfg.face_stride, 0});
    b.roi = roi::hybrid_roi(b.salient, b.skin, b.face);
    return b;
}

KeyframeVisual analyze_keyframe(const RgbImage& frame, const PipelineConfig& cfg, const roi::CascadeModel* cascade) {
    const RoiBreakdown b = compute_roi(frame, cfg, cascade);
    KeyframeVisual v;
    v.roi_pixels = b.roi.count();
    v.descriptors = descriptors::extract_descriptors(saliency::intensity_image(b.image), b.roi,
                                                     {cfg.octaves, cfg.hessian_threshold}, cfg.max_descriptors);
    v.color_moments = descriptors::color_moments(b.image);
    return v;
}

AudioAnalysis analyze_audio(const audio::AudioSignal& signal, const PipelineConfig& cfg, double fps,
                            std::size_t video_frame_count) {
    AudioAnalysis a;
    a.features = audio::extract_frame_features(signal, cfg.frame_ms);
    std::vector<double> energies(a.features.size());
    for (std::size_t i = 0; i < energies.size(); ++i) energies[i] = a.features[i].ste;
    for (const auto& ee : envelope::segment_signal(energies, cfg.segmentation())) {
        const auto k = envelope::align_keyframe(ee, cfg.frame_ms, fps, video_frame_count);
        a.units.push_back({ee, k.frame_index, k.clamped});
    }
    return a;
}

VideoAnalysis analyze_video(const fs::path& audio_path, const fs::path& frames_dir, double fps,
                            const PipelineConfig& cfg, const roi::CascadeModel* cascade) {
    const auto frames = list_frames(frames_dir);
    if (frames.empty()) throw FormatError("no frame images in " + frames_dir.string());
    VideoAnalysis v;
    v.audio = analyze_audio(audio::read_wav(audio_path), cfg, fps, frames.size());
    std::map<std::size_t, std::size_t> slot;
    for (const auto& u : v.audio.units) slot.emplace(u.keyframe, 0);
    for (auto& [frame, pos] : slot) {
        pos = v.keyframes.size();
        v.keyframes.push_back(frame);
        v.visuals.push_back(analyze_keyframe(read_image(frames[frame]), cfg, cascade));
    }
    for (const auto& u : v.audio.units) v.unit_visual.push_back(slot.at(u.keyframe));
    return v;
}

std::vector<double> global_feature(const descriptors::GlobalColorMoments& m) {
    std::vector<double> g(m.begin(), m.end());
    for (double& v : g) v /= 255.0;
    return g;
}

std::vector<double> fused_vector(const ModelBundle& bundle, const AudioAnalysis& audio, std::size_t unit,
                                 const KeyframeVisual& visual) {
    const auto ah = codebook::audio_ee_histogram(audio.features, audio.units[unit].ee, bundle.audio_codebook);
    const auto vh = codebook::visual_histogram(visual.descriptors, bundle.visual_codebook);
    return codebook::fuse(ah, vh);
}

std::optional<roi::CascadeModel> load_configured_cascade(const PipelineConfig& cfg) {
    if (cfg.cascade.empty()) return std::nullopt;
    return roi::load_cascade(cfg.cascade);
}

std::vector<VideoAnalysis> analyze_dataset(const DatasetManifest& dataset, const PipelineConfig& cfg) {
    const auto cascade = load_configured_cascade(cfg);
    std::vector<VideoAnalysis> analyses(dataset.entries.size());
    parallel_for(dataset.entries.size(), [&](std::size_t i) {
        const auto& e = dataset.entries[i];
        try {
            analyses[i] = analyze_video(e.audio_path, e.frames_dir, e.fps, cfg, cascade ? &*cascade : nullptr);
        } catch (const PipelineError&) {
            throw;
        } catch (const Error& err) {
            throw PipelineError("analysis", e.video_id, err.what());
        }
    });
    return analyses;
}

CodebookPair train_codebooks(const DatasetManifest& dataset, const std::vector<VideoAnalysis>& analyses,
                             const PipelineConfig& cfg) {
    std::vector<codebook::Vector> audio_points, visual_points;
    for (std::size_t i = 0; i < dataset.entries.size(); ++i) {
        const Label l = dataset.entries[i].label;
        const bool use = cfg.codebook_source == CodebookSource::all ? l != Label::unlabeled : l == Label::positive;
        if (!use) continue;
        const auto& a = analyses[i];
        for (const auto& u : a.audio.units)
            for (std::size_t f = u.ee.start_frame; f < u.ee.end_frame; ++f) {
                const auto v = a.audio.features[f].to_vector();
                audio_points.emplace_back(v.begin(), v.end());
            }
        for (const auto& kv : a.visuals)
            for (const auto& d : kv.descriptors) visual_points.emplace_back(d.vector.begin(), d.vector.end());
    }
    if (audio_points.empty()) throw PipelineError("codebook", "*", "no training material for the audio codebook");
    if (visual_points.empty()) throw PipelineError("codebook", "*", "no descriptors for the visual codebook");
    try {
        return {codebook::train_codebook(codebook::Modality::audio, audio_points, cfg.k_audio, cfg.seed, cfg.kmeans_max_iter),
                codebook::train_codebook(codebook::Modality::visual, visual_points, cfg.k_visual, cfg.seed + 1,
                                         cfg.kmeans_max_iter)};
    } catch (const Error& e) {
        throw PipelineError("codebook", "*",
                            std::string(e.what()) + " (audio points " + std::to_string(audio_points.size()) +
                                ", visual points " + std::to_string(visual_points.size()) + ")");
    }
}

ModelBundle train_pipeline(const DatasetManifest& dataset, const PipelineConfig& cfg) {
    cfg.validate();
    const auto analyses = analyze_dataset(dataset, cfg);
    auto books = train_codebooks(dataset, analyses, cfg);

    ModelBundle bundle;
    bundle.audio_codebook = std::move(books.audio);
    bundle.visual_codebook = std::move(books.visual);
    bundle.config = cfg;

    std::vector<std::vector<double>> fused_x, global_x;
    std::vector<int> fused_y, global_y;
    for (std::size_t i = 0; i < dataset.entries.size(); ++i) {
        const auto& e = dataset.entries[i];
        if (e.label == Label::unlabeled) continue;
        const auto& a = analyses[i];
        for (std::size_t u = 0; u < a.audio.units.size(); ++u) {
            fused_x.push_back(fused_vector(bundle, a.audio, u, a.visual_of(u)));
            fused_y.push_back(label_sign(e.label));
            global_x.push_back(global_feature(a.visual_of(u).color_moments));
            global_y.push_back(label_sign(e.label));
        }
    }
    try {
        bundle.multimodal = classify::train(fused_x, fused_y, {cfg.c, cfg.epochs, cfg.seed});
        bundle.global = classify::train(global_x, global_y, {cfg.c, cfg.epochs, cfg.seed + 1});
    } catch (const Error& e) {
        throw PipelineError("classifier", "*", e.what());
    }
    return bundle;
}

Classification classify_analysis(const ModelBundle& bundle, const VideoAnalysis& analysis) {
    const auto& cfg = bundle.config;
    Classification c;
    std::vector<double> fused;
    for (std::size_t u = 0; u < analysis.audio.units.size(); ++u) {
        const auto& unit = analysis.audio.units[u];
        const auto& visual = analysis.visual_of(u);
        ReportRow row;
        row.ee_id = unit.ee.id;
        row.start_s = static_cast<double>(unit.ee.start_frame) * cfg.frame_ms / 1000.0;
        row.end_s = static_cast<double>(unit.ee.end_frame) * cfg.frame_ms / 1000.0;
        row.multimodal_score = classify::score(bundle.multimodal, fused_vector(bundle, analysis.audio, u, visual));
        row.global_score = classify::score(bundle.global, global_feature(visual.color_moments));
        row.fused_score = classify::late_fusion(row.multimodal_score, row.global_score, cfg.fusion_w);
        row.label = row.fused_score > cfg.thr ? 1 : -1;
        fused.push_back(row.fused_score);
        c.rows.push_back(row);
    }
    c.verdict = classify::periodic_video_decision(fused, cfg.decision());
    return c;
}

Classification classify_video(const ModelBundle& bundle, const fs::path& audio_path, const fs::path& frames_dir,
                              double fps) {
    const auto cascade = load_configured_cascade(bundle.config);
    const std::string id = audio_path.string();
    VideoAnalysis analysis;
    try {
        analysis = analyze_video(audio_path, frames_dir, fps, bundle.config, cascade ? &*cascade : nullptr);
    } catch (const Error& e) {
        throw PipelineError("analysis", id, e.what());
    }
    if (analysis.audio.units.empty()) throw PipelineError("decision", id, "no decision units");
    return classify_analysis(bundle, analysis);
}

void write_report_csv(std::ostream& out, const std::vector<ReportRow>& rows) {
    out << "ee_id,start_s,end_s,multimodal_score,global_score,fused_score,label\n";
    char buf[160];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%zu,%.6f,%.6f,%.17g,%.17g,%.17g,%d", r.ee_id, r.start_s, r.end_s,
                      r.multimodal_score, r.global_score, r.fused_score, r.label);
        out << buf << '\n';
    }
}

Evaluation evaluate(const ModelBundle& bundle, const DatasetManifest& dataset) {
    DatasetManifest labeled;
    for (const auto& e : dataset.entries)
        if (e.label != Label::unlabeled) labeled.entries.push_back(e);
    if (labeled.count(Label::positive) == 0 || labeled.count(Label::negative) == 0)
        throw InvalidInput("evaluation requires both positive and negative videos");

    const auto analyses = analyze_dataset(labeled, bundle.config);
    Evaluation ev;
    std::vector<double> scores;
    std::vector<bool> labels;
    std::size_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < labeled.entries.size(); ++i) {
        const auto& e = labeled.entries[i];
        if (analyses[i].audio.units.empty()) throw PipelineError("decision", e.video_id, "no decision units");
        const auto c = classify_analysis(bundle, analyses[i]);
        VideoEvaluation v{e.video_id, e.label == Label::positive, c.rows.front().fused_score, c.verdict.flag};
        for (const auto& r : c.rows) v.max_fused_score = std::max(v.max_fused_score, r.fused_score);
        if (v.flag) (v.positive ? tp : fp) += 1;
        scores.push_back(v.max_fused_score);
        labels.push_back(v.positive);
        ev.videos.push_back(v);
    }
    const std::unique_ptr<bool[]> flags(new bool[labels.size()]);
    std::copy(labels.begin(), labels.end(), flags.get());
    ev.roc = classify::roc_curve(scores, std::span<const bool>(flags.get(), labels.size()));
    ev.tpr = static_cast<double>(tp) / static_cast<double>(labeled.count(Label::positive));
    ev.fpr = static_cast<double>(fp) / static_cast<double>(labeled.count(Label::negative));
    return ev;
}

}  // namespace perisal::pipeline
