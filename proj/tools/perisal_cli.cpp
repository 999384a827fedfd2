#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "perisal/error.hpp"
#include "perisal/pipeline.hpp"
#include "perisal/saliency.hpp"
#include "perisal/synthetic.hpp"
#include "perisal/wav.hpp"

namespace fs = std::filesystem;
using namespace perisal;
using pipeline::PipelineConfig;

namespace {

struct Common {
    std::string config_path;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--config", c.config_path, "Config file (key = value lines)")->check(CLI::ExistingFile);
    app->add_option("--set", c.overrides, "Override a config key, as key=value");
    app->add_option("--seed", c.seed, "Random seed");
}

void apply_overrides(PipelineConfig& cfg, const Common& c) {
    for (const auto& o : c.overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + o + "'");
        cfg.set(o.substr(0, eq), o.substr(eq + 1));
    }
    if (c.seed) cfg.seed = *c.seed;
    cfg.validate();
}

PipelineConfig resolve_config(const Common& c) {
    PipelineConfig cfg = c.config_path.empty() ? PipelineConfig{} : pipeline::load_config(c.config_path);
    apply_overrides(cfg, c);
    return cfg;
}

std::ofstream open_out(const fs::path& p) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p);
    if (!out) throw Error("cannot write " + p.string());
    return out;
}

GrayMap mask_map(const BinaryMask& m) {
    GrayMap g(m.width(), m.height());
    for (int y = 0; y < m.height(); ++y)
        for (int x = 0; x < m.width(); ++x) g.at(x, y) = m.at(x, y) ? 255.0 : 0.0;
    return g;
}

void print_verdict(const std::string& id, const pipeline::Classification& c) {
    std::printf("%s flag=%d max_run=%zu units=%zu\n", id.c_str(), c.verdict.flag ? 1 : 0, c.verdict.max_run,
                c.rows.size());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Periodic-envelope and saliency based multimodal video classifier"};
    app.require_subcommand(1);
    Common common;

    std::string audio_path, frames_dir, image_path, manifest, out, model_dir, predictions_out;
    double fps = 25.0;
    std::size_t frame_count = 0;

    auto* extract = app.add_subcommand("extract", "Per-frame audio features as CSV");
    extract->add_option("--audio", audio_path, "Mono 16-bit PCM WAV")->required();
    extract->add_option("--out", out, "Output CSV (default stdout)");
    add_common(extract, common);

    auto* segment = app.add_subcommand("segment", "Energy envelopes and keyframes as CSV");
    segment->add_option("--audio", audio_path, "Mono 16-bit PCM WAV")->required();
    segment->add_option("--fps", fps, "Video frame rate")->check(CLI::PositiveNumber);
    segment->add_option("--frames", frames_dir, "Frame directory, used to clamp keyframes");
    segment->add_option("--frame-count", frame_count, "Number of video frames, used to clamp keyframes");
    segment->add_option("--out", out, "Output CSV (default stdout)");
    add_common(segment, common);

    auto* sal = app.add_subcommand("saliency", "Saliency, contrast and ROI masks as PGM images");
    sal->add_option("--image", image_path, "PPM or PNG frame")->required();
    sal->add_option("--out", out, "Output directory")->required();
    add_common(sal, common);

    auto* cbk = app.add_subcommand("codebook", "Train audio and visual codebooks");
    cbk->add_option("--manifest", manifest, "Dataset manifest CSV")->required();
    cbk->add_option("--out", out, "Output directory")->required();
    add_common(cbk, common);

    auto* train = app.add_subcommand("train", "Train a full model bundle");
    train->add_option("--manifest", manifest, "Dataset manifest CSV")->required();
    train->add_option("--out", out, "Bundle directory")->required();
    add_common(train, common);

    auto* classify = app.add_subcommand("classify", "Classify one video");
    classify->add_option("--model", model_dir, "Bundle directory")->required();
    classify->add_option("--audio", audio_path, "Mono 16-bit PCM WAV")->required();
    classify->add_option("--frames", frames_dir, "Frame directory")->required();
    classify->add_option("--fps", fps, "Video frame rate")->check(CLI::PositiveNumber);
    classify->add_option("--out", out, "Report CSV (default stdout)");
    classify->add_option("--predictions", predictions_out, "Write fused EE scores, one per line");
    add_common(classify, common);

    auto* eval = app.add_subcommand("eval", "Video-level ROC over a labeled manifest");
    eval->add_option("--model", model_dir, "Bundle directory")->required();
    eval->add_option("--manifest", manifest, "Dataset manifest CSV")->required();
    eval->add_option("--out", out, "ROC CSV (default stdout)");
    add_common(eval, common);

    synthetic::CorpusOptions synth_opts;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic two-class corpus");
    synth->add_option("--out", out, "Corpus directory")->required();
    synth->add_option("--train-per-class", synth_opts.train_per_class, "Training videos per class");
    synth->add_option("--test-per-class", synth_opts.test_per_class, "Test videos per class");
    synth->add_option("--duration", synth_opts.duration_s, "Video duration in seconds");
    synth->add_option("--fps", synth_opts.fps, "Frame rate");
    synth->add_option("--seed", synth_opts.seed, "Random seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (*synth) {
            const auto c = synthetic::generate_corpus(out, synth_opts);
            std::printf("wrote %zu training and %zu test videos to %s\n", c.train.entries.size(),
                        c.test.entries.size(), out.c_str());
            return 0;
        }

        if (*classify || *eval) {
            const bool have_config = !common.config_path.empty();
            auto bundle = pipeline::load_bundle(model_dir);
            if (have_config) {
                std::ifstream in(common.config_path);
                pipeline::apply_config_text(bundle.config, in);
            }
            apply_overrides(bundle.config, common);
            bundle.validate();
            if (*classify) {
                const auto c = pipeline::classify_video(bundle, audio_path, frames_dir, fps);
                if (out.empty()) {
                    pipeline::write_report_csv(std::cout, c.rows);
                } else {
                    auto f = open_out(out);
                    pipeline::write_report_csv(f, c.rows);
                }
                if (!predictions_out.empty()) {
                    std::vector<double> scores;
                    for (const auto& r : c.rows) scores.push_back(r.fused_score);
                    auto f = open_out(predictions_out);
                    classify::write_prediction_file(f, scores);
                }
                print_verdict(fs::path(audio_path).parent_path().filename().string(), c);
                return 0;
            }
            const auto ev = pipeline::evaluate(bundle, pipeline::ingest(manifest));
            if (out.empty()) {
                classify::write_roc_csv(std::cout, ev.roc);
            } else {
                auto f = open_out(out);
                classify::write_roc_csv(f, ev.roc);
            }
            std::printf("auc=%.6f tpr=%.6f fpr=%.6f videos=%zu\n", ev.roc.auc, ev.tpr, ev.fpr, ev.videos.size());
            return 0;
        }

        const PipelineConfig cfg = resolve_config(common);

        if (*extract) {
            const auto feats = audio::extract_frame_features(audio::read_wav(audio_path), cfg.frame_ms);
            std::optional<std::ofstream> file;
            if (!out.empty()) file = open_out(out);
            std::ostream& os = file ? *file : std::cout;
            os << "frame";
            for (std::size_t i = 0; i < audio::kMfccCount; ++i) os << ",mfcc_" << i;
            for (std::size_t i = 0; i < audio::kMfccCount; ++i) os << ",delta_mfcc_" << i;
            os << ",zcr,ste";
            for (std::size_t i = 0; i < audio::kSubbandCount; ++i) os << ",subband_ste_" << i;
            for (std::size_t i = 0; i < audio::kSubbandCount; ++i) os << ",subband_ratio_" << i;
            os << '\n';
            char buf[32];
            for (std::size_t f = 0; f < feats.size(); ++f) {
                os << f;
                for (double v : feats[f].to_vector()) {
                    std::snprintf(buf, sizeof buf, ",%.17g", v);
                    os << buf;
                }
                os << '\n';
            }
            return 0;
        }

        if (*segment) {
            if (!frames_dir.empty()) frame_count = pipeline::list_frames(frames_dir).size();
            const auto a = pipeline::analyze_audio(audio::read_wav(audio_path), cfg, fps, frame_count);
            std::vector<envelope::EnergyEnvelope> ees;
            std::vector<std::size_t> keys;
            for (const auto& u : a.units) {
                ees.push_back(u.ee);
                keys.push_back(u.keyframe);
            }
            std::optional<std::ofstream> file;
            if (!out.empty()) file = open_out(out);
            envelope::write_segment_csv(file ? *file : std::cout, ees, keys);
            return 0;
        }

        if (*sal) {
            const auto cascade = pipeline::load_configured_cascade(cfg);
            const auto b = pipeline::compute_roi(read_image(image_path), cfg, cascade ? &*cascade : nullptr);
            const auto s = saliency::compute_saliency(b.image);
            const auto contrast = saliency::block_contrast(b.image, cfg.block_size);
            const fs::path dir(out);
            fs::create_directories(dir);
            write_pgm(dir / "saliency.pgm", s.saliency);
            write_pgm(dir / "contrast.pgm", contrast.values);
            write_pgm(dir / "salient.pgm", mask_map(b.salient));
            write_pgm(dir / "skin.pgm", mask_map(b.skin));
            write_pgm(dir / "face.pgm", mask_map(b.face));
            write_pgm(dir / "roi.pgm", mask_map(b.roi));
            std::printf("roi_pixels=%zu of %d\n", b.roi.count(), b.image.width() * b.image.height());
            return 0;
        }

        const auto dataset = pipeline::ingest(manifest);
        if (*cbk) {
            const auto books = pipeline::train_codebooks(dataset, pipeline::analyze_dataset(dataset, cfg), cfg);
            fs::create_directories(out);
            codebook::save_codebook(fs::path(out) / "audio.cbk", books.audio);
            codebook::save_codebook(fs::path(out) / "visual.cbk", books.visual);
            return 0;
        }
        if (*train) {
            pipeline::save_bundle(pipeline::train_pipeline(dataset, cfg), out);
            std::printf("bundle written to %s\n", out.c_str());
            return 0;
        }
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 1;
}
