#include <fstream>
#include <sstream>

#include "perisal/error.hpp"
#include "perisal/pipeline.hpp"

namespace perisal::pipeline {

namespace fs = std::filesystem;

namespace {

constexpr const char* kMagic = "PERISAL-BUNDLE";

fs::path require_file(const fs::path& dir, const char* name) {
    const fs::path p = dir / name;
    if (!fs::is_regular_file(p)) throw FormatError("model bundle is missing " + p.string());
    return p;
}

}  // namespace

void ModelBundle::validate() const {
    if (audio_codebook.modality() != codebook::Modality::audio)
        throw FormatError("bundle audio codebook has the wrong modality");
    if (visual_codebook.modality() != codebook::Modality::visual)
        throw FormatError("bundle visual codebook has the wrong modality");
    if (audio_codebook.k() == 0 || visual_codebook.k() == 0) throw FormatError("bundle codebook is empty");
    if (audio_codebook.k() != config.k_audio || visual_codebook.k() != config.k_visual)
        throw FormatError("bundle config k_audio/k_visual do not match the stored codebooks");
    const std::size_t fused = audio_codebook.k() + visual_codebook.k();
    if (multimodal.dimension() != fused)
        throw FormatError("multimodal classifier dimension " + std::to_string(multimodal.dimension()) +
                          " does not match codebook sizes " + std::to_string(fused));
    if (global.dimension() != descriptors::GlobalColorMoments{}.size())
        throw FormatError("global classifier dimension " + std::to_string(global.dimension()) + ", expected 9");
}

void save_bundle(const ModelBundle& bundle, const fs::path& dir) {
    bundle.validate();
    fs::create_directories(dir);
    {
        std::ofstream out(dir / "bundle.txt");
        if (!out) throw Error("cannot write " + (dir / "bundle.txt").string());
        out << kMagic << ' ' << ModelBundle::kFormatVersion << '\n';
    }
    {
        std::ofstream out(dir / "config.txt");
        if (!out) throw Error("cannot write " + (dir / "config.txt").string());
        write_config(out, bundle.config);
    }
    codebook::save_codebook(dir / "audio.cbk", bundle.audio_codebook);
    codebook::save_codebook(dir / "visual.cbk", bundle.visual_codebook);
    classify::save_classifier(dir / "multimodal.svm", bundle.multimodal);
    classify::save_classifier(dir / "global.svm", bundle.global);
}

ModelBundle load_bundle(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw FormatError("model bundle directory not found: " + dir.string());
    {
        std::ifstream in(require_file(dir, "bundle.txt"));
        std::string magic;
        int version = 0;
        if (!(in >> magic >> version) || magic != kMagic)
            throw FormatError("not a model bundle: " + (dir / "bundle.txt").string());
        if (version != ModelBundle::kFormatVersion)
            throw FormatError("unsupported bundle version " + std::to_string(version));
    }
    ModelBundle b;
    try {
        b.config = load_config(require_file(dir, "config.txt"));
    } catch (const ConfigError& e) {
        throw FormatError(std::string("bundle config: ") + e.what());
    }
    b.audio_codebook = codebook::load_codebook(require_file(dir, "audio.cbk"));
    b.visual_codebook = codebook::load_codebook(require_file(dir, "visual.cbk"));
    b.multimodal = classify::load_classifier(require_file(dir, "multimodal.svm"));
    b.global = classify::load_classifier(require_file(dir, "global.svm"));
    b.validate();
    return b;
}

}  // namespace perisal::pipeline
