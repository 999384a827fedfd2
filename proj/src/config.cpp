#include "perisal/config.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <ostream>

#include "perisal/error.hpp"

namespace perisal::pipeline {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    return s.substr(a, s.find_last_not_of(" \t\r\n") - a + 1);
}

double parse_real(const std::string& key, const std::string& v) {
    char* end = nullptr;
    const double d = std::strtod(v.c_str(), &end);
    if (v.empty() || *end != '\0' || !std::isfinite(d)) throw ConfigError("bad value for " + key + ": '" + v + "'");
    return d;
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& v) {
    if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
        throw ConfigError("bad value for " + key + ": '" + v + "'");
    try {
        return std::stoull(v);
    } catch (const std::exception&) {
        throw ConfigError("value out of range for " + key + ": '" + v + "'");
    }
}

std::string fmt_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct Field {
    std::function<void(PipelineConfig&, const std::string&, const std::string&)> set;
    std::function<std::string(const PipelineConfig&)> get;
};

template <typename T>
Field real_field(T PipelineConfig::*m) {
    return {[m](PipelineConfig& c, const std::string& k, const std::string& v) { c.*m = parse_real(k, v); },
            [m](const PipelineConfig& c) { return fmt_real(c.*m); }};
}

Field size_field(std::size_t PipelineConfig::*m) {
    return {[m](PipelineConfig& c, const std::string& k, const std::string& v) {
                c.*m = static_cast<std::size_t>(parse_unsigned(k, v));
            },
            [m](const PipelineConfig& c) { return std::to_string(c.*m); }};
}

Field int_field(int PipelineConfig::*m) {
    return {[m](PipelineConfig& c, const std::string& k, const std::string& v) {
                const auto u = parse_unsigned(k, v);
                if (u > 1000000) throw ConfigError("value out of range for " + k);
                c.*m = static_cast<int>(u);
            },
            [m](const PipelineConfig& c) { return std::to_string(c.*m); }};
}

const std::map<std::string, Field>& fields() {
    static const std::map<std::string, Field> table = [] {
        std::map<std::string, Field> f;
        f["frame_ms"] = real_field(&PipelineConfig::frame_ms);
        f["j"] = size_field(&PipelineConfig::j);
        f["t1"] = real_field(&PipelineConfig::t1);
        f["t2"] = real_field(&PipelineConfig::t2);
        f["cutoff"] = real_field(&PipelineConfig::cutoff);
        f["min_len"] = size_field(&PipelineConfig::min_len);
        f["l_max"] = size_field(&PipelineConfig::l_max);
        f["period_confidence"] = real_field(&PipelineConfig::period_confidence);
        f["k_audio"] = size_field(&PipelineConfig::k_audio);
        f["k_visual"] = size_field(&PipelineConfig::k_visual);
        f["seed"] = {[](PipelineConfig& c, const std::string& k, const std::string& v) { c.seed = parse_unsigned(k, v); },
                     [](const PipelineConfig& c) { return std::to_string(c.seed); }};
        f["kmeans_max_iter"] = size_field(&PipelineConfig::kmeans_max_iter);
        f["codebook_source"] = {
            [](PipelineConfig& c, const std::string& k, const std::string& v) {
                if (v == "positive")
                    c.codebook_source = CodebookSource::positive;
                else if (v == "all")
                    c.codebook_source = CodebookSource::all;
                else
                    throw ConfigError("bad value for " + k + ": '" + v + "' (expected positive or all)");
            },
            [](const PipelineConfig& c) { return std::string(c.codebook_source == CodebookSource::positive ? "positive" : "all"); }};
        f["block_size"] = int_field(&PipelineConfig::block_size);
        f["saliency_threshold"] = real_field(&PipelineConfig::saliency_threshold);
        f["skin_cb_min"] = real_field(&PipelineConfig::skin_cb_min);
        f["skin_cb_max"] = real_field(&PipelineConfig::skin_cb_max);
        f["skin_cr_min"] = real_field(&PipelineConfig::skin_cr_min);
        f["skin_cr_max"] = real_field(&PipelineConfig::skin_cr_max);
        f["cascade"] = {[](PipelineConfig& c, const std::string&, const std::string& v) { c.cascade = v; },
                        [](const PipelineConfig& c) { return c.cascade; }};
        f["face_scale_step"] = real_field(&PipelineConfig::face_scale_step);
        f["face_stride"] = int_field(&PipelineConfig::face_stride);
        f["hessian_threshold"] = real_field(&PipelineConfig::hessian_threshold);
        f["octaves"] = int_field(&PipelineConfig::octaves);
        f["max_descriptors"] = size_field(&PipelineConfig::max_descriptors);
        f["c"] = real_field(&PipelineConfig::c);
        f["epochs"] = size_field(&PipelineConfig::epochs);
        f["thr"] = real_field(&PipelineConfig::thr);
        f["n"] = size_field(&PipelineConfig::n);
        f["fusion_w"] = real_field(&PipelineConfig::fusion_w);
        return f;
    }();
    return table;
}

}  // namespace

void PipelineConfig::set(const std::string& key, const std::string& value) {
    const auto it = fields().find(key);
    if (it == fields().end()) throw ConfigError("unknown configuration key: " + key);
    it->second.set(*this, key, trim(value));
}

std::string PipelineConfig::get(const std::string& key) const {
    const auto it = fields().find(key);
    if (it == fields().end()) throw ConfigError("unknown configuration key: " + key);
    return it->second.get(*this);
}

std::vector<std::string> PipelineConfig::keys() {
    std::vector<std::string> k;
    for (const auto& [name, _] : fields()) k.push_back(name);
    return k;
}

void PipelineConfig::validate() const {
    auto require = [](bool ok, const char* msg) {
        if (!ok) throw ConfigError(msg);
    };
    require(frame_ms > 0.0, "frame_ms must be positive");
    require(j >= 1, "j must be >= 1");
    require(t1 < t2, "t1 must be below t2");
    require(cutoff > 0.0 && cutoff <= 1.0, "cutoff must lie in (0, 1]");
    require(min_len >= 1, "min_len must be >= 1");
    require(l_max >= 2, "l_max must be >= 2");
    require(period_confidence >= 0.0 && period_confidence <= 1.0, "period_confidence must lie in [0, 1]");
    require(k_audio >= 1 && k_visual >= 1, "codebook sizes must be >= 1");
    require(kmeans_max_iter >= 1, "kmeans_max_iter must be >= 1");
    require(block_size >= 1, "block_size must be >= 1");
    require(saliency_threshold > 0.0 && saliency_threshold <= 1.0, "saliency_threshold must lie in (0, 1]");
    skin().validate();
    require(face_scale_step > 1.0, "face_scale_step must exceed 1");
    require(face_stride >= 1, "face_stride must be >= 1");
    require(hessian_threshold >= 0.0, "hessian_threshold must be non-negative");
    require(octaves >= 1 && octaves <= 4, "octaves must lie in [1, 4]");
    require(c > 0.0, "c must be positive");
    require(epochs >= 1, "epochs must be >= 1");
    require(n >= 1, "n must be >= 1");
    require(fusion_w >= 0.0 && fusion_w <= 1.0, "fusion_w must lie in [0, 1]");
}

envelope::SegmentationConfig PipelineConfig::segmentation() const {
    return {j, t1, t2, cutoff, min_len, l_max, period_confidence};
}

roi::SkinModelConfig PipelineConfig::skin() const { return {skin_cb_min, skin_cb_max, skin_cr_min, skin_cr_max}; }

classify::DecisionConfig PipelineConfig::decision() const { return {thr, n}; }

void apply_config_text(PipelineConfig& cfg, std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        cfg.set(trim(line.substr(0, eq)), line.substr(eq + 1));
    }
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    PipelineConfig cfg;
    try {
        apply_config_text(cfg, in);
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    cfg.validate();
    return cfg;
}

void write_config(std::ostream& out, const PipelineConfig& cfg) {
    for (const auto& [key, field] : fields()) out << key << " = " << field.get(cfg) << '\n';
}

}  // namespace perisal::pipeline
