#include "perisal/manifest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "perisal/error.hpp"
#include "perisal/wav.hpp"

namespace perisal::pipeline {

namespace fs = std::filesystem;

std::string to_string(Label l) {
    switch (l) {
        case Label::positive: return "positive";
        case Label::negative: return "negative";
        case Label::unlabeled: return "unlabeled";
    }
    return "unlabeled";
}

Label label_from_string(const std::string& s) {
    if (s == "positive") return Label::positive;
    if (s == "negative") return Label::negative;
    if (s == "unlabeled" || s.empty()) return Label::unlabeled;
    throw FormatError("unknown label: " + s);
}

std::size_t DatasetManifest::count(Label l) const {
    return static_cast<std::size_t>(
        std::count_if(entries.begin(), entries.end(), [l](const ManifestEntry& e) { return e.label == l; }));
}

std::vector<fs::path> list_frames(const fs::path& dir) {
    std::vector<fs::path> frames;
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) return frames;
    for (const auto& entry : fs::directory_iterator(dir, ec)) {
        if (!entry.is_regular_file()) continue;
        std::string ext = entry.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
        if (ext == ".ppm" || ext == ".png") frames.push_back(entry.path());
    }
    std::sort(frames.begin(), frames.end(),
              [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
    return frames;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        const auto a = cell.find_first_not_of(" \t\r");
        cells.push_back(a == std::string::npos ? std::string() : cell.substr(a, cell.find_last_not_of(" \t\r") - a + 1));
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

fs::path resolve(const fs::path& base, const std::string& p) {
    fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

}  // namespace

DatasetManifest parse_manifest(std::istream& in, const fs::path& base_dir) {
    DatasetManifest m;
    std::string line;
    std::size_t lineno = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos || line[line.find_first_not_of(" \t")] == '#') continue;
        const auto cells = split_csv(line);
        if (!header_seen) {
            header_seen = true;
            if (!cells.empty() && cells[0] == "video_id") continue;
        }
        if (cells.size() != 5)
            throw FormatError("manifest line " + std::to_string(lineno) + ": expected 5 columns");
        ManifestEntry e;
        e.video_id = cells[0];
        e.audio_path = resolve(base_dir, cells[1]);
        e.frames_dir = resolve(base_dir, cells[2]);
        char* end = nullptr;
        e.fps = std::strtod(cells[3].c_str(), &end);
        if (cells[3].empty() || *end != '\0' || !std::isfinite(e.fps))
            throw FormatError("manifest line " + std::to_string(lineno) + ": bad fps '" + cells[3] + "'");
        try {
            e.label = label_from_string(cells[4]);
        } catch (const FormatError& err) {
            throw FormatError("manifest line " + std::to_string(lineno) + ": " + err.what());
        }
        m.entries.push_back(std::move(e));
    }
    return m;
}

DatasetManifest ingest(const fs::path& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw FormatError("cannot open manifest: " + manifest_path.string());
    DatasetManifest m = parse_manifest(in, manifest_path.parent_path());

    std::vector<std::string> problems;
    std::set<std::string> ids;
    for (const auto& e : m.entries) {
        if (e.video_id.empty()) problems.push_back("entry with empty video_id");
        if (!ids.insert(e.video_id).second) problems.push_back(e.video_id + ": duplicate video_id");
        if (!(e.fps > 0.0)) problems.push_back(e.video_id + ": fps must be positive");
        if (!fs::exists(e.audio_path)) {
            problems.push_back(e.video_id + ": missing audio file " + e.audio_path.string());
        } else {
            try {
                (void)audio::read_wav(e.audio_path);
            } catch (const Error& err) {
                problems.push_back(e.video_id + ": " + err.what());
            }
        }
        if (list_frames(e.frames_dir).empty())
            problems.push_back(e.video_id + ": no frame images in " + e.frames_dir.string());
    }
    if (!problems.empty()) {
        std::string report = "manifest " + manifest_path.string() + " has " + std::to_string(problems.size()) + " problem(s):";
        for (const auto& p : problems) report += "\n  " + p;
        throw FormatError(report);
    }
    return m;
}

void write_manifest(std::ostream& out, const DatasetManifest& manifest) {
    out << "video_id,audio_path,frames_dir,fps,label\n";
    for (const auto& e : manifest.entries)
        out << e.video_id << ',' << e.audio_path.generic_string() << ',' << e.frames_dir.generic_string() << ','
            << e.fps << ',' << to_string(e.label) << '\n';
}

}  // namespace perisal::pipeline
