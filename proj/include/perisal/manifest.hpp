#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace perisal::pipeline {

enum class Label { positive, negative, unlabeled };

std::string to_string(Label l);
Label label_from_string(const std::string& s);

struct ManifestEntry {
    std::string video_id;
    std::filesystem::path audio_path;
    std::filesystem::path frames_dir;
    double fps = 25.0;
    Label label = Label::unlabeled;
};

struct DatasetManifest {
    std::vector<ManifestEntry> entries;

    std::size_t count(Label l) const;
};

/// Frame images (.ppm or .png) of a directory in file-name order.
std::vector<std::filesystem::path> list_frames(const std::filesystem::path& dir);

/// Parses the CSV `video_id,audio_path,frames_dir,fps,label`; relative paths
/// resolve against `base_dir`. No file-system checks.
DatasetManifest parse_manifest(std::istream& in, const std::filesystem::path& base_dir);

/// Parses and validates every entry (unique ids, readable WAV, non-empty
/// frame directory, fps > 0). All failures are collected into one
/// FormatError.
DatasetManifest ingest(const std::filesystem::path& manifest_path);

void write_manifest(std::ostream& out, const DatasetManifest& manifest);

}  // namespace perisal::pipeline
