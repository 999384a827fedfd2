#pragma once

#include <stdexcept>
#include <string>

namespace perisal {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input violates an operation's precondition.
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// A configuration value is out of range or unknown.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A file could not be parsed or uses an unsupported layout.
class FormatError : public Error {
public:
    using Error::Error;
};

/// A pipeline stage failed for one video.
class PipelineError : public Error {
public:
    PipelineError(std::string stage, std::string video_id, const std::string& what)
        : Error("[" + stage + "] " + video_id + ": " + what),
          stage_(std::move(stage)),
          video_id_(std::move(video_id)) {}

    const std::string& stage() const noexcept { return stage_; }
    const std::string& video_id() const noexcept { return video_id_; }

private:
    std::string stage_;
    std::string video_id_;
};

}  // namespace perisal
