#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace perisal::classify {

struct DecisionConfig {
    double thr = 0.0;
    std::size_t n = 3;

    void validate() const;
};

struct VideoVerdict {
    bool flag = false;
    std::size_t max_run = 0;
    std::vector<double> scores;  // per EE, in EE order
};

/// An EE is positive when its score is strictly above thr; the video is
/// flagged when some run of consecutive positives reaches n. Throws
/// InvalidInput on an empty sequence.
VideoVerdict periodic_video_decision(std::span<const double> scores, const DecisionConfig& cfg);

/// Baseline: true when more than `min_count` EEs are positive.
bool threshold_video_decision(std::span<const bool> ee_labels, std::size_t min_count);

/// w * multimodal + (1 - w) * global. Throws ConfigError unless w in [0, 1].
double late_fusion(double score_multimodal, double score_global, double w = 0.5);

struct RocPoint {
    double threshold = 0.0;
    double fpr = 0.0;
    double tpr = 0.0;
};

struct RocCurve {
    std::vector<RocPoint> points;  // +inf sentinel, distinct scores descending, -inf sentinel
    double auc = 0.0;
};

/// A sample is called positive when score >= threshold. Equal scores share
/// one threshold. AUC is the trapezoidal area, computed from integer counts.
/// Throws InvalidInput unless both classes are present.
RocCurve roc_curve(std::span<const double> scores, std::span<const bool> labels);

/// CSV `threshold,fpr,tpr`.
void write_roc_csv(std::ostream& out, const RocCurve& curve);

/// One decimal score per line, EE order.
void write_prediction_file(std::ostream& out, std::span<const double> scores);
std::vector<double> read_prediction_file(std::istream& in);
std::vector<double> load_prediction_file(const std::filesystem::path& path);

}  // namespace perisal::classify
