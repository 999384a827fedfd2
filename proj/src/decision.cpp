#include "perisal/decision.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>

#include "perisal/error.hpp"

namespace perisal::classify {

void DecisionConfig::validate() const {
    if (n < 1) throw ConfigError("consecutive run length n must be >= 1");
    if (!std::isfinite(thr)) throw ConfigError("decision threshold must be finite");
}

VideoVerdict periodic_video_decision(std::span<const double> scores, const DecisionConfig& cfg) {
    cfg.validate();
    if (scores.empty()) throw InvalidInput("no decision units");
    VideoVerdict v;
    v.scores.assign(scores.begin(), scores.end());
    std::size_t counter = 0;
    for (double s : scores) {
        counter = s > cfg.thr ? counter + 1 : 0;
        v.max_run = std::max(v.max_run, counter);
    }
    v.flag = v.max_run >= cfg.n;
    return v;
}

bool threshold_video_decision(std::span<const bool> ee_labels, std::size_t min_count) {
    const auto positives = static_cast<std::size_t>(std::count(ee_labels.begin(), ee_labels.end(), true));
    return positives > min_count;
}

double late_fusion(double score_multimodal, double score_global, double w) {
    if (!(w >= 0.0 && w <= 1.0)) throw ConfigError("fusion weight must lie in [0, 1]");
    return w * score_multimodal + (1.0 - w) * score_global;
}

RocCurve roc_curve(std::span<const double> scores, std::span<const bool> labels) {
    if (scores.size() != labels.size()) throw InvalidInput("scores and labels differ in length");
    const auto p = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), true));
    const std::size_t neg = labels.size() - p;
    if (p == 0 || neg == 0) throw InvalidInput("ROC requires both classes");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    RocCurve curve;
    const auto P = static_cast<double>(p), N = static_cast<double>(neg);
    curve.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
    std::size_t tp = 0, fp = 0;
    double twice_area = 0.0;  // sum of dFP * (TP_prev + TP_cur), exact in integers
    for (std::size_t i = 0; i < order.size();) {
        const double s = scores[order[i]];
        const std::size_t tp0 = tp, fp0 = fp;
        while (i < order.size() && scores[order[i]] == s) {
            (labels[order[i]] ? tp : fp) += 1;
            ++i;
        }
        twice_area += static_cast<double>(fp - fp0) * static_cast<double>(tp + tp0);
        curve.points.push_back({s, static_cast<double>(fp) / N, static_cast<double>(tp) / P});
    }
    curve.points.push_back({-std::numeric_limits<double>::infinity(), 1.0, 1.0});
    curve.auc = twice_area / (2.0 * P * N);
    return curve;
}

void write_roc_csv(std::ostream& out, const RocCurve& curve) {
    out << "threshold,fpr,tpr\n";
    char buf[96];
    for (const auto& pt : curve.points) {
        if (std::isinf(pt.threshold))
            std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g", pt.threshold > 0 ? "inf" : "-inf", pt.fpr, pt.tpr);
        else
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g", pt.threshold, pt.fpr, pt.tpr);
        out << buf << '\n';
    }
}

void write_prediction_file(std::ostream& out, std::span<const double> scores) {
    char buf[40];
    for (double s : scores) {
        std::snprintf(buf, sizeof buf, "%.17g", s);
        out << buf << '\n';
    }
}

std::vector<double> read_prediction_file(std::istream& in) {
    std::vector<double> scores;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const std::string tok = line.substr(first, line.find_last_not_of(" \t\r") - first + 1);
        char* end = nullptr;
        const double v = std::strtod(tok.c_str(), &end);
        if (end == tok.c_str() || *end != '\0' || !std::isfinite(v))
            throw FormatError("bad score on line " + std::to_string(lineno) + ": " + tok);
        scores.push_back(v);
    }
    return scores;
}

std::vector<double> load_prediction_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open prediction file: " + path.string());
    return read_prediction_file(in);
}

}  // namespace perisal::classify
