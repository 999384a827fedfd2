#include "perisal/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

#include "perisal/error.hpp"

namespace perisal::classify {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

// Fisher-Yates with an explicit 53-bit uniform draw, so the order does not
// depend on the standard library's distribution implementation.
void shuffle(std::vector<std::size_t>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        const auto j = std::min(i - 1, static_cast<std::size_t>(u * static_cast<double>(i)));
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace

double svm_objective(const MarginClassifier& model, std::span<const std::vector<double>> x,
                     std::span<const int> y, double lambda) {
    double hinge = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        hinge += std::max(0.0, 1.0 - y[i] * (dot(model.weights, x[i]) + model.bias));
    const double reg = dot(model.weights, model.weights) + model.bias * model.bias;
    return 0.5 * lambda * reg + (x.empty() ? 0.0 : hinge / static_cast<double>(x.size()));
}

MarginClassifier train(std::span<const std::vector<double>> x, std::span<const int> y, const TrainOptions& opts) {
    if (x.empty() || x.size() != y.size()) throw InvalidInput("training data and labels must be non-empty and aligned");
    if (!(opts.c > 0.0)) throw ConfigError("regularization c must be positive");
    const std::size_t d = x.front().size();
    bool pos = false, neg = false;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i].size() != d) throw InvalidInput("training vectors differ in dimension");
        if (y[i] == 1)
            pos = true;
        else if (y[i] == -1)
            neg = true;
        else
            throw InvalidInput("labels must be +1 or -1");
    }
    if (!pos || !neg) throw InvalidInput("training requires both classes");

    const std::size_t n = x.size();
    const double lambda = 1.0 / (opts.c * static_cast<double>(n));
    const double radius = 1.0 / std::sqrt(lambda);

    MarginClassifier model{std::vector<double>(d, 0.0), 0.0};
    MarginClassifier best = model;
    double best_obj = svm_objective(model, x, y, lambda);

    std::mt19937_64 rng(opts.seed);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::size_t t = 0;
    for (std::size_t epoch = 0; epoch < opts.epochs; ++epoch) {
        shuffle(order, rng);
        for (std::size_t i : order) {
            ++t;
            const double eta = 1.0 / (lambda * static_cast<double>(t));
            const double margin = y[i] * (dot(model.weights, x[i]) + model.bias);
            const double shrink = 1.0 - eta * lambda;
            for (double& w : model.weights) w *= shrink;
            model.bias *= shrink;
            if (margin < 1.0) {
                const double step = eta * y[i];
                for (std::size_t j = 0; j < d; ++j) model.weights[j] += step * x[i][j];
                model.bias += step;
            }
            const double norm = std::sqrt(dot(model.weights, model.weights) + model.bias * model.bias);
            if (norm > radius) {
                const double k = radius / norm;
                for (double& w : model.weights) w *= k;
                model.bias *= k;
            }
        }
        const double obj = svm_objective(model, x, y, lambda);
        if (obj < best_obj) {
            best_obj = obj;
            best = model;
        }
    }
    return best;
}

double score(const MarginClassifier& model, std::span<const double> x) {
    if (x.size() != model.weights.size()) throw InvalidInput("feature dimension does not match classifier");
    return dot(model.weights, x) + model.bias;
}

void write_classifier(std::ostream& out, const MarginClassifier& model) {
    char buf[40];
    out << "PERISAL-SVM 1 " << model.weights.size() << '\n';
    for (std::size_t j = 0; j < model.weights.size(); ++j) {
        std::snprintf(buf, sizeof buf, "%.17g", model.weights[j]);
        if (j) out << ' ';
        out << buf;
    }
    std::snprintf(buf, sizeof buf, "%.17g", model.bias);
    out << '\n' << buf << '\n';
}

MarginClassifier read_classifier(std::istream& in) {
    std::string magic;
    int version = 0;
    long long d = 0;
    if (!(in >> magic >> version >> d) || magic != "PERISAL-SVM") throw FormatError("bad classifier header");
    if (version != 1) throw FormatError("unsupported classifier version " + std::to_string(version));
    if (d <= 0) throw FormatError("bad classifier dimension");
    MarginClassifier m{std::vector<double>(static_cast<std::size_t>(d)), 0.0};
    auto read_real = [&](double& v) {
        std::string tok;
        if (!(in >> tok)) throw FormatError("truncated classifier data");
        char* end = nullptr;
        v = std::strtod(tok.c_str(), &end);
        if (*end != '\0' || !std::isfinite(v)) throw FormatError("bad classifier value: " + tok);
    };
    for (double& w : m.weights) read_real(w);
    read_real(m.bias);
    std::string extra;
    if (in >> extra) throw FormatError("trailing data in classifier");
    return m;
}

void save_classifier(const std::filesystem::path& path, const MarginClassifier& model) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write classifier: " + path.string());
    write_classifier(out, model);
}

MarginClassifier load_classifier(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open classifier: " + path.string());
    try {
        return read_classifier(in);
    } catch (const Error& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

}  // namespace perisal::classify
