#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace perisal::classify {

struct MarginClassifier {
    std::vector<double> weights;
    double bias = 0.0;

    std::size_t dimension() const noexcept { return weights.size(); }
};

struct TrainOptions {
    double c = 10.0;  // regularization: lambda = 1 / (c * n)
    std::size_t epochs = 50;
    std::uint64_t seed = 42;
};

/// lambda/2 * (|w|^2 + b^2) + mean hinge loss.
double svm_objective(const MarginClassifier& model, std::span<const std::vector<double>> x,
                     std::span<const int> y, double lambda);

/// Stochastic subgradient descent on the hinge loss with step 1/(lambda t),
/// projection onto the 1/sqrt(lambda) ball and a seeded per-epoch visiting
/// order. The bias is carried as a regularized constant feature. Returns the
/// end-of-epoch iterate with the lowest objective, never worse than the zero
/// model. Labels must be +1 or -1 with both classes present.
MarginClassifier train(std::span<const std::vector<double>> x, std::span<const int> y, const TrainOptions& opts);

/// w . x + b. Throws InvalidInput on a dimension mismatch.
double score(const MarginClassifier& model, std::span<const double> x);

/// Text format: `PERISAL-SVM 1 <d>`, a row of d weights, then the bias.
void write_classifier(std::ostream& out, const MarginClassifier& model);
MarginClassifier read_classifier(std::istream& in);
void save_classifier(const std::filesystem::path& path, const MarginClassifier& model);
MarginClassifier load_classifier(const std::filesystem::path& path);

}  // namespace perisal::classify
