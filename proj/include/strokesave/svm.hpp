#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

namespace strokesave::svm {

class SvmError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Linear max-margin classifier over standardized features, plus the
/// sigmoid p = 1 / (1 + exp(a * margin + b)) that turns margins into
/// probabilities of the positive class.
struct SvmModel {
    std::vector<double> weights;
    double bias = 0.0;
    std::vector<double> feature_means;
    std::vector<double> feature_scales;
    double platt_a = -1.0;
    double platt_b = 0.0;

    std::size_t dimension() const noexcept { return weights.size(); }
    bool operator==(const SvmModel&) const = default;
};

struct SvmTrainConfig {
    double lambda = 0.01;
    std::size_t iterations = 10000;
    std::uint64_t seed = 1;
    bool nonnegative_weights = false;
    /// Points per subgradient step; capped at the data size.
    std::size_t batch_size = 32;
};

struct LabeledPoint {
    std::vector<double> x;
    int label = 1;  // +1 or -1
};

struct Standardization {
    std::vector<double> means;
    std::vector<double> scales;
};

/// Column means and population standard deviations. Columns whose deviation
/// is below 1e-12 get scale 1, so a constant column standardizes to zero.
Standardization fit_standardization(std::span<const LabeledPoint> points);
std::vector<double> standardize(const SvmModel& model, std::span<const double> x);

/// lambda/2 * |w|^2 + mean(max(0, 1 - y (w.z + b))) over standardized z.
double hinge_objective(std::span<const double> weights, double bias, double lambda,
                       std::span<const std::vector<double>> standardized, std::span<const int> labels);

/// Pegasos: step 1/(lambda t) on random mini-batches, projection onto the
/// ball of radius 1/sqrt(lambda) (and onto w >= 0 when requested). Returns
/// the candidate with the lowest full objective among the running iterate,
/// the suffix average and the zero start, so the objective never ends above
/// its initial value. Calibration is left at (a, b) = (-1, 0).
SvmModel svm_train(std::span<const LabeledPoint> points, const SvmTrainConfig& cfg);

/// w . standardize(x) + b
double decision(const SvmModel& model, std::span<const double> x);

/// Calibrated probability of the positive class, kept strictly inside (0, 1).
double probability(const SvmModel& model, std::span<const double> x);
double sigmoid_probability(double a, double b, double margin);

/// Mean logistic loss of the sigmoid against Platt's smoothed targets
/// (N+ + 1)/(N+ + 2) and 1/(N- + 2).
double calibration_loss(double a, double b, std::span<const double> margins, std::span<const int> labels);

/// Fits (a, b) by gradient descent with backtracking from (-1, 0). `a` is
/// held at or below zero so probability never decreases with the margin.
SvmModel calibrate(SvmModel model, std::span<const double> margins, std::span<const int> labels);

/// svm_train followed by calibrate on the training margins.
SvmModel train_calibrated(std::span<const LabeledPoint> points, const SvmTrainConfig& cfg);

void save_svm(const SvmModel& model, const std::filesystem::path& path);
SvmModel load_svm(const std::filesystem::path& path);
std::vector<std::uint8_t> serialize(const SvmModel& model);
SvmModel deserialize_svm(std::span<const std::uint8_t> bytes);

}  // namespace strokesave::svm
