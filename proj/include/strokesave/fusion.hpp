#pragma once

#include <array>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>

#include "strokesave/confidence.hpp"
#include "strokesave/svm.hpp"

namespace strokesave::fusion {

class FusionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Per-modality confidences in fusion order (vocal, vascular, retina, face).
/// An empty slot is a modality that was never captured.
struct FusionInput {
    std::array<std::optional<double>, 4> values;

    static FusionInput complete(double vocal, double vascular, double retina, double face);

    void set(Modality m, ModalityConfidence c) { values[static_cast<std::size_t>(m)] = c.value(); }
    const std::optional<double>& get(Modality m) const { return values[static_cast<std::size_t>(m)]; }
    bool operator==(const FusionInput&) const = default;
};

struct Diagnosis {
    bool at_risk = false;
    double risk_percent = 0;
    /// w_i * standardized(x_i); exactly 0 for an imputed slot.
    std::array<double, 4> contributions{};
    std::array<bool, 4> imputed{};
    std::string model_version;

    bool operator==(const Diagnosis&) const = default;
};

/// Vascular must be present. Missing slots are replaced by the model's
/// training mean for that coordinate. at_risk is risk_percent >= 50.
Diagnosis fuse(const svm::SvmModel& model, const FusionInput& input, const std::string& model_version = {});

struct FusionRow {
    FusionInput input;
    bool positive = false;
};

/// Nonnegative-weight SVM plus Platt calibration. Every row must be complete.
svm::SvmModel fusion_train(std::span<const FusionRow> rows, svm::SvmTrainConfig cfg = {});

}  // namespace strokesave::fusion
