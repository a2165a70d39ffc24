#include "strokesave/fusion.hpp"

namespace strokesave::fusion {

FusionInput FusionInput::complete(double vocal, double vascular, double retina, double face) {
    FusionInput in;
    in.set(Modality::vocal, ModalityConfidence(vocal));
    in.set(Modality::vascular, ModalityConfidence(vascular));
    in.set(Modality::retina, ModalityConfidence(retina));
    in.set(Modality::face, ModalityConfidence(face));
    return in;
}

Diagnosis fuse(const svm::SvmModel& model, const FusionInput& input, const std::string& model_version) {
    if (model.weights.size() != 4) {
        throw FusionError("fusion model must have 4 weights, has " + std::to_string(model.weights.size()));
    }
    bool any = false;
    for (const auto& v : input.values) any = any || v.has_value();
    if (!any) throw FusionError("no modalities present");
    if (!input.get(Modality::vascular)) throw FusionError("vascular confidence is required for diagnosis");

    Diagnosis d;
    std::vector<double> x(4);
    for (std::size_t i = 0; i < 4; ++i) {
        const auto& v = input.values[i];
        if (v) {
            ModalityConfidence check(*v);  // range check
            x[i] = check.value();
        } else {
            x[i] = model.feature_means[i];
            d.imputed[i] = true;
        }
    }
    const std::vector<double> z = svm::standardize(model, x);
    for (std::size_t i = 0; i < 4; ++i) d.contributions[i] = model.weights[i] * z[i];
    d.risk_percent = 100.0 * svm::probability(model, x);
    d.at_risk = d.risk_percent >= 50.0;
    d.model_version = model_version;
    return d;
}

svm::SvmModel fusion_train(std::span<const FusionRow> rows, svm::SvmTrainConfig cfg) {
    std::vector<svm::LabeledPoint> points;
    points.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        std::vector<double> x;
        for (const auto& v : rows[r].input.values) {
            if (!v) throw FusionError("training row " + std::to_string(r) + " has a missing modality");
            x.push_back(*v);
        }
        points.push_back({std::move(x), rows[r].positive ? 1 : -1});
    }
    cfg.nonnegative_weights = true;
    return svm::train_calibrated(points, cfg);
}

}  // namespace strokesave::fusion
