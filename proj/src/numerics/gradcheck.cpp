#include "strokesave/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace strokesave::nn {

namespace {

constexpr double kSaturationFloor = 1e-7;

Tensor projection(const Shape& shape) {
    std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
    Tensor r(shape);
    for (double& v : r.values()) v = static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0;
    return r;
}

double projected_loss(const Model& model, const Tensor& input, const Tensor& r) {
    const Tensor y = forward(model, input);
    double loss = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) loss += r[i] * y[i];
    return loss;
}

}  // namespace

GradCheckResult grad_check(const Model& model, const Tensor& input, double epsilon) {
    const Tensor r = projection(model.output_shape());
    const GradientMap analytic = backward(model, input, r);

    GradCheckResult result;
    Model probe = model;
    for (auto& [name, p] : probe.parameters()) {
        const Tensor& a = analytic.at(name);
        for (std::size_t j = 0; j < p.size(); ++j) {
            const double saved = p[j];
            p[j] = saved + epsilon;
            const double up = projected_loss(probe, input, r);
            p[j] = saved - epsilon;
            const double down = projected_loss(probe, input, r);
            p[j] = saved;

            const double numeric = (up - down) / (2.0 * epsilon);
            const double scale = std::abs(a[j]) + std::abs(numeric);
            if (scale < kSaturationFloor) {
                ++result.saturated;
                continue;
            }
            const double rel = std::abs(a[j] - numeric) / std::max(1e-8, scale);
            ++result.checked;
            if (rel > result.max_relative_error) {
                result.max_relative_error = rel;
                result.worst_parameter = name + "[" + std::to_string(j) + "]";
            }
        }
    }
    return result;
}

}  // namespace strokesave::nn
