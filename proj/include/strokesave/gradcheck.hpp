#pragma once

#include <cstddef>
#include <string>

#include "strokesave/model.hpp"

namespace strokesave::nn {

struct GradCheckResult {
    /// max |analytic - numeric| / max(1e-8, |analytic| + |numeric|) over
    /// every parameter entry that was not flagged as saturated.
    double max_relative_error = 0.0;
    std::string worst_parameter;
    std::size_t checked = 0;
    /// Entries where both gradients are below the resolution of the central
    /// difference; these carry no signal and are reported, not scored.
    std::size_t saturated = 0;
};

/// Compares backward() against central differences of the scalar loss
/// L = sum_i r_i * y_i, where r is a fixed pseudo-random projection.
GradCheckResult grad_check(const Model& model, const Tensor& input, double epsilon = 1e-5);

}  // namespace strokesave::nn
