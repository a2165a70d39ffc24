#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "strokesave/layer.hpp"
#include "strokesave/tensor.hpp"

namespace strokesave::nn {

using ParameterMap = std::map<std::string, Tensor>;
using GradientMap = std::map<std::string, Tensor>;

std::string weight_name(std::size_t layer);
std::string bias_name(std::size_t layer);
std::string recurrent_name(std::size_t layer);

/// Layer stack plus its parameters. The input shape is part of the model so
/// the whole shape chain is known before any data flows through it.
class Model {
public:
    Model() = default;

    /// Builds the stack and draws every weight from uniform(-s, s) with
    /// s = sqrt(6 / (fan_in + fan_out)). Biases start at zero.
    static Model build(Shape input_shape, std::vector<LayerSpec> layers, std::uint64_t seed);

    /// Reassembles a model from stored parts; parameter shapes are checked
    /// against the layer stack.
    static Model assemble(Shape input_shape, std::vector<LayerSpec> layers, std::uint64_t seed,
                          ParameterMap parameters);

    const Shape& input_shape() const noexcept { return input_shape_; }
    const std::vector<LayerSpec>& layers() const noexcept { return layers_; }
    std::uint64_t seed() const noexcept { return seed_; }
    const ParameterMap& parameters() const noexcept { return parameters_; }
    ParameterMap& parameters() noexcept { return parameters_; }

    /// shapes[i] is the input of layer i; shapes.back() is the model output.
    const std::vector<Shape>& shape_chain() const noexcept { return shapes_; }
    const Shape& output_shape() const noexcept { return shapes_.back(); }
    std::size_t parameter_count() const;

    bool operator==(const Model&) const = default;

private:
    Shape input_shape_;
    std::vector<LayerSpec> layers_;
    std::uint64_t seed_ = 0;
    ParameterMap parameters_;
    std::vector<Shape> shapes_;
};

/// Activations of every layer; activations[0] is the input.
struct ForwardTrace {
    std::vector<Tensor> activations;
    const Tensor& output() const { return activations.back(); }
};

Tensor forward(const Model& model, const Tensor& input);
ForwardTrace forward_trace(const Model& model, const Tensor& input);

/// Gradient of a scalar loss w.r.t. every parameter, given dLoss/dOutput.
GradientMap backward(const Model& model, const Tensor& input, const Tensor& loss_grad);
GradientMap backward(const Model& model, const ForwardTrace& trace, const Tensor& loss_grad);

Tensor softmax(const Tensor& logits);

struct LossAndGrad {
    double loss = 0.0;
    Tensor grad;
};

/// Softmax probability of class 1 from a two-logit output, kept strictly
/// inside (0, 1) so extreme logits never report certainty.
double positive_probability(const Tensor& logits);

/// Softmax cross-entropy on a logit vector against a class index.
LossAndGrad softmax_cross_entropy(const Tensor& logits, std::size_t label);

}  // namespace strokesave::nn
