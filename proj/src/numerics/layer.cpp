#include "strokesave/layer.hpp"

#include <string>

namespace strokesave::nn {

std::string_view to_string(LayerKind kind) {
    switch (kind) {
        case LayerKind::dense: return "dense";
        case LayerKind::conv1d: return "conv1d";
        case LayerKind::conv2d: return "conv2d";
        case LayerKind::avgpool1d: return "avgpool1d";
        case LayerKind::avgpool2d: return "avgpool2d";
        case LayerKind::recurrent: return "recurrent";
        case LayerKind::relu: return "relu";
        case LayerKind::sigmoid: return "sigmoid";
        case LayerKind::softmax: return "softmax";
    }
    return "unknown";
}

LayerSpec LayerSpec::dense(std::size_t units) { return {LayerKind::dense, units, 0, 1}; }
LayerSpec LayerSpec::conv1d(std::size_t out_channels, std::size_t kernel, std::size_t stride) {
    return {LayerKind::conv1d, out_channels, kernel, stride};
}
LayerSpec LayerSpec::conv2d(std::size_t out_channels, std::size_t kernel, std::size_t stride) {
    return {LayerKind::conv2d, out_channels, kernel, stride};
}
LayerSpec LayerSpec::avgpool1d(std::size_t kernel, std::size_t stride) {
    return {LayerKind::avgpool1d, 0, kernel, stride == 0 ? kernel : stride};
}
LayerSpec LayerSpec::avgpool2d(std::size_t kernel, std::size_t stride) {
    return {LayerKind::avgpool2d, 0, kernel, stride == 0 ? kernel : stride};
}
LayerSpec LayerSpec::recurrent(std::size_t hidden) { return {LayerKind::recurrent, hidden, 0, 1}; }
LayerSpec LayerSpec::relu() { return {LayerKind::relu, 0, 0, 1}; }
LayerSpec LayerSpec::sigmoid() { return {LayerKind::sigmoid, 0, 0, 1}; }
LayerSpec LayerSpec::softmax() { return {LayerKind::softmax, 0, 0, 1}; }

std::size_t sliding_extent(std::size_t in, std::size_t kernel, std::size_t stride) {
    if (stride == 0) throw ShapeError("stride must be at least 1");
    if (kernel == 0) throw ShapeError("kernel must be at least 1");
    if (kernel > in) {
        throw ShapeError("kernel " + std::to_string(kernel) + " exceeds input extent " + std::to_string(in));
    }
    return (in - kernel) / stride + 1;
}

static void require_rank(const LayerSpec& spec, const Shape& input, std::size_t rank) {
    if (input.size() != rank) {
        throw ShapeError(std::string(to_string(spec.kind)) + " expects rank " + std::to_string(rank) +
                         " input, got " + to_string(input));
    }
}

static void require_units(const LayerSpec& spec) {
    if (spec.units == 0) throw ShapeError(std::string(to_string(spec.kind)) + " needs a positive width");
}

Shape output_shape(const LayerSpec& spec, const Shape& input) {
    if (input.empty()) throw ShapeError("empty input shape");
    switch (spec.kind) {
        case LayerKind::dense:
            require_units(spec);
            return {spec.units};
        case LayerKind::conv1d:
            require_rank(spec, input, 2);
            require_units(spec);
            return {spec.units, sliding_extent(input[1], spec.kernel, spec.stride)};
        case LayerKind::conv2d:
            require_rank(spec, input, 3);
            require_units(spec);
            return {spec.units, sliding_extent(input[1], spec.kernel, spec.stride),
                    sliding_extent(input[2], spec.kernel, spec.stride)};
        case LayerKind::avgpool1d:
            require_rank(spec, input, 2);
            return {input[0], sliding_extent(input[1], spec.kernel, spec.stride)};
        case LayerKind::avgpool2d:
            require_rank(spec, input, 3);
            return {input[0], sliding_extent(input[1], spec.kernel, spec.stride),
                    sliding_extent(input[2], spec.kernel, spec.stride)};
        case LayerKind::recurrent:
            require_rank(spec, input, 2);
            require_units(spec);
            return {spec.units};
        case LayerKind::relu:
        case LayerKind::sigmoid:
        case LayerKind::softmax:
            return input;
    }
    throw ShapeError("unknown layer kind");
}

}  // namespace strokesave::nn
