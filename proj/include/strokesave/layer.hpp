#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

#include "strokesave/tensor.hpp"

namespace strokesave::nn {

enum class LayerKind : std::uint8_t {
    dense = 0,
    conv1d = 1,
    conv2d = 2,
    avgpool1d = 3,
    avgpool2d = 4,
    recurrent = 5,
    relu = 6,
    sigmoid = 7,
    softmax = 8,
};

std::string_view to_string(LayerKind kind);

// Tensor layouts:
//   conv1d / avgpool1d / recurrent consume [channels, length]
//   conv2d / avgpool2d consume [channels, height, width]
//   dense flattens any input and produces [units]
// `units` is the output width of dense, the output channel count of conv
// layers and the hidden size of the recurrent cell.
struct LayerSpec {
    LayerKind kind = LayerKind::relu;
    std::size_t units = 0;
    std::size_t kernel = 0;
    std::size_t stride = 1;

    static LayerSpec dense(std::size_t units);
    static LayerSpec conv1d(std::size_t out_channels, std::size_t kernel, std::size_t stride = 1);
    static LayerSpec conv2d(std::size_t out_channels, std::size_t kernel, std::size_t stride = 1);
    static LayerSpec avgpool1d(std::size_t kernel, std::size_t stride = 0);
    static LayerSpec avgpool2d(std::size_t kernel, std::size_t stride = 0);
    static LayerSpec recurrent(std::size_t hidden);
    static LayerSpec relu();
    static LayerSpec sigmoid();
    static LayerSpec softmax();

    bool operator==(const LayerSpec&) const = default;
};

/// floor((in - kernel) / stride) + 1, or ShapeError when kernel > in.
std::size_t sliding_extent(std::size_t in, std::size_t kernel, std::size_t stride);

/// Static shape rule for one layer; throws ShapeError on an incompatible input.
Shape output_shape(const LayerSpec& spec, const Shape& input);

}  // namespace strokesave::nn
