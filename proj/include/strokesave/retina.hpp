#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "strokesave/confidence.hpp"
#include "strokesave/model.hpp"

namespace strokesave::retina {

/// Grayscale image, pixels in [0, 1], row-major.
struct Image {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<double> pixels;

    double at(std::size_t x, std::size_t y) const { return pixels[y * width + x]; }
    double& at(std::size_t x, std::size_t y) { return pixels[y * width + x]; }
    bool operator==(const Image&) const = default;
};

enum class ImageErrorKind { bad_magic, malformed_header, unsupported_maxval, truncated, degenerate };

class ImageError : public std::runtime_error {
public:
    ImageError(ImageErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ImageErrorKind kind() const noexcept { return kind_; }

private:
    ImageErrorKind kind_;
};

/// Binary PGM (P5) or PPM (P6) with maxval 255. Color is reduced to luma.
Image decode_image(std::span<const std::uint8_t> bytes);

/// P5 with maxval 255; pixels are rounded to the nearest level.
std::vector<std::uint8_t> encode_pgm(const Image& img);

/// 3x3 median with edge pixels replicated.
Image median_filter3(const Image& img);

/// Bilinear resample with pixel centers at (i + 0.5); samples outside the
/// source are clamped to the border.
Image resize_bilinear(const Image& img, std::size_t width, std::size_t height);

inline constexpr std::size_t kRetinaSide = 64;

/// median_filter3, resize to side x side, then standardize to zero mean and
/// unit population stdev (stdev floored at 1e-6). Returns [1, side, side].
nn::Tensor preprocess(const Image& img, std::size_t side = kRetinaSide);

struct RetinaDims {
    std::size_t side = kRetinaSide;
    std::size_t conv1 = 6;
    std::size_t conv2 = 16;
    std::size_t kernel = 5;
};

/// conv-relu-pool, conv-relu, then a coarse pool down to a 2x2 grid per
/// channel and dense(2). The coarse pool keeps the head small enough that
/// lesions anywhere in a quadrant look alike to it.
std::vector<nn::LayerSpec> retina_layers(const RetinaDims& dims = {});
nn::Model retina_model(std::uint64_t seed, const RetinaDims& dims = {});

/// Probability of the "retinopathy" class (index 1).
ModalityConfidence retina_confidence(const nn::Model& model, const Image& img);

}  // namespace strokesave::retina
