#include "strokesave/retina.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>

namespace strokesave::retina {

namespace {

class HeaderReader {
public:
    explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::size_t next_number(const char* what) {
        skip_space_and_comments();
        std::size_t value = 0;
        std::size_t digits = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            value = value * 10 + (bytes_[pos_++] - '0');
            if (++digits > 9) throw ImageError(ImageErrorKind::malformed_header, std::string(what) + " too large");
        }
        if (digits == 0) {
            if (pos_ >= bytes_.size()) throw ImageError(ImageErrorKind::truncated, "header ends before " + std::string(what));
            throw ImageError(ImageErrorKind::malformed_header, std::string("expected ") + what);
        }
        return value;
    }

    // Exactly one whitespace byte separates maxval from the raster.
    std::size_t raster_start() {
        if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
            throw ImageError(ImageErrorKind::malformed_header, "missing whitespace after maxval");
        }
        return pos_ + 1;
    }

private:
    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            if (std::isspace(bytes_[pos_])) {
                ++pos_;
            } else if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 2;
};

}  // namespace

Image decode_image(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
        throw ImageError(ImageErrorKind::bad_magic, "expected a binary PGM (P5) or PPM (P6) image");
    }
    const bool color = bytes[1] == '6';
    HeaderReader header(bytes);
    const std::size_t width = header.next_number("width");
    const std::size_t height = header.next_number("height");
    const std::size_t maxval = header.next_number("maxval");
    if (width == 0 || height == 0) throw ImageError(ImageErrorKind::degenerate, "image has zero size");
    if (maxval != 255) {
        throw ImageError(ImageErrorKind::unsupported_maxval, "maxval must be 255, got " + std::to_string(maxval));
    }
    const std::size_t start = header.raster_start();
    const std::size_t channels = color ? 3 : 1;
    const std::size_t needed = width * height * channels;
    if (bytes.size() - start < needed) {
        throw ImageError(ImageErrorKind::truncated, "raster needs " + std::to_string(needed) + " bytes, " +
                                                        std::to_string(bytes.size() - start) + " present");
    }
    Image img{width, height, std::vector<double>(width * height)};
    const std::uint8_t* p = bytes.data() + start;
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
        if (color) {
            const double luma = 0.299 * p[3 * i] + 0.587 * p[3 * i + 1] + 0.114 * p[3 * i + 2];
            img.pixels[i] = std::min(1.0, luma / 255.0);
        } else {
            img.pixels[i] = p[i] / 255.0;
        }
    }
    return img;
}

std::vector<std::uint8_t> encode_pgm(const Image& img) {
    const std::string header =
        "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.reserve(out.size() + img.pixels.size());
    for (double v : img.pixels) {
        out.push_back(static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)));
    }
    return out;
}

Image median_filter3(const Image& img) {
    Image out{img.width, img.height, std::vector<double>(img.pixels.size())};
    const auto w = static_cast<std::ptrdiff_t>(img.width);
    const auto h = static_cast<std::ptrdiff_t>(img.height);
    std::array<double, 9> window{};
    for (std::ptrdiff_t y = 0; y < h; ++y) {
        for (std::ptrdiff_t x = 0; x < w; ++x) {
            std::size_t k = 0;
            for (std::ptrdiff_t dy = -1; dy <= 1; ++dy) {
                const std::ptrdiff_t yy = std::clamp<std::ptrdiff_t>(y + dy, 0, h - 1);
                for (std::ptrdiff_t dx = -1; dx <= 1; ++dx) {
                    const std::ptrdiff_t xx = std::clamp<std::ptrdiff_t>(x + dx, 0, w - 1);
                    window[k++] = img.pixels[static_cast<std::size_t>(yy * w + xx)];
                }
            }
            std::nth_element(window.begin(), window.begin() + 4, window.end());
            out.pixels[static_cast<std::size_t>(y * w + x)] = window[4];
        }
    }
    return out;
}

Image resize_bilinear(const Image& img, std::size_t width, std::size_t height) {
    if (img.width == 0 || img.height == 0 || width == 0 || height == 0) {
        throw ImageError(ImageErrorKind::degenerate, "cannot resize an empty image");
    }
    auto source_coord = [](std::size_t dst, std::size_t dst_n, std::size_t src_n, std::size_t& lo,
                           double& frac) {
        const double s = (static_cast<double>(dst) + 0.5) * static_cast<double>(src_n) / dst_n - 0.5;
        const double c = std::clamp(s, 0.0, static_cast<double>(src_n - 1));
        lo = std::min(static_cast<std::size_t>(c), src_n - 1);
        frac = c - static_cast<double>(lo);
    };
    Image out{width, height, std::vector<double>(width * height)};
    for (std::size_t y = 0; y < height; ++y) {
        std::size_t y0;
        double fy;
        source_coord(y, height, img.height, y0, fy);
        const std::size_t y1 = std::min(y0 + 1, img.height - 1);
        for (std::size_t x = 0; x < width; ++x) {
            std::size_t x0;
            double fx;
            source_coord(x, width, img.width, x0, fx);
            const std::size_t x1 = std::min(x0 + 1, img.width - 1);
            const double top = img.at(x0, y0) + fx * (img.at(x1, y0) - img.at(x0, y0));
            const double bottom = img.at(x0, y1) + fx * (img.at(x1, y1) - img.at(x0, y1));
            out.at(x, y) = top + fy * (bottom - top);
        }
    }
    return out;
}

nn::Tensor preprocess(const Image& img, std::size_t side) {
    if (img.width < 8 || img.height < 8) {
        throw ImageError(ImageErrorKind::degenerate, "image is " + std::to_string(img.width) + "x" +
                                                         std::to_string(img.height) + ", need at least 8x8");
    }
    if (img.pixels.size() != img.width * img.height) {
        throw ImageError(ImageErrorKind::degenerate, "pixel count does not match dimensions");
    }
    const Image small = resize_bilinear(median_filter3(img), side, side);
    const auto n = static_cast<double>(small.pixels.size());
    // Shifting by the first pixel keeps a flat image exactly flat; a plain
    // running mean leaves rounding residue that the stdev floor would amplify.
    const double shift = small.pixels.front();
    double offset = 0;
    for (double v : small.pixels) offset += v - shift;
    const double mean = shift + offset / n;
    double var = 0;
    for (double v : small.pixels) var += (v - mean) * (v - mean);
    const double sd = std::max(std::sqrt(var / n), 1e-6);
    std::vector<double> values(small.pixels.size());
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = (small.pixels[i] - mean) / sd;
    return nn::Tensor({1, side, side}, std::move(values));
}

std::vector<nn::LayerSpec> retina_layers(const RetinaDims& dims) {
    if (dims.side < 4 * dims.kernel) throw std::invalid_argument("retina input too small for the kernel size");
    const std::size_t map = (dims.side - dims.kernel + 1) / 2 - dims.kernel + 1;
    return {
        nn::LayerSpec::conv2d(dims.conv1, dims.kernel), nn::LayerSpec::relu(), nn::LayerSpec::avgpool2d(2),
        nn::LayerSpec::conv2d(dims.conv2, dims.kernel), nn::LayerSpec::relu(), nn::LayerSpec::avgpool2d(map / 2),
        nn::LayerSpec::dense(2),
    };
}

nn::Model retina_model(std::uint64_t seed, const RetinaDims& dims) {
    return nn::Model::build({1, dims.side, dims.side}, retina_layers(dims), seed);
}

ModalityConfidence retina_confidence(const nn::Model& model, const Image& img) {
    const std::size_t side = model.input_shape().back();
    return ModalityConfidence(nn::positive_probability(nn::forward(model, preprocess(img, side))));
}

}  // namespace strokesave::retina
