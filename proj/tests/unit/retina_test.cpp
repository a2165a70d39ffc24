#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <string>

#include "strokesave/retina.hpp"

using namespace strokesave;
using namespace strokesave::retina;

namespace {

std::vector<std::uint8_t> bytes_of(const std::string& header, std::vector<std::uint8_t> raster) {
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), raster.begin(), raster.end());
    return out;
}

ImageErrorKind decode_error(const std::vector<std::uint8_t>& bytes) {
    try {
        decode_image(bytes);
    } catch (const ImageError& e) {
        return e.kind();
    }
    ADD_FAILURE() << "expected ImageError";
    return ImageErrorKind::degenerate;
}

Image random_image(std::mt19937_64& rng, std::size_t w, std::size_t h) {
    std::uniform_real_distribution<double> u(0, 1);
    Image img{w, h, std::vector<double>(w * h)};
    for (double& p : img.pixels) p = u(rng);
    return img;
}

// Tent-weighted sum over every source pixel: for each output pixel the
// clamped source coordinate s contributes max(0, 1 - |s - i|) to pixel i.
Image tent_resize_oracle(const Image& src, std::size_t w, std::size_t h) {
    Image out{w, h, std::vector<double>(w * h)};
    auto coord = [](std::size_t d, std::size_t dn, std::size_t sn) {
        double s = (d + 0.5) * (static_cast<double>(sn) / dn) - 0.5;
        if (s < 0) s = 0;
        if (s > sn - 1.0) s = sn - 1.0;
        return s;
    };
    for (std::size_t y = 0; y < h; ++y) {
        const double sy = coord(y, h, src.height);
        for (std::size_t x = 0; x < w; ++x) {
            const double sx = coord(x, w, src.width);
            double acc = 0;
            for (std::size_t j = 0; j < src.height; ++j) {
                const double wy = std::max(0.0, 1.0 - std::abs(sy - static_cast<double>(j)));
                if (wy == 0) continue;
                for (std::size_t i = 0; i < src.width; ++i) {
                    const double wx = std::max(0.0, 1.0 - std::abs(sx - static_cast<double>(i)));
                    acc += wx * wy * src.pixels[j * src.width + i];
                }
            }
            out.pixels[y * w + x] = acc;
        }
    }
    return out;
}

}  // namespace

TEST(DecodeImage, P5Scaling) {
    const auto bytes = bytes_of("P5\n# a comment\n2 2\n255\n", {0, 128, 255, 64});
    const Image img = decode_image(bytes);
    ASSERT_EQ(img.width, 2u);
    ASSERT_EQ(img.height, 2u);
    EXPECT_EQ(img.pixels[0], 0.0);
    EXPECT_NEAR(img.pixels[1], 0.50196, 1e-5);
    EXPECT_EQ(img.pixels[2], 1.0);
    EXPECT_NEAR(img.pixels[3], 0.25098, 1e-5);
}

TEST(DecodeImage, P6Luma) {
    EXPECT_DOUBLE_EQ(decode_image(bytes_of("P6 1 1 255\n", {255, 255, 255})).pixels[0], 1.0);
    EXPECT_NEAR(decode_image(bytes_of("P6 1 1 255\n", {255, 0, 0})).pixels[0], 0.299, 1e-12);
    EXPECT_NEAR(decode_image(bytes_of("P6 1 1 255\n", {0, 255, 0})).pixels[0], 0.587, 1e-12);
    EXPECT_NEAR(decode_image(bytes_of("P6 1 1 255\n", {0, 0, 255})).pixels[0], 0.114, 1e-12);
}

TEST(DecodeImage, P5RoundTripIsByteIdentical) {
    std::mt19937_64 rng(4);
    std::vector<std::uint8_t> raster(13 * 9);
    for (auto& b : raster) b = static_cast<std::uint8_t>(rng());
    const auto bytes = bytes_of("P5\n13 9\n255\n", raster);
    EXPECT_EQ(encode_pgm(decode_image(bytes)), bytes);
}

TEST(DecodeImage, DistinctErrors) {
    EXPECT_EQ(decode_error(bytes_of("P2\n1 1\n255\n", {0})), ImageErrorKind::bad_magic);
    EXPECT_EQ(decode_error(bytes_of("P5\n1 1\n65535\n", {0, 0})), ImageErrorKind::unsupported_maxval);
    EXPECT_EQ(decode_error(bytes_of("P5\n2 2\n255\n", {1, 2, 3})), ImageErrorKind::truncated);
    EXPECT_EQ(decode_error(bytes_of("P6\n2 1\n255\n", {1, 2, 3, 4, 5})), ImageErrorKind::truncated);
    EXPECT_EQ(decode_error(bytes_of("P5\n2", {})), ImageErrorKind::truncated);
    EXPECT_EQ(decode_error(bytes_of("P5\nx 2\n255\n", {})), ImageErrorKind::malformed_header);
}

TEST(Preprocess, ConstantImageGivesZeros) {
    const Image flat{20, 30, std::vector<double>(600, 0.42)};
    const nn::Tensor t = preprocess(flat);
    EXPECT_EQ(t.shape(), (nn::Shape{1, 64, 64}));
    for (double v : t.values()) EXPECT_EQ(v, 0.0);
}

TEST(Preprocess, MedianRemovesSaltPixel) {
    Image img{16, 16, std::vector<double>(256, 0.2)};
    img.at(7, 9) = 1.0;
    img.at(0, 0) = 1.0;
    const Image filtered = median_filter3(img);
    for (double v : filtered.pixels) EXPECT_EQ(v, 0.2);
}

TEST(Preprocess, MedianLeavesFlatRegionsAndStraightEdgesAlone) {
    Image step{12, 10, std::vector<double>(120)};
    for (std::size_t y = 0; y < 10; ++y)
        for (std::size_t x = 0; x < 12; ++x) step.at(x, y) = x < 5 ? 0.1 : 0.9;
    EXPECT_EQ(median_filter3(step), step);
    EXPECT_EQ(median_filter3(median_filter3(step)), step);
}

TEST(Preprocess, BilinearMatchesTentOracle) {
    std::mt19937_64 rng(8);
    for (std::size_t cell : {1u, 2u, 3u, 5u}) {
        Image board{128, 128, std::vector<double>(128 * 128)};
        for (std::size_t y = 0; y < 128; ++y)
            for (std::size_t x = 0; x < 128; ++x) board.at(x, y) = ((x / cell + y / cell) % 2) ? 1.0 : 0.0;
        const Image got = resize_bilinear(board, 64, 64);
        const Image want = tent_resize_oracle(board, 64, 64);
        for (std::size_t i = 0; i < got.pixels.size(); ++i) ASSERT_NEAR(got.pixels[i], want.pixels[i], 1e-9) << cell;
    }
    for (auto [w, h] : {std::pair{37u, 50u}, {64u, 64u}, {200u, 90u}, {9u, 9u}}) {
        const Image img = random_image(rng, w, h);
        const Image got = resize_bilinear(img, 64, 64);
        const Image want = tent_resize_oracle(img, 64, 64);
        for (std::size_t i = 0; i < got.pixels.size(); ++i) ASSERT_NEAR(got.pixels[i], want.pixels[i], 1e-9);
    }
}

TEST(PreprocessProperty, OutputIsStandardized) {
    std::mt19937_64 rng(12);
    std::uniform_int_distribution<std::size_t> dim(8, 150);
    for (int trial = 0; trial < 30; ++trial) {
        const nn::Tensor t = preprocess(random_image(rng, dim(rng), dim(rng)));
        ASSERT_EQ(t.shape(), (nn::Shape{1, 64, 64}));
        double mean = 0, var = 0;
        for (double v : t.values()) mean += v;
        mean /= 4096.0;
        for (double v : t.values()) var += (v - mean) * (v - mean);
        EXPECT_NEAR(mean, 0.0, 1e-9);
        EXPECT_NEAR(std::sqrt(var / 4096.0), 1.0, 1e-6);
    }
}

TEST(Preprocess, RejectsTinyImages) {
    EXPECT_THROW(preprocess(Image{7, 20, std::vector<double>(140, 0.5)}), ImageError);
}

TEST(RetinaModel, ShapeChainAndConfidence) {
    const nn::Model m = retina_model(2);
    EXPECT_EQ(m.shape_chain()[5], (nn::Shape{16, 26, 26}));
    EXPECT_EQ(m.shape_chain()[6], (nn::Shape{16, 2, 2}));
    EXPECT_EQ(m.output_shape(), (nn::Shape{2}));
    std::mt19937_64 rng(1);
    for (int i = 0; i < 5; ++i) {
        const Image img = random_image(rng, 80, 70);
        const double p = retina_confidence(m, img).value();
        EXPECT_GT(p, 0.0);
        EXPECT_LT(p, 1.0);
        EXPECT_EQ(retina_confidence(m, img).value(), p);
    }
}
