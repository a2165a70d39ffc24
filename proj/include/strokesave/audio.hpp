#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "strokesave/confidence.hpp"
#include "strokesave/model.hpp"

namespace strokesave::audio {

struct AudioClip {
    std::uint32_t sample_rate = 16000;
    std::vector<double> samples;  // in [-1, 1]

    bool operator==(const AudioClip&) const = default;
};

enum class WavErrorKind { bad_magic, malformed, unsupported_encoding, unsupported_channels, truncated };

class WavError : public std::runtime_error {
public:
    WavError(WavErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    WavErrorKind kind() const noexcept { return kind_; }

private:
    WavErrorKind kind_;
};

/// RIFF/WAVE, PCM 16-bit, mono. Samples are int16 / 32768 in file order.
AudioClip decode_wav(std::span<const std::uint8_t> bytes);

/// Inverse of decode_wav for samples on the int16 grid; other values are
/// rounded and clipped to [-32768, 32767].
std::vector<std::uint8_t> encode_wav(const AudioClip& clip);

class FilterError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct FilterSpec {
    double cutoff_hz = 3400.0;
    int order = 2;  // 1: single pole, 2: Butterworth biquad
};

/// y[n] = b0 x[n] + b1 x[n-1] + b2 x[n-2] - a1 y[n-1] - a2 y[n-2]
struct Biquad {
    double b0 = 1, b1 = 0, b2 = 0, a1 = 0, a2 = 0;
};

/// Order 1 is the exponential smoother y += alpha (x - y) with
/// alpha = 1 - exp(-2 pi fc / fs). Order 2 is the bilinear-transform
/// Butterworth (Q = 1/sqrt(2)) prewarped at the cutoff.
Biquad design_low_pass(const FilterSpec& spec, double sample_rate);

/// |H(e^{j 2 pi f / fs})| evaluated from the designed coefficients.
double magnitude_response(const Biquad& filter, double sample_rate, double freq_hz);

AudioClip low_pass(const AudioClip& clip, const FilterSpec& spec);

inline constexpr std::uint32_t kModelSampleRate = 16000;
inline constexpr std::size_t kFrameLength = 16384;

/// Linear-interpolation resample.
AudioClip resample(const AudioClip& clip, std::uint32_t target_rate);

/// Resamples to 16 kHz, center-crops or zero-pads (at the end) to
/// `target_len`, then scales to peak |x| = 1 unless the clip is silent.
/// Returns a [1, target_len] tensor.
nn::Tensor frame_features(const AudioClip& clip, std::size_t target_len = kFrameLength);

struct VocalDims {
    std::array<std::size_t, 4> channels{8, 16, 32, 64};
    std::size_t kernel = 9;
    std::size_t pool = 4;
    std::size_t hidden = 32;
    std::size_t input_length = kFrameLength;
};

/// 4 x [conv1d + relu + avgpool1d] -> Elman recurrent -> dense(2).
std::vector<nn::LayerSpec> vocal_layers(const VocalDims& dims = {});
nn::Model vocal_model(std::uint64_t seed, const VocalDims& dims = {});

/// low_pass (3400 Hz, order 2) followed by frame_features.
nn::Tensor vocal_input(const AudioClip& clip, std::size_t target_len = kFrameLength);

/// Softmax probability of the "slurred" class (index 1).
ModalityConfidence vocal_confidence(const nn::Model& model, const AudioClip& clip);

}  // namespace strokesave::audio
