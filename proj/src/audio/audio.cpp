#include "strokesave/audio.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <numbers>

namespace strokesave::audio {

namespace {

std::uint32_t read_u32(std::span<const std::uint8_t> b, std::size_t at) {
    return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
           (static_cast<std::uint32_t>(b[at + 2]) << 16) | (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

std::uint16_t read_u16(std::span<const std::uint8_t> b, std::size_t at) {
    return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

bool tag_is(std::span<const std::uint8_t> b, std::size_t at, const char* tag) {
    return std::memcmp(b.data() + at, tag, 4) == 0;
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_tag(std::vector<std::uint8_t>& out, const char* tag) { out.insert(out.end(), tag, tag + 4); }

constexpr std::uint16_t kFormatPcm = 1;

}  // namespace

AudioClip decode_wav(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 12 || !tag_is(bytes, 0, "RIFF") || !tag_is(bytes, 8, "WAVE")) {
        throw WavError(WavErrorKind::bad_magic, "not a RIFF/WAVE file");
    }
    bool have_fmt = false;
    AudioClip clip;
    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const std::uint32_t size = read_u32(bytes, pos + 4);
        const std::size_t body = pos + 8;
        const std::size_t available = bytes.size() - body;

        if (tag_is(bytes, pos, "fmt ")) {
            if (size < 16 || available < 16) throw WavError(WavErrorKind::malformed, "fmt chunk too short");
            const std::uint16_t format = read_u16(bytes, body);
            const std::uint16_t channels = read_u16(bytes, body + 2);
            const std::uint32_t rate = read_u32(bytes, body + 4);
            const std::uint16_t bits = read_u16(bytes, body + 14);
            if (format != kFormatPcm || bits != 16) {
                throw WavError(WavErrorKind::unsupported_encoding,
                               "only 16-bit PCM is supported (format " + std::to_string(format) + ", " +
                                   std::to_string(bits) + " bits)");
            }
            if (channels != 1) {
                throw WavError(WavErrorKind::unsupported_channels,
                               "only mono is supported, got " + std::to_string(channels) + " channels");
            }
            if (rate == 0) throw WavError(WavErrorKind::malformed, "sample rate is zero");
            clip.sample_rate = rate;
            have_fmt = true;
        } else if (tag_is(bytes, pos, "data")) {
            if (!have_fmt) throw WavError(WavErrorKind::malformed, "data chunk before fmt chunk");
            if (size > available || size % 2 != 0) {
                throw WavError(WavErrorKind::truncated, "data chunk declares " + std::to_string(size) +
                                                            " bytes, " + std::to_string(available) +
                                                            " available");
            }
            clip.samples.resize(size / 2);
            for (std::size_t i = 0; i < clip.samples.size(); ++i) {
                const auto v = static_cast<std::int16_t>(read_u16(bytes, body + 2 * i));
                clip.samples[i] = static_cast<double>(v) / 32768.0;
            }
            return clip;
        }
        if (size > available) break;
        pos = body + size + (size & 1u);
    }
    if (!have_fmt) throw WavError(WavErrorKind::malformed, "missing fmt chunk");
    throw WavError(WavErrorKind::truncated, "missing data chunk");
}

std::vector<std::uint8_t> encode_wav(const AudioClip& clip) {
    const auto data_bytes = static_cast<std::uint32_t>(clip.samples.size() * 2);
    std::vector<std::uint8_t> out;
    out.reserve(44 + data_bytes);
    put_tag(out, "RIFF");
    put_u32(out, 36 + data_bytes);
    put_tag(out, "WAVE");
    put_tag(out, "fmt ");
    put_u32(out, 16);
    put_u16(out, kFormatPcm);
    put_u16(out, 1);
    put_u32(out, clip.sample_rate);
    put_u32(out, clip.sample_rate * 2);
    put_u16(out, 2);
    put_u16(out, 16);
    put_tag(out, "data");
    put_u32(out, data_bytes);
    for (double s : clip.samples) {
        const double q = std::clamp(std::round(s * 32768.0), -32768.0, 32767.0);
        put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
    }
    return out;
}

Biquad design_low_pass(const FilterSpec& spec, double sample_rate) {
    if (!(sample_rate > 0)) throw FilterError("sample rate must be positive");
    if (!(spec.cutoff_hz > 0)) throw FilterError("cutoff must be positive");
    if (spec.cutoff_hz >= sample_rate / 2) {
        throw FilterError("cutoff " + std::to_string(spec.cutoff_hz) + " Hz is not below Nyquist (" +
                          std::to_string(sample_rate / 2) + " Hz)");
    }
    const double w0 = 2.0 * std::numbers::pi * spec.cutoff_hz / sample_rate;
    Biquad f;
    if (spec.order == 1) {
        const double alpha = 1.0 - std::exp(-w0);
        f.b0 = alpha;
        f.a1 = -(1.0 - alpha);
        return f;
    }
    if (spec.order != 2) throw FilterError("filter order must be 1 or 2, got " + std::to_string(spec.order));
    const double c = std::cos(w0);
    constexpr double q = 1.0 / std::numbers::sqrt2;
    const double alpha = std::sin(w0) / (2.0 * q);
    const double a0 = 1.0 + alpha;
    f.b0 = (1.0 - c) / 2.0 / a0;
    f.b1 = (1.0 - c) / a0;
    f.b2 = f.b0;
    f.a1 = -2.0 * c / a0;
    f.a2 = (1.0 - alpha) / a0;
    return f;
}

double magnitude_response(const Biquad& f, double sample_rate, double freq_hz) {
    const std::complex<double> z1 = std::polar(1.0, -2.0 * std::numbers::pi * freq_hz / sample_rate);
    const std::complex<double> z2 = z1 * z1;
    return std::abs((f.b0 + f.b1 * z1 + f.b2 * z2) / (1.0 + f.a1 * z1 + f.a2 * z2));
}

AudioClip low_pass(const AudioClip& clip, const FilterSpec& spec) {
    const Biquad f = design_low_pass(spec, clip.sample_rate);
    AudioClip out{clip.sample_rate, std::vector<double>(clip.samples.size())};
    double x1 = 0, x2 = 0, y1 = 0, y2 = 0;
    for (std::size_t i = 0; i < clip.samples.size(); ++i) {
        const double x = clip.samples[i];
        const double y = f.b0 * x + f.b1 * x1 + f.b2 * x2 - f.a1 * y1 - f.a2 * y2;
        x2 = x1;
        x1 = x;
        y2 = y1;
        y1 = y;
        out.samples[i] = y;
    }
    return out;
}

AudioClip resample(const AudioClip& clip, std::uint32_t target_rate) {
    if (target_rate == 0 || clip.sample_rate == 0) throw std::invalid_argument("sample rate must be positive");
    if (clip.sample_rate == target_rate || clip.samples.empty()) return {target_rate, clip.samples};
    const double step = static_cast<double>(clip.sample_rate) / target_rate;
    const auto n = static_cast<std::size_t>(
        std::max(1.0, std::round(static_cast<double>(clip.samples.size()) / step)));
    AudioClip out{target_rate, std::vector<double>(n)};
    const std::size_t last = clip.samples.size() - 1;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = i * step;
        const auto k = std::min(static_cast<std::size_t>(t), last);
        const double frac = t - static_cast<double>(k);
        const double next = clip.samples[std::min(k + 1, last)];
        out.samples[i] = clip.samples[k] + frac * (next - clip.samples[k]);
    }
    return out;
}

nn::Tensor frame_features(const AudioClip& clip, std::size_t target_len) {
    if (target_len == 0) throw std::invalid_argument("target_len must be positive");
    if (clip.samples.empty()) throw std::invalid_argument("cannot frame an empty clip");
    const AudioClip at_rate = resample(clip, kModelSampleRate);
    const auto& s = at_rate.samples;

    std::vector<double> framed(target_len, 0.0);
    if (s.size() >= target_len) {
        const std::size_t start = (s.size() - target_len) / 2;
        std::copy_n(s.begin() + static_cast<std::ptrdiff_t>(start), target_len, framed.begin());
    } else {
        std::copy(s.begin(), s.end(), framed.begin());
    }
    double peak = 0.0;
    for (double v : framed) peak = std::max(peak, std::abs(v));
    if (peak > 0.0) {
        for (double& v : framed) v /= peak;
    }
    return nn::Tensor({1, target_len}, std::move(framed));
}

std::vector<nn::LayerSpec> vocal_layers(const VocalDims& dims) {
    std::vector<nn::LayerSpec> layers;
    for (std::size_t c : dims.channels) {
        layers.push_back(nn::LayerSpec::conv1d(c, dims.kernel));
        layers.push_back(nn::LayerSpec::relu());
        layers.push_back(nn::LayerSpec::avgpool1d(dims.pool));
    }
    layers.push_back(nn::LayerSpec::recurrent(dims.hidden));
    layers.push_back(nn::LayerSpec::dense(2));
    return layers;
}

nn::Model vocal_model(std::uint64_t seed, const VocalDims& dims) {
    return nn::Model::build({1, dims.input_length}, vocal_layers(dims), seed);
}

nn::Tensor vocal_input(const AudioClip& clip, std::size_t target_len) {
    return frame_features(low_pass(clip, FilterSpec{}), target_len);
}

ModalityConfidence vocal_confidence(const nn::Model& model, const AudioClip& clip) {
    const std::size_t len = model.input_shape().back();
    return ModalityConfidence(nn::positive_probability(nn::forward(model, vocal_input(clip, len))));
}

}  // namespace strokesave::audio
