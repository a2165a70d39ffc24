#include "strokesave/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

namespace strokesave::synth {

namespace {

using nlohmann::json;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double quantize_pcm(double v) { return std::clamp(std::round(v * 32767.0), -32768.0, 32767.0) / 32768.0; }
double quantize_byte(double v) { return std::round(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0; }

template <typename T, typename Make>
std::vector<Labeled<T>> generate(const CorpusSpec& spec, CorpusModality expected, Make make) {
    spec.validate();
    if (spec.modality != expected) throw std::invalid_argument("corpus spec is for a different modality");
    std::vector<Labeled<T>> out;
    out.reserve(2 * spec.n_per_class);
    for (bool positive : {false, true}) {
        for (std::size_t i = 0; i < spec.n_per_class; ++i) {
            const std::uint64_t s = item_seed(spec.seed, positive, i);
            Rng rng(s);
            out.push_back({make(rng, positive), positive, s});
        }
    }
    return out;
}

// Trapezoid syllables with fixed 40 ms linear ramps.
std::vector<double> syllable_envelope(Rng& rng, std::size_t n, double fs) {
    std::vector<double> env(n, 0.0);
    const double ramp = 0.040 * fs;
    double t = rng.uniform(0.0, 0.08) * fs;
    while (t < static_cast<double>(n)) {
        const double len = rng.uniform(0.12, 0.25) * fs;
        const double gap = rng.uniform(0.06, 0.15) * fs;
        const double level = rng.uniform(0.7, 1.0);
        for (double k = 0; k < len && t + k < static_cast<double>(n); ++k) {
            const double edge = std::min({k / ramp, (len - k) / ramp, 1.0});
            env[static_cast<std::size_t>(t + k)] = level * std::max(0.0, edge);
        }
        t += len + gap;
    }
    return env;
}

std::vector<double> moving_average(const std::vector<double>& x, std::size_t window) {
    if (window <= 1) return x;
    std::vector<double> prefix(x.size() + 1, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) prefix[i + 1] = prefix[i] + x[i];
    std::vector<double> out(x.size());
    const std::size_t half = window / 2;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const std::size_t lo = i >= half ? i - half : 0;
        const std::size_t hi = std::min(x.size(), i + (window - half));
        out[i] = (prefix[hi] - prefix[lo]) / static_cast<double>(window);
    }
    return out;
}

void paint_disc(retina::Image& img, double cx, double cy, double radius, double value, bool brighten) {
    const auto x0 = static_cast<std::ptrdiff_t>(std::floor(cx - radius - 1));
    const auto x1 = static_cast<std::ptrdiff_t>(std::ceil(cx + radius + 1));
    const auto y0 = static_cast<std::ptrdiff_t>(std::floor(cy - radius - 1));
    const auto y1 = static_cast<std::ptrdiff_t>(std::ceil(cy + radius + 1));
    for (std::ptrdiff_t y = std::max<std::ptrdiff_t>(0, y0); y <= std::min<std::ptrdiff_t>(img.height - 1, y1); ++y) {
        for (std::ptrdiff_t x = std::max<std::ptrdiff_t>(0, x0); x <= std::min<std::ptrdiff_t>(img.width - 1, x1); ++x) {
            const double d = std::hypot(static_cast<double>(x) - cx, static_cast<double>(y) - cy);
            // One-pixel soft edge.
            const double cover = std::clamp(radius + 0.5 - d, 0.0, 1.0);
            if (cover <= 0) continue;
            double& p = img.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y));
            const double target = brighten ? std::max(p, value) : std::min(p, value);
            p += cover * (target - p);
        }
    }
}

json spec_to_json(const CorpusSpec& spec) {
    return {{"modality", to_string(spec.modality)},
            {"n_per_class", spec.n_per_class},
            {"difficulty", spec.difficulty},
            {"seed", spec.seed}};
}

}  // namespace

std::string_view to_string(CorpusModality m) {
    switch (m) {
        case CorpusModality::vocal: return "vocal";
        case CorpusModality::retina: return "retina";
        case CorpusModality::face: return "face";
        case CorpusModality::vascular: return "vascular";
        case CorpusModality::fusion: return "fusion";
    }
    return "unknown";
}

std::optional<CorpusModality> parse_corpus_modality(std::string_view s) {
    for (auto m : {CorpusModality::vocal, CorpusModality::retina, CorpusModality::face, CorpusModality::vascular,
                   CorpusModality::fusion}) {
        if (to_string(m) == s) return m;
    }
    return std::nullopt;
}

std::string_view class_name(CorpusModality m, bool positive) {
    switch (m) {
        case CorpusModality::vocal: return positive ? "slurred" : "clear";
        case CorpusModality::retina: return positive ? "retinopathy" : "normal";
        case CorpusModality::face: return positive ? "paralysis" : "normal";
        case CorpusModality::vascular: return positive ? "stroke" : "normal";
        case CorpusModality::fusion: return positive ? "positive" : "negative";
    }
    return "unknown";
}

std::string_view file_extension(CorpusModality m) {
    switch (m) {
        case CorpusModality::vocal: return ".wav";
        case CorpusModality::retina: return ".pgm";
        case CorpusModality::face: return ".pts";
        case CorpusModality::vascular: return ".csv";
        case CorpusModality::fusion: return ".json";
    }
    return "";
}

void CorpusSpec::validate() const {
    if (n_per_class < 1) throw std::invalid_argument("n_per_class must be at least 1");
    if (!(difficulty >= 0.0 && difficulty <= 1.0)) throw std::invalid_argument("difficulty must lie in [0, 1]");
}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
    if (spare_) {
        const double v = *spare_;
        spare_.reset();
        return v;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(kTwoPi * u2);
    return r * std::cos(kTwoPi * u2);
}

double Rng::beta42() {
    double u[5];
    for (double& v : u) v = uniform();
    std::sort(std::begin(u), std::end(u));
    return u[3];
}

std::uint64_t item_seed(std::uint64_t seed, bool positive, std::size_t index) {
    return splitmix64(seed ^ splitmix64(2 * static_cast<std::uint64_t>(index) + (positive ? 1 : 0) + 1));
}

audio::AudioClip make_voice(Rng& rng, bool slurred, double difficulty) {
    constexpr double fs = audio::kModelSampleRate;
    const std::size_t n = audio::kFrameLength;
    std::vector<double> env = syllable_envelope(rng, n, fs);

    double drift_depth = 0.0;
    if (slurred) {
        const double smear = 0.040 + (1.0 - 0.7 * difficulty) * (rng.uniform(0.150, 0.300) - 0.040);
        env = moving_average(env, static_cast<std::size_t>(smear * fs));
        drift_depth = 0.06 * (1.0 - 0.5 * difficulty);
    }

    const double f0 = rng.uniform(100, 220);
    const double drift_rate = rng.uniform(0.5, 2.0);
    const double drift_phase = rng.uniform(0, kTwoPi);
    constexpr int kHarmonics = 6;
    double amp[kHarmonics], phase[kHarmonics];
    for (int k = 0; k < kHarmonics; ++k) {
        amp[k] = rng.uniform(0.7, 1.3) / (k + 1);
        phase[k] = rng.uniform(0, kTwoPi);
    }
    const double noise = 0.01 + 0.04 * difficulty;

    std::vector<double> x(n);
    double theta = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / fs;
        const double wobble = std::sin(kTwoPi * drift_rate * t + drift_phase);
        theta += kTwoPi * f0 * (1.0 + drift_depth * wobble) / fs;
        double v = 0;
        for (int k = 0; k < kHarmonics; ++k) {
            // Slow formant drift reweights the upper harmonics.
            const double formant = 1.0 + 4.0 * drift_depth * std::sin(kTwoPi * 0.5 * drift_rate * t + k);
            v += amp[k] * formant * std::sin((k + 1) * theta + phase[k]);
        }
        x[i] = env[i] * v + noise * rng.normal();
    }
    double peak = 0;
    for (double v : x) peak = std::max(peak, std::abs(v));
    const double gain = rng.uniform(0.5, 0.9) / std::max(peak, 1e-9);
    audio::AudioClip clip{audio::kModelSampleRate, std::vector<double>(n)};
    for (std::size_t i = 0; i < n; ++i) clip.samples[i] = quantize_pcm(x[i] * gain);
    return clip;
}

retina::Image make_fundus(Rng& rng, bool retinopathy, double difficulty) {
    constexpr std::size_t side = 128;
    retina::Image img{side, side, std::vector<double>(side * side)};
    const double cx = 64 + rng.uniform(-4, 4), cy = 64 + rng.uniform(-4, 4);
    const double field = 60;
    const double tint = rng.uniform(-0.04, 0.04);
    for (std::size_t y = 0; y < side; ++y) {
        for (std::size_t x = 0; x < side; ++x) {
            const double r = std::hypot(x - cx, y - cy) / field;
            img.at(x, y) = r < 1 ? 0.30 + tint + 0.18 * (1 - r * r) : 0.04;
        }
    }

    const double disc_side = rng.uniform() < 0.5 ? -1.0 : 1.0;
    const double dx = cx + disc_side * rng.uniform(22, 30), dy = cy + rng.uniform(-6, 6);

    // Vessels: quadratic curves leaving the disc.
    const std::size_t vessels = 4 + rng.below(3);
    const double irregular = retinopathy ? 0.6 * (1.0 - 0.5 * difficulty) : 0.0;
    for (std::size_t v = 0; v < vessels; ++v) {
        const double angle = rng.uniform(0, kTwoPi);
        const double ex = cx + 52 * std::cos(angle), ey = cy + 52 * std::sin(angle);
        const double bend = rng.uniform(-25, 25);
        const double mx = (dx + ex) / 2 - bend * std::sin(angle), my = (dy + ey) / 2 + bend * std::cos(angle);
        const double width = rng.uniform(1.2, 2.0);
        const double wiggle = rng.uniform(4, 8), wiggle_phase = rng.uniform(0, kTwoPi);
        for (int step = 0; step <= 240; ++step) {
            const double t = step / 240.0;
            const double px = (1 - t) * (1 - t) * dx + 2 * (1 - t) * t * mx + t * t * ex;
            const double py = (1 - t) * (1 - t) * dy + 2 * (1 - t) * t * my + t * t * ey;
            const double w = width * (1.0 - 0.4 * t) * (1.0 + irregular * std::sin(kTwoPi * wiggle * t + wiggle_phase));
            if (std::hypot(px - cx, py - cy) > field) continue;
            const double here = img.at(static_cast<std::size_t>(std::clamp(px, 0.0, 127.0)),
                                       static_cast<std::size_t>(std::clamp(py, 0.0, 127.0)));
            paint_disc(img, px, py, std::max(0.5, w), here - 0.12, false);
        }
    }
    paint_disc(img, dx, dy, rng.uniform(8, 11), 0.18, false);

    if (retinopathy) {
        const std::size_t count = 2 + rng.below(4);
        const double brightness = 0.95 - 0.15 * difficulty;
        for (std::size_t e = 0; e < count; ++e) {
            double ex = 0, ey = 0;
            do {
                const double a = rng.uniform(0, kTwoPi), r = rng.uniform(8, 45);
                ex = cx + r * std::cos(a);
                ey = cy + r * std::sin(a);
            } while (std::hypot(ex - dx, ey - dy) < 14);
            paint_disc(img, ex, ey, rng.uniform(2.5, 4.0), brightness, true);
        }
    } else if (rng.uniform() < 0.5 * difficulty) {
        // Faint reflection that a careless detector could mistake for an exudate.
        paint_disc(img, cx + rng.uniform(-30, 30), cy + rng.uniform(-30, 30), rng.uniform(1.5, 2.5), 0.62, true);
    }

    const double sigma = 0.015 + 0.03 * difficulty;
    for (double& p : img.pixels) p += sigma * rng.normal();
    for (int k = 0; k < 12; ++k) img.pixels[rng.below(img.pixels.size())] = (k % 2) ? 1.0 : 0.0;
    for (double& p : img.pixels) p = quantize_byte(p);
    return img;
}

double droop_for_difficulty(double difficulty) { return 0.3 - 0.25 * difficulty; }
double face_jitter_for_difficulty(double difficulty) { return 0.01 + 0.03 * difficulty; }

face::LandmarkSet make_face(Rng& rng, double droop, double jitter_sigma) {
    face::LandmarkSet lm = face::reference_face();
    for (auto& p : lm.points) {
        p.x += jitter_sigma * rng.normal();
        p.y += jitter_sigma * rng.normal();
    }
    const bool left = (rng.bits() & 1) == 0;
    if (droop > 0) {
        const auto& regions = face::standard_regions();
        for (std::size_t i : regions[left ? face::Region::left_cheek : face::Region::right_cheek]) lm.points[i].y += droop;
        lm.points[left ? 48 : 54].y += droop;  // mouth corner 49 or 55
    }
    // Place the face somewhere in a photo-sized frame.
    const double scale = rng.uniform(80, 200), tx = rng.uniform(150, 450), ty = rng.uniform(150, 450);
    for (auto& p : lm.points) p = {p.x * scale + tx, p.y * scale + ty};
    return lm;
}

std::vector<vascular::VitalsSample> make_vitals_stream(Rng& rng, bool stroke, double difficulty,
                                                       std::size_t length) {
    const double normal[4] = {118, 76, 72, 98};
    const double risk[4] = {185, 105, 110, 90};
    const double sd[4] = {8, 6, 6, 1};
    const double pull = 1.0 - 0.5 * difficulty;
    const std::size_t onset = length / 3 + rng.below(std::max<std::size_t>(1, length / 3));
    const std::int64_t t0 = 1'700'000'000'000LL + static_cast<std::int64_t>(rng.below(1'000'000'000));

    std::vector<vascular::VitalsSample> out;
    for (std::size_t i = 0; i < length; ++i) {
        // Spike onset: three-sample ramp from baseline to the risk means.
        const double progress = stroke && i >= onset ? std::min(1.0, (i - onset + 1) / 3.0) : 0.0;
        double v[4];
        for (int k = 0; k < 4; ++k) {
            const double mean = normal[k] + progress * pull * (risk[k] - normal[k]);
            v[k] = mean + sd[k] * (1.0 + difficulty) * rng.normal();
        }
        vascular::VitalsSample s;
        s.timestamp_ms = t0 + static_cast<std::int64_t>(1000 * i);
        s.systolic = std::round(std::clamp(v[0], 60.0, 260.0) * 10) / 10;
        s.diastolic = std::round(std::clamp(v[1], 40.0, s.systolic - 10) * 10) / 10;
        s.heart_rate = std::round(std::clamp(v[2], 35.0, 220.0) * 10) / 10;
        s.spo2 = std::round(std::clamp(v[3], 70.0, 100.0) * 10) / 10;
        out.push_back(s);
    }
    return out;
}

fusion::FusionInput make_fusion_row(Rng& rng, bool positive, double difficulty) {
    double v[4];
    for (double& x : v) {
        const double high = 0.5 * (1.0 - difficulty) + (0.5 + 0.5 * difficulty) * rng.beta42();
        x = positive ? high : 1.0 - high;
    }
    return fusion::FusionInput::complete(v[0], v[1], v[2], v[3]);
}

std::vector<Labeled<audio::AudioClip>> gen_vocal(const CorpusSpec& spec) {
    return generate<audio::AudioClip>(spec, CorpusModality::vocal,
                                      [&](Rng& rng, bool pos) { return make_voice(rng, pos, spec.difficulty); });
}

std::vector<Labeled<retina::Image>> gen_retina(const CorpusSpec& spec) {
    return generate<retina::Image>(spec, CorpusModality::retina,
                                   [&](Rng& rng, bool pos) { return make_fundus(rng, pos, spec.difficulty); });
}

std::vector<Labeled<face::LandmarkSet>> gen_face(const CorpusSpec& spec) {
    const double sigma = face_jitter_for_difficulty(spec.difficulty);
    const double droop = droop_for_difficulty(spec.difficulty);
    return generate<face::LandmarkSet>(spec, CorpusModality::face, [&](Rng& rng, bool pos) {
        const double d = pos ? std::clamp(droop * rng.uniform(0.9, 1.1), 0.05, 0.3) : 0.0;
        return make_face(rng, d, sigma);
    });
}

std::vector<Labeled<std::vector<vascular::VitalsSample>>> gen_vitals(const CorpusSpec& spec) {
    return generate<std::vector<vascular::VitalsSample>>(
        spec, CorpusModality::vascular, [&](Rng& rng, bool pos) { return make_vitals_stream(rng, pos, spec.difficulty); });
}

std::vector<Labeled<fusion::FusionInput>> gen_fusion(const CorpusSpec& spec) {
    return generate<fusion::FusionInput>(spec, CorpusModality::fusion,
                                         [&](Rng& rng, bool pos) { return make_fusion_row(rng, pos, spec.difficulty); });
}

double envelope_sharpness(const audio::AudioClip& clip) {
    const std::size_t frame = std::max<std::size_t>(1, clip.sample_rate / 100);
    std::vector<double> env;
    for (std::size_t start = 0; start + frame <= clip.samples.size(); start += frame) {
        double e = 0;
        for (std::size_t i = start; i < start + frame; ++i) e += clip.samples[i] * clip.samples[i];
        env.push_back(std::sqrt(e / static_cast<double>(frame)));
    }
    double peak = 0, rise = 0;
    for (double e : env) peak = std::max(peak, e);
    for (std::size_t i = 1; i < env.size(); ++i) rise = std::max(rise, env[i] - env[i - 1]);
    return peak > 0 ? rise / peak : 0.0;
}

std::size_t count_bright_blobs(const retina::Image& img, double threshold, std::size_t min_area) {
    std::vector<char> seen(img.pixels.size(), 0);
    std::vector<std::size_t> stack;
    std::size_t blobs = 0;
    for (std::size_t start = 0; start < img.pixels.size(); ++start) {
        if (seen[start] || img.pixels[start] <= threshold) continue;
        std::size_t area = 0;
        stack.push_back(start);
        seen[start] = 1;
        while (!stack.empty()) {
            const std::size_t p = stack.back();
            stack.pop_back();
            ++area;
            const std::size_t x = p % img.width, y = p / img.width;
            auto visit = [&](std::size_t q) {
                if (!seen[q] && img.pixels[q] > threshold) {
                    seen[q] = 1;
                    stack.push_back(q);
                }
            };
            if (x > 0) visit(p - 1);
            if (x + 1 < img.width) visit(p + 1);
            if (y > 0) visit(p - img.width);
            if (y + 1 < img.height) visit(p + img.width);
        }
        if (area >= min_area) ++blobs;
    }
    return blobs;
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + p.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::filesystem::path& p, std::span<const std::uint8_t> bytes) {
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("short write to " + p.string());
}

std::string format_fusion_row(const fusion::FusionInput& in) {
    json j = json::object();
    for (Modality m : kAllModalities) {
        const auto& v = in.get(m);
        j[std::string(to_string(m))] = v ? json(*v) : json(nullptr);
    }
    return j.dump() + "\n";
}

fusion::FusionInput parse_fusion_row(std::string_view text) {
    const json j = json::parse(text);
    if (!j.is_object()) throw std::invalid_argument("fusion row must be a JSON object");
    fusion::FusionInput in;
    for (Modality m : kAllModalities) {
        const auto it = j.find(std::string(to_string(m)));
        if (it != j.end() && !it->is_null()) in.set(m, ModalityConfidence(it->get<double>()));
    }
    return in;
}

Manifest write_corpus(const CorpusSpec& spec, const std::filesystem::path& out) {
    spec.validate();
    const std::filesystem::path root = out / std::string(to_string(spec.modality));
    Manifest manifest{spec, {}};

    auto emit = [&](bool positive, std::size_t index, std::uint64_t seed, const std::vector<std::uint8_t>& bytes) {
        char name[32];
        std::snprintf(name, sizeof(name), "%04zu", index);
        const std::filesystem::path rel = std::filesystem::path(std::string(class_name(spec.modality, positive))) /
                                          (std::string(name) + std::string(file_extension(spec.modality)));
        write_bytes(root / rel, bytes);
        manifest.entries.push_back({rel, positive, seed});
    };
    auto as_bytes = [](const std::string& s) { return std::vector<std::uint8_t>(s.begin(), s.end()); };

    // Generate one class index at a time so large corpora never sit in memory.
    for (bool positive : {false, true}) {
        for (std::size_t i = 0; i < spec.n_per_class; ++i) {
            const std::uint64_t s = item_seed(spec.seed, positive, i);
            Rng rng(s);
            switch (spec.modality) {
                case CorpusModality::vocal:
                    emit(positive, i, s, audio::encode_wav(make_voice(rng, positive, spec.difficulty)));
                    break;
                case CorpusModality::retina:
                    emit(positive, i, s, retina::encode_pgm(make_fundus(rng, positive, spec.difficulty)));
                    break;
                case CorpusModality::face: {
                    const double d = positive ? std::clamp(droop_for_difficulty(spec.difficulty) * rng.uniform(0.9, 1.1),
                                                           0.05, 0.3)
                                              : 0.0;
                    emit(positive, i, s,
                         as_bytes(face::format_landmarks(make_face(rng, d, face_jitter_for_difficulty(spec.difficulty)))));
                    break;
                }
                case CorpusModality::vascular:
                    emit(positive, i, s,
                         as_bytes(vascular::format_vitals_csv(make_vitals_stream(rng, positive, spec.difficulty))));
                    break;
                case CorpusModality::fusion:
                    emit(positive, i, s, as_bytes(format_fusion_row(make_fusion_row(rng, positive, spec.difficulty))));
                    break;
            }
        }
    }

    json j = spec_to_json(spec);
    j["classes"] = {class_name(spec.modality, false), class_name(spec.modality, true)};
    json items = json::array();
    for (const auto& e : manifest.entries) {
        items.push_back({{"path", e.path.generic_string()},
                         {"label", class_name(spec.modality, e.positive)},
                         {"positive", e.positive},
                         {"seed", e.seed}});
    }
    j["items"] = std::move(items);
    const std::string text = j.dump(2) + "\n";
    write_bytes(root / "manifest.json", as_bytes(text));
    return manifest;
}

Manifest read_manifest(const std::filesystem::path& dir, std::optional<CorpusModality> modality) {
    std::filesystem::path root = dir;
    if (!std::filesystem::exists(root / "manifest.json") && modality) root = dir / std::string(to_string(*modality));
    const std::filesystem::path file = root / "manifest.json";
    if (!std::filesystem::exists(file)) throw std::runtime_error("no manifest.json under " + dir.string());
    const auto bytes = read_bytes(file);
    const json j = json::parse(bytes.begin(), bytes.end());

    Manifest m;
    const auto mod = parse_corpus_modality(j.at("modality").get<std::string>());
    if (!mod) throw std::runtime_error("manifest names unknown modality");
    if (modality && *mod != *modality) {
        throw std::runtime_error("manifest is for " + std::string(to_string(*mod)) + ", expected " +
                                 std::string(to_string(*modality)));
    }
    m.spec = {*mod, j.at("n_per_class").get<std::size_t>(), j.at("difficulty").get<double>(),
              j.at("seed").get<std::uint64_t>()};
    for (const auto& item : j.at("items")) {
        m.entries.push_back({root / item.at("path").get<std::string>(), item.at("positive").get<bool>(),
                             item.at("seed").get<std::uint64_t>()});
    }
    return m;
}

}  // namespace strokesave::synth
