#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "strokesave/audio.hpp"
#include "strokesave/face.hpp"
#include "strokesave/fusion.hpp"
#include "strokesave/retina.hpp"
#include "strokesave/vascular.hpp"

namespace strokesave::synth {

enum class CorpusModality { vocal, retina, face, vascular, fusion };

std::string_view to_string(CorpusModality m);
std::optional<CorpusModality> parse_corpus_modality(std::string_view s);

/// Directory names for the two classes; index 1 is the positive class.
std::string_view class_name(CorpusModality m, bool positive);
std::string_view file_extension(CorpusModality m);

struct CorpusSpec {
    CorpusModality modality = CorpusModality::vocal;
    std::size_t n_per_class = 10;
    double difficulty = 0.3;  // 0 = well separated, 1 = heavy overlap
    std::uint64_t seed = 1;

    void validate() const;
};

template <typename T>
struct Labeled {
    T item;
    bool positive = false;
    std::uint64_t seed = 0;  // per-item seed, recorded in the manifest
};

/// Portable random source: mt19937_64 bits mapped by hand so a corpus is
/// byte-identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    double uniform();  // [0, 1)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal();   // Box-Muller
    std::uint64_t bits() { return engine_(); }
    std::size_t below(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }
    /// Beta(4, 2) as the 4th smallest of 5 uniforms.
    double beta42();

private:
    std::mt19937_64 engine_;
    std::optional<double> spare_;
};

/// Seed of item `index` in class `positive` of a corpus seeded with `seed`.
std::uint64_t item_seed(std::uint64_t seed, bool positive, std::size_t index);

// Generators return negatives first, then positives.
std::vector<Labeled<audio::AudioClip>> gen_vocal(const CorpusSpec& spec);
std::vector<Labeled<retina::Image>> gen_retina(const CorpusSpec& spec);
std::vector<Labeled<face::LandmarkSet>> gen_face(const CorpusSpec& spec);
std::vector<Labeled<std::vector<vascular::VitalsSample>>> gen_vitals(const CorpusSpec& spec);
std::vector<Labeled<fusion::FusionInput>> gen_fusion(const CorpusSpec& spec);

// Single-item builders, exposed for tests and the scenario driver.
audio::AudioClip make_voice(Rng& rng, bool slurred, double difficulty);
retina::Image make_fundus(Rng& rng, bool retinopathy, double difficulty);
/// Jittered reference face; when `droop` > 0 one cheek and the matching
/// mouth corner move down by that many interocular units.
face::LandmarkSet make_face(Rng& rng, double droop, double jitter_sigma);
std::vector<vascular::VitalsSample> make_vitals_stream(Rng& rng, bool stroke, double difficulty,
                                                       std::size_t length = 30);
fusion::FusionInput make_fusion_row(Rng& rng, bool positive, double difficulty);

double droop_for_difficulty(double difficulty);
double face_jitter_for_difficulty(double difficulty);

/// Largest frame-to-frame rise of the 10 ms RMS envelope; crisp syllable
/// onsets score high, smeared ones low.
double envelope_sharpness(const audio::AudioClip& clip);

/// Connected components (4-neighbour) of pixels above `threshold` with at
/// least `min_area` pixels.
std::size_t count_bright_blobs(const retina::Image& img, double threshold = 0.8, std::size_t min_area = 4);

struct ManifestEntry {
    std::filesystem::path path;  // relative to the corpus root
    bool positive = false;
    std::uint64_t seed = 0;
};

struct Manifest {
    CorpusSpec spec;
    std::vector<ManifestEntry> entries;
};

/// Writes <out>/<modality>/<class>/<index>.<ext> and <out>/<modality>/manifest.json.
/// Returns the manifest that was written.
Manifest write_corpus(const CorpusSpec& spec, const std::filesystem::path& out);

/// Reads <dir>/manifest.json, or <dir>/<modality>/manifest.json when `dir`
/// is the corpus root. Entry paths are made absolute.
Manifest read_manifest(const std::filesystem::path& dir, std::optional<CorpusModality> modality = {});

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& p);
void write_bytes(const std::filesystem::path& p, std::span<const std::uint8_t> bytes);

std::string format_fusion_row(const fusion::FusionInput& in);
fusion::FusionInput parse_fusion_row(std::string_view json_text);

}  // namespace strokesave::synth
