#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>

#include "strokesave/synth.hpp"

using namespace strokesave;
using namespace strokesave::synth;

namespace {

std::filesystem::path scratch(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("strokesave_synth_" + name);
    std::filesystem::remove_all(p);
    return p;
}

CorpusSpec spec_for(CorpusModality m, std::size_t n, double d, std::uint64_t seed = 7) {
    CorpusSpec s;
    s.modality = m;
    s.n_per_class = n;
    s.difficulty = d;
    s.seed = seed;
    return s;
}

}  // namespace

TEST(Rng, UniformAndNormalMoments) {
    Rng rng(42);
    double sum = 0, sq = 0, beta = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        const double z = rng.normal();
        sum += z;
        sq += z * z;
        beta += rng.beta42();
    }
    EXPECT_NEAR(sum / n, 0.0, 0.01);
    EXPECT_NEAR(sq / n, 1.0, 0.02);
    EXPECT_NEAR(beta / n, 4.0 / 6.0, 0.005);  // mean of Beta(4, 2)
}

TEST(Rng, ItemSeedsAreDistinct) {
    std::vector<std::uint64_t> seeds;
    for (int pos = 0; pos < 2; ++pos)
        for (std::size_t i = 0; i < 500; ++i) seeds.push_back(item_seed(3, pos == 1, i));
    std::sort(seeds.begin(), seeds.end());
    EXPECT_EQ(std::adjacent_find(seeds.begin(), seeds.end()), seeds.end());
    EXPECT_NE(item_seed(3, false, 0), item_seed(4, false, 0));
}

TEST(CorpusSpec, Validation) {
    EXPECT_THROW(spec_for(CorpusModality::face, 0, 0.3).validate(), std::invalid_argument);
    EXPECT_THROW(spec_for(CorpusModality::face, 1, 1.5).validate(), std::invalid_argument);
    EXPECT_THROW(gen_face(spec_for(CorpusModality::vocal, 1, 0.3)), std::invalid_argument);
    EXPECT_EQ(parse_corpus_modality("retina"), CorpusModality::retina);
    EXPECT_FALSE(parse_corpus_modality("ears"));
}

TEST(Vocal, EnvelopeSharpnessSeparatesClassesWhenEasy) {
    const auto items = gen_vocal(spec_for(CorpusModality::vocal, 15, 0.0));
    ASSERT_EQ(items.size(), 30u);
    double clear_min = 1e9, slurred_max = -1e9;
    for (const auto& it : items) {
        ASSERT_EQ(it.item.samples.size(), audio::kFrameLength);
        ASSERT_EQ(it.item.sample_rate, audio::kModelSampleRate);
        const double s = envelope_sharpness(it.item);
        if (it.positive)
            slurred_max = std::max(slurred_max, s);
        else
            clear_min = std::min(clear_min, s);
    }
    EXPECT_GT(clear_min, slurred_max);
}

TEST(Vocal, SamplesSurviveWavRoundTrip) {
    Rng rng(5);
    const auto clip = make_voice(rng, true, 0.3);
    const auto back = audio::decode_wav(audio::encode_wav(clip));
    EXPECT_EQ(back.samples, clip.samples);
}

TEST(Retina, BrightBlobsSeparateClassesWhenEasy) {
    const auto items = gen_retina(spec_for(CorpusModality::retina, 15, 0.0));
    for (const auto& it : items) {
        ASSERT_EQ(it.item.width, 128u);
        ASSERT_EQ(it.item.height, 128u);
        const std::size_t blobs = count_bright_blobs(it.item);
        if (it.positive)
            EXPECT_GE(blobs, 1u);
        else
            EXPECT_EQ(blobs, 0u);
    }
}

TEST(Retina, PixelsSurvivePgmRoundTrip) {
    Rng rng(8);
    const auto img = make_fundus(rng, false, 0.5);
    const auto back = retina::decode_image(retina::encode_pgm(img));
    ASSERT_EQ(back.pixels.size(), img.pixels.size());
    for (std::size_t i = 0; i < img.pixels.size(); ++i) ASSERT_DOUBLE_EQ(back.pixels[i], img.pixels[i]);
}

TEST(CountBrightBlobs, HandBuiltImage) {
    retina::Image img{8, 8, std::vector<double>(64, 0.0)};
    // A 2x2 square, a diagonal pair (not 4-connected), and a 1x4 bar.
    for (auto [x, y] : {std::pair{0, 0}, {1, 0}, {0, 1}, {1, 1}}) img.at(x, y) = 1;
    img.at(5, 0) = 1;
    img.at(6, 1) = 1;
    for (int x = 2; x < 6; ++x) img.at(x, 6) = 1;
    EXPECT_EQ(count_bright_blobs(img, 0.8, 4), 2u);
    EXPECT_EQ(count_bright_blobs(img, 0.8, 1), 4u);
}

TEST(Face, DroopShowsUpAsAsymmetry) {
    Rng rng(1);
    for (int i = 0; i < 50; ++i) {
        const auto normal = face::displacement_features(make_face(rng, 0.0, 0.01));
        const auto drooped = face::displacement_features(make_face(rng, 0.2, 0.01));
        EXPECT_LT(normal.asymmetry.magnitude, 0.08);
        EXPECT_GT(drooped.asymmetry.magnitude + drooped.asymmetry.angle, 0.1);
    }
}

TEST(Face, ZeroDroopNoJitterIsSymmetric) {
    Rng rng(2);
    const auto f = face::displacement_features(make_face(rng, 0.0, 0.0));
    EXPECT_NEAR(f.asymmetry.magnitude, 0.0, 1e-9);
    EXPECT_NEAR(f.asymmetry.angle, 0.0, 1e-9);
}

TEST(Face, DifficultyScheduleStaysInRange) {
    for (double d = 0; d <= 1.0; d += 0.1) {
        EXPECT_GE(droop_for_difficulty(d), 0.05 - 1e-12);
        EXPECT_LE(droop_for_difficulty(d), 0.3);
    }
    EXPECT_GT(face_jitter_for_difficulty(1.0), face_jitter_for_difficulty(0.0));
}

TEST(Vitals, StreamsPassInvariantsAndShiftUpwards) {
    const auto items = gen_vitals(spec_for(CorpusModality::vascular, 40, 0.3));
    double sys[2] = {0, 0}, spo2[2] = {0, 0};
    for (const auto& it : items) {
        ASSERT_EQ(it.item.size(), 30u);
        for (std::size_t i = 0; i < it.item.size(); ++i) {
            EXPECT_NO_THROW(vascular::validate_sample(it.item[i], i));
            if (i) {
                EXPECT_GT(it.item[i].timestamp_ms, it.item[i - 1].timestamp_ms);
            }
        }
        sys[it.positive] += it.item.back().systolic;
        spo2[it.positive] += it.item.back().spo2;
    }
    EXPECT_GT(sys[1] / 40 - sys[0] / 40, 30);
    EXPECT_LT(spo2[1] / 40 - spo2[0] / 40, -3);
}

TEST(Fusion, CoordinateSumSeparatesWhenEasy) {
    const auto items = gen_fusion(spec_for(CorpusModality::fusion, 200, 0.0));
    for (const auto& it : items) {
        double s = 0;
        for (const auto& v : it.item.values) {
            ASSERT_TRUE(v.has_value());
            ASSERT_GE(*v, 0.0);
            ASSERT_LE(*v, 1.0);
            s += *v;
        }
        EXPECT_EQ(s > 2.0, it.positive);
    }
}

TEST(Fusion, RowJsonRoundTrip) {
    fusion::FusionInput in = fusion::FusionInput::complete(0.1, 0.25, 0.5, 0.875);
    in.values[2].reset();
    const auto back = parse_fusion_row(format_fusion_row(in));
    EXPECT_EQ(back.values, in.values);
    EXPECT_THROW(parse_fusion_row("[1,2]"), std::invalid_argument);
}

TEST(Corpus, WriteIsDeterministicAndManifestRoundTrips) {
    for (auto m : {CorpusModality::vocal, CorpusModality::retina, CorpusModality::face, CorpusModality::vascular,
                   CorpusModality::fusion}) {
        const auto a = scratch("a"), b = scratch("b");
        const auto spec = spec_for(m, 3, 0.3, 11);
        const Manifest written = write_corpus(spec, a);
        write_corpus(spec, b);
        ASSERT_EQ(written.entries.size(), 6u);

        const Manifest read = read_manifest(a, m);
        EXPECT_EQ(read.spec.n_per_class, 3u);
        EXPECT_EQ(read.spec.seed, 11u);
        ASSERT_EQ(read.entries.size(), 6u);
        for (std::size_t i = 0; i < 6; ++i) {
            EXPECT_EQ(read.entries[i].positive, written.entries[i].positive);
            EXPECT_EQ(read.entries[i].seed, written.entries[i].seed);
            const auto rel = std::filesystem::relative(read.entries[i].path, a / std::string(to_string(m)));
            EXPECT_EQ(read_bytes(read.entries[i].path), read_bytes(b / std::string(to_string(m)) / rel));
            EXPECT_EQ(rel.parent_path().string(), class_name(m, read.entries[i].positive));
        }
        EXPECT_EQ(read_bytes(a / std::string(to_string(m)) / "manifest.json"),
                  read_bytes(b / std::string(to_string(m)) / "manifest.json"));
        EXPECT_THROW(read_manifest(a / std::string(to_string(m)),
                                   m == CorpusModality::face ? CorpusModality::vocal : CorpusModality::face),
                     std::runtime_error);
        std::filesystem::remove_all(a);
        std::filesystem::remove_all(b);
    }
}

TEST(Corpus, FilesDecodeWithTheModalityParsers) {
    const auto dir = scratch("decode");
    write_corpus(spec_for(CorpusModality::face, 2, 0.3), dir);
    write_corpus(spec_for(CorpusModality::vascular, 2, 0.3), dir);
    for (const auto& e : read_manifest(dir, CorpusModality::face).entries) {
        const auto bytes = read_bytes(e.path);
        EXPECT_NO_THROW(face::parse_landmarks(std::string(bytes.begin(), bytes.end())));
    }
    for (const auto& e : read_manifest(dir, CorpusModality::vascular).entries) {
        const auto bytes = read_bytes(e.path);
        EXPECT_EQ(vascular::parse_vitals_csv(std::string(bytes.begin(), bytes.end())).size(), 30u);
    }
    std::filesystem::remove_all(dir);
}
