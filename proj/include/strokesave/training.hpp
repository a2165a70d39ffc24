#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "strokesave/metrics.hpp"
#include "strokesave/synth.hpp"

namespace strokesave::training {

using synth::CorpusModality;

/// Total train / held-out item counts for a corpus.
struct SplitSizes {
    std::size_t train = 0;
    std::size_t test = 0;
};

/// vocal 100/50, retina 150/50, face 150/50, vascular 400/300, fusion 300/200.
SplitSizes default_split(CorpusModality m);
/// Items per class that `gen` writes by default: (train + test) / 2.
std::size_t default_n_per_class(CorpusModality m);

struct Split {
    std::vector<std::size_t> train;  // indices into manifest entries
    std::vector<std::size_t> test;
};

/// Each class contributes the same fraction to the training side; within a
/// class the lowest indices train. Works for any corpus size.
Split stratified_split(const synth::Manifest& manifest, SplitSizes sizes);

struct TrainOptions {
    // Networks (vocal, retina).
    std::size_t epochs = 0;
    double learning_rate = 0;
    std::size_t batch_size = 1;
    double clip_norm = 0.0;
    // Linear models (face, vascular, fusion).
    double lambda = 0.01;
    std::size_t iterations = 10000;
    std::uint64_t seed = 1;
};

TrainOptions default_options(CorpusModality m);

struct TrainReport {
    CorpusModality modality = CorpusModality::vocal;
    std::size_t train_count = 0;
    std::size_t test_count = 0;
    double train_accuracy = 0;
    metrics::ConfusionMatrix held_out;
    double seconds = 0;

    double test_accuracy() const;
};

using Logger = std::function<void(const std::string&)>;

/// Loads the corpus under `corpus_dir` (root or modality directory), trains
/// on the training side of the split, writes the model to `out`, and scores
/// the held-out side.
TrainReport train_modality(CorpusModality m, const std::filesystem::path& corpus_dir, const std::filesystem::path& out,
                           const TrainOptions& options, const Logger& log = {});

struct EvalReport {
    CorpusModality modality = CorpusModality::vocal;
    metrics::ConfusionMatrix confusion;
};

/// Scores a stored model on the held-out side of the corpus split, or on
/// every item when `held_out_only` is false.
EvalReport evaluate_modality(CorpusModality m, const std::filesystem::path& corpus_dir,
                             const std::filesystem::path& model_path, bool held_out_only = true);

/// Report row label used in tables: "Vocal", "Retinopathy", ...
std::string report_label(CorpusModality m);

}  // namespace strokesave::training
