#include "strokesave/training.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>

#include "strokesave/audio.hpp"
#include "strokesave/face.hpp"
#include "strokesave/fusion.hpp"
#include "strokesave/model_io.hpp"
#include "strokesave/retina.hpp"
#include "strokesave/svm.hpp"
#include "strokesave/train.hpp"
#include "strokesave/vascular.hpp"

namespace strokesave::training {

namespace {

std::string text_of(const std::filesystem::path& p) {
    const auto b = synth::read_bytes(p);
    return {b.begin(), b.end()};
}

bool is_network(CorpusModality m) { return m == CorpusModality::vocal || m == CorpusModality::retina; }

nn::Tensor network_input(CorpusModality m, const std::filesystem::path& p) {
    const auto bytes = synth::read_bytes(p);
    if (m == CorpusModality::vocal) return audio::vocal_input(audio::decode_wav(bytes));
    return retina::preprocess(retina::decode_image(bytes));
}

// The vascular datum is the last sample of a recorded stream.
std::vector<double> linear_features(CorpusModality m, const std::filesystem::path& p) {
    switch (m) {
        case CorpusModality::face: return face::displacement_features(face::parse_landmarks(text_of(p))).as_vector();
        case CorpusModality::vascular: {
            const auto stream = vascular::parse_vitals_csv(text_of(p));
            if (stream.empty()) throw std::runtime_error(p.string() + " holds no samples");
            return vascular::vascular_features(stream.back());
        }
        case CorpusModality::fusion: {
            const auto row = synth::parse_fusion_row(text_of(p));
            std::vector<double> x;
            for (const auto& v : row.values) {
                if (!v) throw std::runtime_error(p.string() + " has a missing confidence");
                x.push_back(*v);
            }
            return x;
        }
        default: throw std::invalid_argument("not a linear modality");
    }
}

struct Loaded {
    synth::Manifest manifest;
    Split split;
};

Loaded load(CorpusModality m, const std::filesystem::path& dir) {
    Loaded l;
    l.manifest = synth::read_manifest(dir, m);
    l.split = stratified_split(l.manifest, default_split(m));
    return l;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void tally(metrics::ConfusionMatrix& cm, bool predicted, bool actual) {
    if (predicted && actual) ++cm.tp;
    else if (predicted) ++cm.fp;
    else if (actual) ++cm.fn;
    else ++cm.tn;
}

}  // namespace

SplitSizes default_split(CorpusModality m) {
    switch (m) {
        case CorpusModality::vocal: return {100, 50};
        case CorpusModality::retina: return {150, 50};
        case CorpusModality::face: return {150, 50};
        case CorpusModality::vascular: return {400, 300};
        case CorpusModality::fusion: return {300, 200};
    }
    return {};
}

std::size_t default_n_per_class(CorpusModality m) {
    const SplitSizes s = default_split(m);
    return (s.train + s.test) / 2;
}

Split stratified_split(const synth::Manifest& manifest, SplitSizes sizes) {
    if (sizes.train + sizes.test == 0) throw std::invalid_argument("split sizes are both zero");
    const double fraction = static_cast<double>(sizes.train) / static_cast<double>(sizes.train + sizes.test);
    Split out;
    for (bool positive : {false, true}) {
        std::vector<std::size_t> cls;
        for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
            if (manifest.entries[i].positive == positive) cls.push_back(i);
        }
        const auto n_train = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(cls.size())));
        for (std::size_t k = 0; k < cls.size(); ++k) (k < n_train ? out.train : out.test).push_back(cls[k]);
    }
    return out;
}

TrainOptions default_options(CorpusModality m) {
    TrainOptions o;
    switch (m) {
        case CorpusModality::vocal:
            // Without the clip the recurrent head either crawls (0.01) or
            // blows up (0.02 and above) depending on the corpus draw.
            o.epochs = 30;
            o.learning_rate = 0.02;
            o.clip_norm = 1.0;
            break;
        case CorpusModality::retina:
            o.epochs = 30;
            o.learning_rate = 0.05;
            break;
        default: break;
    }
    return o;
}

double TrainReport::test_accuracy() const {
    return held_out.total() ? static_cast<double>(held_out.tp + held_out.tn) / static_cast<double>(held_out.total())
                            : 0.0;
}

std::string report_label(CorpusModality m) {
    switch (m) {
        case CorpusModality::vocal: return "Vocal";
        case CorpusModality::retina: return "Retinopathy";
        case CorpusModality::face: return "Facial";
        case CorpusModality::vascular: return "Vascular";
        case CorpusModality::fusion: return "Holistic";
    }
    return "?";
}

TrainReport train_modality(CorpusModality m, const std::filesystem::path& corpus_dir, const std::filesystem::path& out,
                           const TrainOptions& options, const Logger& log) {
    const auto t0 = std::chrono::steady_clock::now();
    const Loaded data = load(m, corpus_dir);
    TrainReport report;
    report.modality = m;
    report.train_count = data.split.train.size();
    report.test_count = data.split.test.size();
    const auto& entries = data.manifest.entries;
    auto say = [&](const std::string& s) {
        if (log) log(s);
    };

    if (is_network(m)) {
        std::vector<nn::Example> train_set, test_set;
        for (std::size_t i : data.split.train) train_set.push_back({network_input(m, entries[i].path), entries[i].positive});
        for (std::size_t i : data.split.test) test_set.push_back({network_input(m, entries[i].path), entries[i].positive});
        nn::TrainConfig cfg;
        cfg.epochs = options.epochs;
        cfg.learning_rate = options.learning_rate;
        cfg.batch_size = options.batch_size;
        cfg.seed = options.seed;
        cfg.clip_norm = options.clip_norm;
        nn::Model initial = m == CorpusModality::vocal ? audio::vocal_model(options.seed) : retina::retina_model(options.seed);
        const nn::TrainResult result = nn::train(std::move(initial), train_set, cfg, [&](std::size_t epoch, double loss) {
            char buf[96];
            std::snprintf(buf, sizeof(buf), "epoch %zu/%zu loss %.4f (%.1fs)", epoch + 1, cfg.epochs, loss,
                          seconds_since(t0));
            say(buf);
        });
        report.train_accuracy = nn::accuracy(result.model, train_set);
        for (const auto& ex : test_set) {
            tally(report.held_out, nn::positive_probability(nn::forward(result.model, ex.input)) >= 0.5, ex.label == 1);
        }
        nn::save_model(result.model, out);
    } else {
        std::vector<svm::LabeledPoint> train_pts;
        for (std::size_t i : data.split.train) {
            train_pts.push_back({linear_features(m, entries[i].path), entries[i].positive ? 1 : -1});
        }
        svm::SvmTrainConfig cfg;
        cfg.lambda = options.lambda;
        cfg.iterations = options.iterations;
        cfg.seed = options.seed;
        // Vascular and fusion inputs all grow with risk, so their weights
        // are kept nonnegative; face features are signed geometry.
        cfg.nonnegative_weights = m != CorpusModality::face;
        const svm::SvmModel model = svm::train_calibrated(train_pts, cfg);
        std::size_t correct = 0;
        for (const auto& p : train_pts) correct += (svm::probability(model, p.x) >= 0.5) == (p.label > 0);
        report.train_accuracy = static_cast<double>(correct) / static_cast<double>(train_pts.size());
        for (std::size_t i : data.split.test) {
            tally(report.held_out, svm::probability(model, linear_features(m, entries[i].path)) >= 0.5,
                  entries[i].positive);
        }
        svm::save_svm(model, out);
    }
    report.seconds = seconds_since(t0);
    return report;
}

EvalReport evaluate_modality(CorpusModality m, const std::filesystem::path& corpus_dir,
                             const std::filesystem::path& model_path, bool held_out_only) {
    const Loaded data = load(m, corpus_dir);
    std::vector<std::size_t> items = data.split.test;
    if (!held_out_only) {
        items.resize(data.manifest.entries.size());
        for (std::size_t i = 0; i < items.size(); ++i) items[i] = i;
    }
    EvalReport report;
    report.modality = m;
    if (is_network(m)) {
        const nn::Model model = nn::load_model(model_path);
        for (std::size_t i : items) {
            const auto& e = data.manifest.entries[i];
            tally(report.confusion, nn::positive_probability(nn::forward(model, network_input(m, e.path))) >= 0.5,
                  e.positive);
        }
    } else {
        const svm::SvmModel model = svm::load_svm(model_path);
        for (std::size_t i : items) {
            const auto& e = data.manifest.entries[i];
            tally(report.confusion, svm::probability(model, linear_features(m, e.path)) >= 0.5, e.positive);
        }
    }
    return report;
}

}  // namespace strokesave::training
