#include "strokesave/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace strokesave::nn {

std::size_t argmax(const Tensor& t) {
    return static_cast<std::size_t>(std::max_element(t.values().begin(), t.values().end()) - t.values().begin());
}

namespace {

// Fisher-Yates with our own bounded draw; std::shuffle's sequence is not
// specified by the standard.
void shuffle_indices(std::vector<std::size_t>& idx, std::mt19937_64& rng) {
    for (std::size_t i = idx.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(idx[i - 1], idx[j]);
    }
}

}  // namespace

TrainResult train(Model model, std::span<const Example> dataset, const TrainConfig& cfg,
                  const EpochCallback& on_epoch) {
    if (dataset.empty()) throw TrainError("training set is empty");
    if (!(cfg.learning_rate >= 0.0) || !std::isfinite(cfg.learning_rate)) {
        throw TrainError("learning rate must be finite and non-negative");
    }
    if (cfg.epochs == 0 || cfg.batch_size == 0) throw TrainError("epochs and batch size must be positive");
    if (!(cfg.clip_norm >= 0.0)) throw TrainError("clip norm must be non-negative");
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        if (dataset[i].input.shape() != model.input_shape()) {
            throw ShapeError("example " + std::to_string(i) + " has shape " + to_string(dataset[i].input.shape()) +
                             ", model expects " + to_string(model.input_shape()));
        }
    }

    TrainResult result;
    std::mt19937_64 rng(cfg.seed);
    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), 0);

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        shuffle_indices(order, rng);
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(order.size(), start + cfg.batch_size);
            GradientMap batch_grad;
            for (std::size_t k = start; k < end; ++k) {
                const Example& ex = dataset[order[k]];
                ForwardTrace trace = forward_trace(model, ex.input);
                LossAndGrad lg = softmax_cross_entropy(trace.output(), ex.label);
                loss_sum += lg.loss;
                GradientMap g = backward(model, trace, lg.grad);
                if (batch_grad.empty()) {
                    batch_grad = std::move(g);
                } else {
                    for (auto& [name, t] : batch_grad) {
                        const Tensor& add = g.at(name);
                        for (std::size_t j = 0; j < t.size(); ++j) t[j] += add[j];
                    }
                }
            }
            if (!std::isfinite(loss_sum)) {
                throw DivergenceError(epoch, "non-finite loss in epoch " + std::to_string(epoch));
            }
            double step = cfg.learning_rate / static_cast<double>(end - start);
            if (cfg.clip_norm > 0.0) {
                double sq = 0.0;
                for (const auto& [name, g] : batch_grad) {
                    for (double v : g.values()) sq += v * v;
                }
                const double norm = std::sqrt(sq) / static_cast<double>(end - start);
                if (norm > cfg.clip_norm) step *= cfg.clip_norm / norm;
            }
            for (auto& [name, p] : model.parameters()) {
                const Tensor& g = batch_grad.at(name);
                for (std::size_t j = 0; j < p.size(); ++j) p[j] -= step * g[j];
            }
        }
        for (const auto& [name, p] : model.parameters()) {
            if (!p.all_finite()) {
                throw DivergenceError(epoch, "parameter " + name + " became non-finite in epoch " +
                                                 std::to_string(epoch));
            }
        }
        const double mean_loss = loss_sum / static_cast<double>(dataset.size());
        result.epoch_losses.push_back(mean_loss);
        if (on_epoch) on_epoch(epoch, mean_loss);
    }
    result.model = std::move(model);
    return result;
}

double accuracy(const Model& model, std::span<const Example> dataset) {
    if (dataset.empty()) return 0.0;
    std::size_t correct = 0;
    for (const Example& ex : dataset) {
        if (argmax(forward(model, ex.input)) == ex.label) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(dataset.size());
}

}  // namespace strokesave::nn
