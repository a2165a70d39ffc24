#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "strokesave/model.hpp"

namespace strokesave::nn {

struct TrainConfig {
    double learning_rate = 0.01;
    std::size_t epochs = 10;
    std::size_t batch_size = 1;
    std::uint64_t seed = 1;
    // When positive, a batch gradient whose global L2 norm exceeds this is
    // rescaled to it before the step. 0 leaves gradients untouched.
    double clip_norm = 0.0;
};

struct Example {
    Tensor input;
    std::size_t label = 0;
};

struct TrainResult {
    Model model;
    std::vector<double> epoch_losses;
};

class TrainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Thrown when an epoch produces a non-finite loss.
class DivergenceError : public TrainError {
public:
    DivergenceError(std::size_t epoch, const std::string& what) : TrainError(what), epoch_(epoch) {}
    std::size_t epoch() const noexcept { return epoch_; }

private:
    std::size_t epoch_;
};

using EpochCallback = std::function<void(std::size_t epoch, double mean_loss)>;

/// Mini-batch SGD on softmax cross-entropy. The example order is reshuffled
/// every epoch from `cfg.seed`, so identical inputs give identical bytes.
TrainResult train(Model model, std::span<const Example> dataset, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});

/// Fraction of examples whose argmax logit equals the label.
double accuracy(const Model& model, std::span<const Example> dataset);

std::size_t argmax(const Tensor& t);

}  // namespace strokesave::nn
