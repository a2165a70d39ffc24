#include "strokesave/svm.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "strokesave/model_io.hpp"

namespace strokesave::svm {

namespace {

constexpr double kProbabilityFloor = 1e-12;

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double softplus(double z) {
    return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

void validate_training_set(std::span<const LabeledPoint> points) {
    if (points.size() < 2) throw SvmError("need at least two training points");
    const std::size_t dim = points.front().x.size();
    if (dim == 0) throw SvmError("feature vectors are empty");
    bool pos = false, neg = false;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (points[i].x.size() != dim) {
            throw SvmError("point " + std::to_string(i) + " has dimension " + std::to_string(points[i].x.size()) +
                           ", expected " + std::to_string(dim));
        }
        if (points[i].label == 1) {
            pos = true;
        } else if (points[i].label == -1) {
            neg = true;
        } else {
            throw SvmError("labels must be +1 or -1");
        }
        for (double v : points[i].x) {
            if (!std::isfinite(v)) throw SvmError("point " + std::to_string(i) + " has a non-finite feature");
        }
    }
    if (!pos || !neg) throw SvmError("training set contains a single class");
}

void require_both_labels(std::span<const int> labels) {
    const bool pos = std::find(labels.begin(), labels.end(), 1) != labels.end();
    const bool neg = std::find(labels.begin(), labels.end(), -1) != labels.end();
    if (!pos || !neg) throw SvmError("calibration set contains a single class");
}

}  // namespace

Standardization fit_standardization(std::span<const LabeledPoint> points) {
    const std::size_t dim = points.front().x.size();
    Standardization s{std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0)};
    const double n = static_cast<double>(points.size());
    for (const auto& p : points) {
        for (std::size_t j = 0; j < dim; ++j) s.means[j] += p.x[j];
    }
    for (double& m : s.means) m /= n;
    for (const auto& p : points) {
        for (std::size_t j = 0; j < dim; ++j) {
            const double d = p.x[j] - s.means[j];
            s.scales[j] += d * d;
        }
    }
    for (double& sc : s.scales) {
        sc = std::sqrt(sc / n);
        if (!(sc >= 1e-12)) sc = 1.0;
    }
    return s;
}

std::vector<double> standardize(const SvmModel& model, std::span<const double> x) {
    if (x.size() != model.dimension()) {
        throw SvmError("feature dimension " + std::to_string(x.size()) + " does not match model dimension " +
                       std::to_string(model.dimension()));
    }
    std::vector<double> z(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) z[j] = (x[j] - model.feature_means[j]) / model.feature_scales[j];
    return z;
}

double hinge_objective(std::span<const double> weights, double bias, double lambda,
                       std::span<const std::vector<double>> standardized, std::span<const int> labels) {
    double hinge = 0.0;
    for (std::size_t i = 0; i < standardized.size(); ++i) {
        hinge += std::max(0.0, 1.0 - labels[i] * (dot(weights, standardized[i]) + bias));
    }
    return 0.5 * lambda * dot(weights, weights) + hinge / static_cast<double>(standardized.size());
}

SvmModel svm_train(std::span<const LabeledPoint> points, const SvmTrainConfig& cfg) {
    if (!(cfg.lambda > 0.0)) throw SvmError("lambda must be positive");
    if (cfg.iterations == 0) throw SvmError("iterations must be at least 1");
    validate_training_set(points);

    SvmModel model;
    Standardization st = fit_standardization(points);
    model.feature_means = st.means;
    model.feature_scales = st.scales;
    const std::size_t n = points.size();
    const std::size_t dim = st.means.size();

    std::vector<std::vector<double>> z(n);
    std::vector<int> y(n);
    double radius = 0.0;
    model.weights.assign(dim, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        z[i] = standardize(model, points[i].x);
        y[i] = points[i].label;
        radius = std::max(radius, std::sqrt(dot(z[i], z[i])));
    }

    const double lambda = cfg.lambda;
    const double w_bound = 1.0 / std::sqrt(lambda);
    // Past this offset every point of one class already clears the margin,
    // so larger |b| only adds hinge loss on the other class.
    const double b_bound = 1.0 + radius * w_bound;
    const std::size_t k = std::min(std::max<std::size_t>(cfg.batch_size, 1), n);
    const bool full_batch = k == n;
    const std::size_t eval_every = n <= 64 ? 1 : 50;

    std::vector<double> w(dim, 0.0), w_avg(dim, 0.0), best_w(dim, 0.0);
    double b = 0.0, b_avg = 0.0, best_b = 0.0;
    double best_obj = hinge_objective(w, b, lambda, z, y);
    std::size_t avg_count = 0;
    const std::size_t avg_start = cfg.iterations / 2;

    std::mt19937_64 rng(cfg.seed);
    std::vector<double> step_w(dim);
    for (std::size_t t = 1; t <= cfg.iterations; ++t) {
        const double eta = 1.0 / (lambda * static_cast<double>(t));
        std::fill(step_w.begin(), step_w.end(), 0.0);
        double step_b = 0.0;
        for (std::size_t r = 0; r < k; ++r) {
            const std::size_t i = full_batch ? r : static_cast<std::size_t>(rng() % n);
            if (y[i] * (dot(w, z[i]) + b) < 1.0) {
                for (std::size_t j = 0; j < dim; ++j) step_w[j] += y[i] * z[i][j];
                step_b += y[i];
            }
        }
        const double shrink = 1.0 - eta * lambda;
        for (std::size_t j = 0; j < dim; ++j) {
            w[j] = shrink * w[j] + eta / static_cast<double>(k) * step_w[j];
            if (cfg.nonnegative_weights && w[j] < 0.0) w[j] = 0.0;
        }
        const double norm = std::sqrt(dot(w, w));
        if (norm > w_bound) {
            for (double& v : w) v *= w_bound / norm;
        }
        b = std::clamp(b + eta / static_cast<double>(k) * step_b, -b_bound, b_bound);

        if (t > avg_start) {
            ++avg_count;
            const double f = 1.0 / static_cast<double>(avg_count);
            for (std::size_t j = 0; j < dim; ++j) w_avg[j] += (w[j] - w_avg[j]) * f;
            b_avg += (b - b_avg) * f;
        }
        if (t % eval_every == 0 || t == cfg.iterations) {
            const double obj = hinge_objective(w, b, lambda, z, y);
            if (obj < best_obj) {
                best_obj = obj;
                best_w = w;
                best_b = b;
            }
        }
    }
    if (avg_count > 0 && hinge_objective(w_avg, b_avg, lambda, z, y) < best_obj) {
        best_w = w_avg;
        best_b = b_avg;
    }
    model.weights = best_w;
    model.bias = best_b;
    return model;
}

double decision(const SvmModel& model, std::span<const double> x) {
    const std::vector<double> z = standardize(model, x);
    return dot(model.weights, z) + model.bias;
}

double sigmoid_probability(double a, double b, double margin) {
    const double p = 1.0 / (1.0 + std::exp(a * margin + b));
    return std::clamp(p, kProbabilityFloor, 1.0 - kProbabilityFloor);
}

double probability(const SvmModel& model, std::span<const double> x) {
    return sigmoid_probability(model.platt_a, model.platt_b, decision(model, x));
}

double calibration_loss(double a, double b, std::span<const double> margins, std::span<const int> labels) {
    const double n_pos = static_cast<double>(std::count(labels.begin(), labels.end(), 1));
    const double n_neg = static_cast<double>(labels.size()) - n_pos;
    const double t_pos = (n_pos + 1.0) / (n_pos + 2.0);
    const double t_neg = 1.0 / (n_neg + 2.0);
    double loss = 0.0;
    for (std::size_t i = 0; i < margins.size(); ++i) {
        const double t = labels[i] == 1 ? t_pos : t_neg;
        const double z = a * margins[i] + b;
        loss += softplus(z) - (1.0 - t) * z;
    }
    return loss / static_cast<double>(margins.size());
}

SvmModel calibrate(SvmModel model, std::span<const double> margins, std::span<const int> labels) {
    if (margins.size() != labels.size() || margins.empty()) {
        throw SvmError("calibration needs one label per margin");
    }
    require_both_labels(labels);
    const double n_pos = static_cast<double>(std::count(labels.begin(), labels.end(), 1));
    const double n_neg = static_cast<double>(labels.size()) - n_pos;
    const double t_pos = (n_pos + 1.0) / (n_pos + 2.0);
    const double t_neg = 1.0 / (n_neg + 2.0);
    const double n = static_cast<double>(margins.size());

    double a = -1.0, b = 0.0;
    double loss = calibration_loss(a, b, margins, labels);
    double step = 1.0;
    for (int iter = 0; iter < 2000; ++iter) {
        double ga = 0.0, gb = 0.0;
        for (std::size_t i = 0; i < margins.size(); ++i) {
            const double t = labels[i] == 1 ? t_pos : t_neg;
            const double p = 1.0 / (1.0 + std::exp(a * margins[i] + b));
            ga += (t - p) * margins[i];
            gb += t - p;
        }
        ga /= n;
        gb /= n;
        if (std::hypot(ga, gb) < 1e-12) break;
        bool accepted = false;
        while (step > 1e-14) {
            const double na = std::min(0.0, a - step * ga);
            const double nb = b - step * gb;
            const double nl = calibration_loss(na, nb, margins, labels);
            const double decrease = ga * (a - na) + gb * (b - nb);
            if (nl <= loss - 1e-4 * decrease) {
                a = na;
                b = nb;
                loss = nl;
                accepted = true;
                step *= 2.0;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
    }
    model.platt_a = a;
    model.platt_b = b;
    return model;
}

SvmModel train_calibrated(std::span<const LabeledPoint> points, const SvmTrainConfig& cfg) {
    SvmModel model = svm_train(points, cfg);
    std::vector<double> margins;
    std::vector<int> labels;
    for (const auto& p : points) {
        margins.push_back(decision(model, p.x));
        labels.push_back(p.label);
    }
    return calibrate(std::move(model), margins, labels);
}

std::vector<std::uint8_t> serialize(const SvmModel& model) {
    using nn::NamedTensor;
    using nn::Tensor;
    std::vector<NamedTensor> records{
        {"svm.weights", Tensor::from_values(model.weights)},
        {"svm.bias", Tensor::from_values({model.bias})},
        {"svm.means", Tensor::from_values(model.feature_means)},
        {"svm.scales", Tensor::from_values(model.feature_scales)},
        {"platt.a", Tensor::from_values({model.platt_a})},
        {"platt.b", Tensor::from_values({model.platt_b})},
    };
    return nn::encode_records(records);
}

SvmModel deserialize_svm(std::span<const std::uint8_t> bytes) {
    const auto records = nn::decode_records(bytes);
    auto get = [&](const char* name) -> std::vector<double> {
        for (const auto& r : records) {
            if (r.name == name) return {r.tensor.values().begin(), r.tensor.values().end()};
        }
        throw nn::FormatError(std::string("svm file has no '") + name + "' record");
    };
    auto scalar = [&](const char* name) {
        auto v = get(name);
        if (v.size() != 1) throw nn::FormatError(std::string("record '") + name + "' must be a scalar");
        return v[0];
    };
    SvmModel m;
    m.weights = get("svm.weights");
    m.bias = scalar("svm.bias");
    m.feature_means = get("svm.means");
    m.feature_scales = get("svm.scales");
    m.platt_a = scalar("platt.a");
    m.platt_b = scalar("platt.b");
    if (m.feature_means.size() != m.dimension() || m.feature_scales.size() != m.dimension()) {
        throw nn::FormatError("svm records disagree on dimension");
    }
    for (double s : m.feature_scales) {
        if (!(s > 0.0)) throw nn::FormatError("svm feature scales must be positive");
    }
    return m;
}

void save_svm(const SvmModel& model, const std::filesystem::path& path) {
    nn::write_file(path, serialize(model));
}

SvmModel load_svm(const std::filesystem::path& path) {
    return deserialize_svm(nn::read_file(path));
}

}  // namespace strokesave::svm
