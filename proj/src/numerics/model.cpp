#include "strokesave/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace strokesave::nn {

std::string weight_name(std::size_t layer) { return "layer" + std::to_string(layer) + ".weight"; }
std::string bias_name(std::size_t layer) { return "layer" + std::to_string(layer) + ".bias"; }
std::string recurrent_name(std::size_t layer) { return "layer" + std::to_string(layer) + ".recurrent"; }

namespace {

// Uniform in [0, 1) from the top 53 bits, so draws do not depend on the
// standard library's distribution implementation.
double unit_uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Tensor glorot(Shape shape, std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng) {
    Tensor t(std::move(shape));
    const double s = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (double& v : t.values()) v = (2.0 * unit_uniform(rng) - 1.0) * s;
    return t;
}

struct ParamShapes {
    Shape weight;
    Shape recurrent;
    Shape bias;
    std::size_t fan_in = 0;
    std::size_t fan_out = 0;
};

// Empty weight shape means the layer has no parameters.
ParamShapes param_shapes(const LayerSpec& spec, const Shape& in) {
    ParamShapes p;
    switch (spec.kind) {
        case LayerKind::dense: {
            const std::size_t n = element_count(in);
            p.weight = {spec.units, n};
            p.bias = {spec.units};
            p.fan_in = n;
            p.fan_out = spec.units;
            break;
        }
        case LayerKind::conv1d:
            p.weight = {spec.units, in[0], spec.kernel};
            p.bias = {spec.units};
            p.fan_in = in[0] * spec.kernel;
            p.fan_out = spec.units * spec.kernel;
            break;
        case LayerKind::conv2d:
            p.weight = {spec.units, in[0], spec.kernel, spec.kernel};
            p.bias = {spec.units};
            p.fan_in = in[0] * spec.kernel * spec.kernel;
            p.fan_out = spec.units * spec.kernel * spec.kernel;
            break;
        case LayerKind::recurrent:
            p.weight = {spec.units, in[0]};
            p.recurrent = {spec.units, spec.units};
            p.bias = {spec.units};
            p.fan_in = in[0];
            p.fan_out = spec.units;
            break;
        default:
            break;
    }
    return p;
}

std::vector<Shape> compute_chain(const Shape& input, const std::vector<LayerSpec>& layers) {
    std::vector<Shape> shapes{input};
    for (std::size_t i = 0; i < layers.size(); ++i) {
        try {
            shapes.push_back(output_shape(layers[i], shapes.back()));
        } catch (const ShapeError& e) {
            throw ShapeError("layer " + std::to_string(i) + " (" + std::string(to_string(layers[i].kind)) +
                             "): " + e.what());
        }
    }
    return shapes;
}

// ---------------------------------------------------------------------------
// Kernels
// ---------------------------------------------------------------------------

void dense_forward(const Tensor& w, const Tensor& b, const double* x, std::size_t n, double* y) {
    const std::size_t units = b.size();
    for (std::size_t u = 0; u < units; ++u) {
        const double* row = w.data() + u * n;
        double acc = b[u];
        for (std::size_t j = 0; j < n; ++j) acc += row[j] * x[j];
        y[u] = acc;
    }
}

void dense_backward(const Tensor& w, const double* x, std::size_t n, const double* g, double* dw, double* db,
                    double* dx) {
    const std::size_t units = w.shape()[0];
    for (std::size_t u = 0; u < units; ++u) {
        const double gu = g[u];
        db[u] += gu;
        double* drow = dw + u * n;
        for (std::size_t j = 0; j < n; ++j) drow[j] += gu * x[j];
    }
    if (dx) {
        for (std::size_t u = 0; u < units; ++u) {
            const double gu = g[u];
            const double* row = w.data() + u * n;
            for (std::size_t j = 0; j < n; ++j) dx[j] += row[j] * gu;
        }
    }
}

void conv1d_forward(const LayerSpec& spec, const Shape& in_shape, const Tensor& w, const Tensor& b, const double* x,
                    double* y) {
    const std::size_t channels = in_shape[0], len = in_shape[1];
    const std::size_t k = spec.kernel, s = spec.stride, out_ch = spec.units;
    const std::size_t out_len = sliding_extent(len, k, s);
    for (std::size_t o = 0; o < out_ch; ++o) {
        double* yo = y + o * out_len;
        std::fill(yo, yo + out_len, b[o]);
        for (std::size_t c = 0; c < channels; ++c) {
            const double* xc = x + c * len;
            const double* wk = w.data() + (o * channels + c) * k;
            for (std::size_t kk = 0; kk < k; ++kk) {
                const double wv = wk[kk];
                const double* src = xc + kk;
                if (s == 1) {
                    for (std::size_t t = 0; t < out_len; ++t) yo[t] += wv * src[t];
                } else {
                    for (std::size_t t = 0; t < out_len; ++t) yo[t] += wv * src[t * s];
                }
            }
        }
    }
}

void conv1d_backward(const LayerSpec& spec, const Shape& in_shape, const Tensor& w, const double* x, const double* g,
                     double* dw, double* db, double* dx) {
    const std::size_t channels = in_shape[0], len = in_shape[1];
    const std::size_t k = spec.kernel, s = spec.stride, out_ch = spec.units;
    const std::size_t out_len = sliding_extent(len, k, s);
    for (std::size_t o = 0; o < out_ch; ++o) {
        const double* go = g + o * out_len;
        double bsum = 0.0;
        for (std::size_t t = 0; t < out_len; ++t) bsum += go[t];
        db[o] += bsum;
        for (std::size_t c = 0; c < channels; ++c) {
            const double* xc = x + c * len;
            double* dwk = dw + (o * channels + c) * k;
            const double* wk = w.data() + (o * channels + c) * k;
            double* dxc = dx ? dx + c * len : nullptr;
            for (std::size_t kk = 0; kk < k; ++kk) {
                const double* src = xc + kk;
                double acc = 0.0;
                for (std::size_t t = 0; t < out_len; ++t) acc += go[t] * src[t * s];
                dwk[kk] += acc;
                if (dxc) {
                    const double wv = wk[kk];
                    double* dst = dxc + kk;
                    for (std::size_t t = 0; t < out_len; ++t) dst[t * s] += wv * go[t];
                }
            }
        }
    }
}

void conv2d_forward(const LayerSpec& spec, const Shape& in_shape, const Tensor& w, const Tensor& b, const double* x,
                    double* y) {
    const std::size_t channels = in_shape[0], h = in_shape[1], wd = in_shape[2];
    const std::size_t k = spec.kernel, s = spec.stride, out_ch = spec.units;
    const std::size_t oh = sliding_extent(h, k, s), ow = sliding_extent(wd, k, s);
    for (std::size_t o = 0; o < out_ch; ++o) {
        double* yo = y + o * oh * ow;
        std::fill(yo, yo + oh * ow, b[o]);
        for (std::size_t c = 0; c < channels; ++c) {
            const double* xc = x + c * h * wd;
            const double* wc = w.data() + (o * channels + c) * k * k;
            for (std::size_t ki = 0; ki < k; ++ki) {
                for (std::size_t kj = 0; kj < k; ++kj) {
                    const double wv = wc[ki * k + kj];
                    for (std::size_t i = 0; i < oh; ++i) {
                        const double* src = xc + (i * s + ki) * wd + kj;
                        double* dst = yo + i * ow;
                        for (std::size_t j = 0; j < ow; ++j) dst[j] += wv * src[j * s];
                    }
                }
            }
        }
    }
}

void conv2d_backward(const LayerSpec& spec, const Shape& in_shape, const Tensor& w, const double* x, const double* g,
                     double* dw, double* db, double* dx) {
    const std::size_t channels = in_shape[0], h = in_shape[1], wd = in_shape[2];
    const std::size_t k = spec.kernel, s = spec.stride, out_ch = spec.units;
    const std::size_t oh = sliding_extent(h, k, s), ow = sliding_extent(wd, k, s);
    for (std::size_t o = 0; o < out_ch; ++o) {
        const double* go = g + o * oh * ow;
        double bsum = 0.0;
        for (std::size_t t = 0; t < oh * ow; ++t) bsum += go[t];
        db[o] += bsum;
        for (std::size_t c = 0; c < channels; ++c) {
            const double* xc = x + c * h * wd;
            const double* wc = w.data() + (o * channels + c) * k * k;
            double* dwc = dw + (o * channels + c) * k * k;
            double* dxc = dx ? dx + c * h * wd : nullptr;
            for (std::size_t ki = 0; ki < k; ++ki) {
                for (std::size_t kj = 0; kj < k; ++kj) {
                    const double wv = wc[ki * k + kj];
                    double acc = 0.0;
                    for (std::size_t i = 0; i < oh; ++i) {
                        const double* src = xc + (i * s + ki) * wd + kj;
                        const double* gi = go + i * ow;
                        for (std::size_t j = 0; j < ow; ++j) acc += gi[j] * src[j * s];
                        if (dxc) {
                            double* dst = dxc + (i * s + ki) * wd + kj;
                            for (std::size_t j = 0; j < ow; ++j) dst[j * s] += wv * gi[j];
                        }
                    }
                    dwc[ki * k + kj] += acc;
                }
            }
        }
    }
}

void avgpool1d_forward(const LayerSpec& spec, const Shape& in_shape, const double* x, double* y) {
    const std::size_t channels = in_shape[0], len = in_shape[1], k = spec.kernel, s = spec.stride;
    const std::size_t out_len = sliding_extent(len, k, s);
    const double inv = 1.0 / static_cast<double>(k);
    for (std::size_t c = 0; c < channels; ++c) {
        for (std::size_t t = 0; t < out_len; ++t) {
            const double* src = x + c * len + t * s;
            double acc = 0.0;
            for (std::size_t i = 0; i < k; ++i) acc += src[i];
            y[c * out_len + t] = acc * inv;
        }
    }
}

void avgpool1d_backward(const LayerSpec& spec, const Shape& in_shape, const double* g, double* dx) {
    const std::size_t channels = in_shape[0], len = in_shape[1], k = spec.kernel, s = spec.stride;
    const std::size_t out_len = sliding_extent(len, k, s);
    const double inv = 1.0 / static_cast<double>(k);
    for (std::size_t c = 0; c < channels; ++c) {
        for (std::size_t t = 0; t < out_len; ++t) {
            const double gv = g[c * out_len + t] * inv;
            double* dst = dx + c * len + t * s;
            for (std::size_t i = 0; i < k; ++i) dst[i] += gv;
        }
    }
}

void avgpool2d_forward(const LayerSpec& spec, const Shape& in_shape, const double* x, double* y) {
    const std::size_t channels = in_shape[0], h = in_shape[1], wd = in_shape[2], k = spec.kernel, s = spec.stride;
    const std::size_t oh = sliding_extent(h, k, s), ow = sliding_extent(wd, k, s);
    const double inv = 1.0 / static_cast<double>(k * k);
    for (std::size_t c = 0; c < channels; ++c) {
        const double* xc = x + c * h * wd;
        for (std::size_t i = 0; i < oh; ++i) {
            for (std::size_t j = 0; j < ow; ++j) {
                double acc = 0.0;
                for (std::size_t a = 0; a < k; ++a) {
                    const double* row = xc + (i * s + a) * wd + j * s;
                    for (std::size_t b = 0; b < k; ++b) acc += row[b];
                }
                y[(c * oh + i) * ow + j] = acc * inv;
            }
        }
    }
}

void avgpool2d_backward(const LayerSpec& spec, const Shape& in_shape, const double* g, double* dx) {
    const std::size_t channels = in_shape[0], h = in_shape[1], wd = in_shape[2], k = spec.kernel, s = spec.stride;
    const std::size_t oh = sliding_extent(h, k, s), ow = sliding_extent(wd, k, s);
    const double inv = 1.0 / static_cast<double>(k * k);
    for (std::size_t c = 0; c < channels; ++c) {
        double* dxc = dx + c * h * wd;
        for (std::size_t i = 0; i < oh; ++i) {
            for (std::size_t j = 0; j < ow; ++j) {
                const double gv = g[(c * oh + i) * ow + j] * inv;
                for (std::size_t a = 0; a < k; ++a) {
                    double* row = dxc + (i * s + a) * wd + j * s;
                    for (std::size_t b = 0; b < k; ++b) row[b] += gv;
                }
            }
        }
    }
}

// Elman cell over a [features, time] input. Returns every hidden state,
// states[t + 1] being the state after step t; states[0] is zero.
std::vector<std::vector<double>> recurrent_states(const Shape& in_shape, const Tensor& w_in, const Tensor& w_rec,
                                                  const Tensor& b, const double* x) {
    const std::size_t features = in_shape[0], steps = in_shape[1], hidden = b.size();
    std::vector<std::vector<double>> states(steps + 1, std::vector<double>(hidden, 0.0));
    for (std::size_t t = 0; t < steps; ++t) {
        const std::vector<double>& prev = states[t];
        std::vector<double>& cur = states[t + 1];
        for (std::size_t u = 0; u < hidden; ++u) {
            double a = b[u];
            const double* wi = w_in.data() + u * features;
            for (std::size_t f = 0; f < features; ++f) a += wi[f] * x[f * steps + t];
            const double* wr = w_rec.data() + u * hidden;
            for (std::size_t v = 0; v < hidden; ++v) a += wr[v] * prev[v];
            cur[u] = std::tanh(a);
        }
    }
    return states;
}

void recurrent_backward(const Shape& in_shape, const Tensor& w_in, const Tensor& w_rec, const Tensor& b,
                        const double* x, const double* g, double* dw_in, double* dw_rec, double* db, double* dx) {
    const std::size_t features = in_shape[0], steps = in_shape[1], hidden = b.size();
    const auto states = recurrent_states(in_shape, w_in, w_rec, b, x);
    std::vector<double> dh(g, g + hidden);
    std::vector<double> da(hidden);
    for (std::size_t t = steps; t-- > 0;) {
        const std::vector<double>& h = states[t + 1];
        const std::vector<double>& prev = states[t];
        for (std::size_t u = 0; u < hidden; ++u) da[u] = dh[u] * (1.0 - h[u] * h[u]);
        for (std::size_t u = 0; u < hidden; ++u) {
            const double d = da[u];
            db[u] += d;
            double* dwi = dw_in + u * features;
            for (std::size_t f = 0; f < features; ++f) dwi[f] += d * x[f * steps + t];
            double* dwr = dw_rec + u * hidden;
            for (std::size_t v = 0; v < hidden; ++v) dwr[v] += d * prev[v];
        }
        if (dx) {
            for (std::size_t u = 0; u < hidden; ++u) {
                const double d = da[u];
                const double* wi = w_in.data() + u * features;
                for (std::size_t f = 0; f < features; ++f) dx[f * steps + t] += wi[f] * d;
            }
        }
        std::fill(dh.begin(), dh.end(), 0.0);
        for (std::size_t u = 0; u < hidden; ++u) {
            const double d = da[u];
            const double* wr = w_rec.data() + u * hidden;
            for (std::size_t v = 0; v < hidden; ++v) dh[v] += wr[v] * d;
        }
    }
}

void softmax_inplace(std::span<double> v) {
    const double mx = *std::max_element(v.begin(), v.end());
    double sum = 0.0;
    for (double& e : v) {
        e = std::exp(e - mx);
        sum += e;
    }
    for (double& e : v) e /= sum;
}

const Tensor& param(const Model& model, const std::string& name) {
    auto it = model.parameters().find(name);
    if (it == model.parameters().end()) throw ShapeError("missing parameter " + name);
    return it->second;
}

Tensor layer_forward(const Model& model, std::size_t i, const Tensor& x) {
    const LayerSpec& spec = model.layers()[i];
    const Shape& in_shape = model.shape_chain()[i];
    Tensor y(model.shape_chain()[i + 1]);
    switch (spec.kind) {
        case LayerKind::dense:
            dense_forward(param(model, weight_name(i)), param(model, bias_name(i)), x.data(), x.size(), y.data());
            break;
        case LayerKind::conv1d:
            conv1d_forward(spec, in_shape, param(model, weight_name(i)), param(model, bias_name(i)), x.data(),
                           y.data());
            break;
        case LayerKind::conv2d:
            conv2d_forward(spec, in_shape, param(model, weight_name(i)), param(model, bias_name(i)), x.data(),
                           y.data());
            break;
        case LayerKind::avgpool1d:
            avgpool1d_forward(spec, in_shape, x.data(), y.data());
            break;
        case LayerKind::avgpool2d:
            avgpool2d_forward(spec, in_shape, x.data(), y.data());
            break;
        case LayerKind::recurrent: {
            const auto states = recurrent_states(in_shape, param(model, weight_name(i)),
                                                 param(model, recurrent_name(i)), param(model, bias_name(i)),
                                                 x.data());
            std::copy(states.back().begin(), states.back().end(), y.data());
            break;
        }
        case LayerKind::relu:
            for (std::size_t j = 0; j < x.size(); ++j) y[j] = x[j] > 0.0 ? x[j] : 0.0;
            break;
        case LayerKind::sigmoid:
            for (std::size_t j = 0; j < x.size(); ++j) y[j] = 1.0 / (1.0 + std::exp(-x[j]));
            break;
        case LayerKind::softmax:
            std::copy(x.values().begin(), x.values().end(), y.data());
            softmax_inplace(y.values());
            break;
    }
    return y;
}

}  // namespace

Model Model::build(Shape input_shape, std::vector<LayerSpec> layers, std::uint64_t seed) {
    Model m;
    m.shapes_ = compute_chain(input_shape, layers);
    m.input_shape_ = std::move(input_shape);
    m.layers_ = std::move(layers);
    m.seed_ = seed;
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < m.layers_.size(); ++i) {
        ParamShapes p = param_shapes(m.layers_[i], m.shapes_[i]);
        if (p.weight.empty()) continue;
        m.parameters_[weight_name(i)] = glorot(p.weight, p.fan_in, p.fan_out, rng);
        if (!p.recurrent.empty()) {
            m.parameters_[recurrent_name(i)] = glorot(p.recurrent, p.fan_out, p.fan_out, rng);
        }
        m.parameters_[bias_name(i)] = Tensor(p.bias);
    }
    return m;
}

Model Model::assemble(Shape input_shape, std::vector<LayerSpec> layers, std::uint64_t seed,
                      ParameterMap parameters) {
    Model m;
    m.shapes_ = compute_chain(input_shape, layers);
    m.input_shape_ = std::move(input_shape);
    m.layers_ = std::move(layers);
    m.seed_ = seed;
    std::size_t expected = 0;
    for (std::size_t i = 0; i < m.layers_.size(); ++i) {
        ParamShapes p = param_shapes(m.layers_[i], m.shapes_[i]);
        if (p.weight.empty()) continue;
        auto check = [&](const std::string& name, const Shape& shape) {
            auto it = parameters.find(name);
            if (it == parameters.end()) throw ShapeError("missing parameter " + name);
            if (it->second.shape() != shape) {
                throw ShapeError("parameter " + name + " has shape " + to_string(it->second.shape()) +
                                 ", expected " + to_string(shape));
            }
            ++expected;
        };
        check(weight_name(i), p.weight);
        if (!p.recurrent.empty()) check(recurrent_name(i), p.recurrent);
        check(bias_name(i), p.bias);
    }
    if (expected != parameters.size()) throw ShapeError("unexpected extra parameters");
    m.parameters_ = std::move(parameters);
    return m;
}

std::size_t Model::parameter_count() const {
    std::size_t n = 0;
    for (const auto& [name, t] : parameters_) n += t.size();
    return n;
}

ForwardTrace forward_trace(const Model& model, const Tensor& input) {
    if (input.shape() != model.input_shape()) {
        throw ShapeError("layer 0: input shape " + to_string(input.shape()) + " does not match expected " +
                         to_string(model.input_shape()));
    }
    ForwardTrace trace;
    trace.activations.reserve(model.layers().size() + 1);
    trace.activations.push_back(input);
    for (std::size_t i = 0; i < model.layers().size(); ++i) {
        trace.activations.push_back(layer_forward(model, i, trace.activations.back()));
    }
    return trace;
}

Tensor forward(const Model& model, const Tensor& input) {
    if (input.shape() != model.input_shape()) {
        throw ShapeError("layer 0: input shape " + to_string(input.shape()) + " does not match expected " +
                         to_string(model.input_shape()));
    }
    Tensor x = input;
    for (std::size_t i = 0; i < model.layers().size(); ++i) x = layer_forward(model, i, x);
    return x;
}

GradientMap backward(const Model& model, const Tensor& input, const Tensor& loss_grad) {
    return backward(model, forward_trace(model, input), loss_grad);
}

GradientMap backward(const Model& model, const ForwardTrace& trace, const Tensor& loss_grad) {
    if (loss_grad.shape() != model.output_shape()) {
        throw ShapeError("layer " + std::to_string(model.layers().size()) + ": loss gradient shape " +
                         to_string(loss_grad.shape()) + " does not match output " +
                         to_string(model.output_shape()));
    }
    GradientMap grads;
    for (const auto& [name, t] : model.parameters()) grads.emplace(name, Tensor(t.shape()));

    Tensor g = loss_grad;
    for (std::size_t i = model.layers().size(); i-- > 0;) {
        const LayerSpec& spec = model.layers()[i];
        const Shape& in_shape = model.shape_chain()[i];
        const Tensor& x = trace.activations[i];
        const Tensor& y = trace.activations[i + 1];
        const bool need_dx = i > 0;
        Tensor dx(in_shape);
        double* dxp = need_dx ? dx.data() : nullptr;
        switch (spec.kind) {
            case LayerKind::dense:
                dense_backward(param(model, weight_name(i)), x.data(), x.size(), g.data(),
                               grads[weight_name(i)].data(), grads[bias_name(i)].data(), dxp);
                break;
            case LayerKind::conv1d:
                conv1d_backward(spec, in_shape, param(model, weight_name(i)), x.data(), g.data(),
                                grads[weight_name(i)].data(), grads[bias_name(i)].data(), dxp);
                break;
            case LayerKind::conv2d:
                conv2d_backward(spec, in_shape, param(model, weight_name(i)), x.data(), g.data(),
                                grads[weight_name(i)].data(), grads[bias_name(i)].data(), dxp);
                break;
            case LayerKind::avgpool1d:
                if (need_dx) avgpool1d_backward(spec, in_shape, g.data(), dxp);
                break;
            case LayerKind::avgpool2d:
                if (need_dx) avgpool2d_backward(spec, in_shape, g.data(), dxp);
                break;
            case LayerKind::recurrent:
                recurrent_backward(in_shape, param(model, weight_name(i)), param(model, recurrent_name(i)),
                                   param(model, bias_name(i)), x.data(), g.data(), grads[weight_name(i)].data(),
                                   grads[recurrent_name(i)].data(), grads[bias_name(i)].data(), dxp);
                break;
            case LayerKind::relu:
                for (std::size_t j = 0; j < dx.size(); ++j) dx[j] = x[j] > 0.0 ? g[j] : 0.0;
                break;
            case LayerKind::sigmoid:
                for (std::size_t j = 0; j < dx.size(); ++j) dx[j] = g[j] * y[j] * (1.0 - y[j]);
                break;
            case LayerKind::softmax: {
                double dot = 0.0;
                for (std::size_t j = 0; j < y.size(); ++j) dot += g[j] * y[j];
                for (std::size_t j = 0; j < dx.size(); ++j) dx[j] = y[j] * (g[j] - dot);
                break;
            }
        }
        if (!need_dx) break;
        g = std::move(dx);
    }
    return grads;
}

Tensor softmax(const Tensor& logits) {
    Tensor p = logits;
    softmax_inplace(p.values());
    return p;
}

LossAndGrad softmax_cross_entropy(const Tensor& logits, std::size_t label) {
    if (label >= logits.size()) {
        throw ShapeError("label " + std::to_string(label) + " out of range for " + std::to_string(logits.size()) +
                         " logits");
    }
    LossAndGrad out;
    out.grad = softmax(logits);
    const double mx = *std::max_element(logits.values().begin(), logits.values().end());
    double sum = 0.0;
    for (double v : logits.values()) sum += std::exp(v - mx);
    out.loss = -(logits[label] - mx - std::log(sum));
    out.grad[label] -= 1.0;
    return out;
}

double positive_probability(const Tensor& logits) {
    if (logits.size() != 2) throw ShapeError("expected 2 logits, got " + std::to_string(logits.size()));
    const Tensor p = softmax(logits);
    return std::clamp(p[1], 1e-12, 1.0 - 1e-12);
}

}  // namespace strokesave::nn
