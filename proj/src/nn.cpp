#include "mcvd/nn.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mcvd/errors.hpp"

namespace mcvd {

namespace {

double activate(Activation act, double x) {
    switch (act) {
    case Activation::Identity: return x;
    case Activation::Relu: return x > 0.0 ? x : 0.0;
    case Activation::Abs: return std::abs(x);
    }
    throw UsageError("unknown activation");
}

// Derivative evaluated at the pre-activation. Both kinks use 0 at the
// non-differentiable point.
double activate_grad(Activation act, double x) {
    switch (act) {
    case Activation::Identity: return 1.0;
    case Activation::Relu: return x > 0.0 ? 1.0 : 0.0;
    case Activation::Abs: return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
    }
    throw UsageError("unknown activation");
}

} // namespace

DenseNet::DenseNet(int input_size, const std::vector<LayerSpec>& layers, Rng& rng)
    : input_size_(input_size) {
    if (input_size <= 0) {
        throw ConfigError("network input size must be positive (got " +
                          std::to_string(input_size) + ")");
    }
    if (layers.empty()) {
        throw ConfigError("network needs at least one layer");
    }
    int in = input_size;
    layers_.reserve(layers.size());
    for (const LayerSpec& spec : layers) {
        if (spec.out <= 0) {
            throw ConfigError("layer width must be positive (got " +
                              std::to_string(spec.out) + ")");
        }
        DenseLayer layer;
        layer.in = in;
        layer.out = spec.out;
        layer.act = spec.act;
        const double bound = 1.0 / std::sqrt(static_cast<double>(in));
        layer.w.resize(static_cast<std::size_t>(spec.out) * in);
        for (double& v : layer.w) {
            v = rng.uniform(-bound, bound);
        }
        layer.b.assign(spec.out, 0.0);
        layer.gw.assign(layer.w.size(), 0.0);
        layer.gb.assign(layer.b.size(), 0.0);
        layer.sw.assign(layer.w.size(), 0.0);
        layer.sb.assign(layer.b.size(), 0.0);
        layers_.push_back(std::move(layer));
        in = spec.out;
    }
}

int DenseNet::output_size() const {
    if (layers_.empty()) {
        throw UsageError("output_size on an empty network");
    }
    return layers_.back().out;
}

std::size_t DenseNet::parameter_count() const {
    std::size_t n = 0;
    for (const DenseLayer& layer : layers_) {
        n += layer.w.size() + layer.b.size();
    }
    return n;
}

void DenseNet::forward(std::span<const double> input, Trace& trace) const {
    if (layers_.empty()) {
        throw UsageError("forward on an empty network");
    }
    if (static_cast<int>(input.size()) != input_size_) {
        throw UsageError("forward input size " + std::to_string(input.size()) +
                         " does not match network input size " +
                         std::to_string(input_size_));
    }
    trace.inputs.resize(layers_.size());
    trace.pre.resize(layers_.size());
    trace.inputs[0].assign(input.begin(), input.end());
    for (std::size_t k = 0; k < layers_.size(); ++k) {
        const DenseLayer& layer = layers_[k];
        const std::vector<double>& x = trace.inputs[k];
        std::vector<double>& pre = trace.pre[k];
        pre.assign(layer.b.begin(), layer.b.end());
        for (int o = 0; o < layer.out; ++o) {
            const double* row = layer.w.data() + static_cast<std::size_t>(o) * layer.in;
            double acc = pre[o];
            for (int i = 0; i < layer.in; ++i) {
                acc += row[i] * x[i];
            }
            pre[o] = acc;
        }
        std::vector<double>& y =
            (k + 1 < layers_.size()) ? trace.inputs[k + 1] : trace.out;
        y.resize(layer.out);
        for (int o = 0; o < layer.out; ++o) {
            y[o] = activate(layer.act, pre[o]);
        }
    }
}

std::span<const double> DenseNet::forward(std::span<const double> input) {
    forward(input, trace_);
    have_trace_ = true;
    return trace_.out;
}

std::vector<double> DenseNet::backward(const Trace& trace, std::span<const double> upstream) {
    if (trace.inputs.size() != layers_.size() || trace.out.empty()) {
        throw UsageError("backward trace does not match this network");
    }
    if (static_cast<int>(upstream.size()) != layers_.back().out) {
        throw UsageError("upstream size " + std::to_string(upstream.size()) +
                         " does not match output size " +
                         std::to_string(layers_.back().out));
    }
    std::vector<double> delta(upstream.begin(), upstream.end());
    std::vector<double> next;
    for (std::size_t k = layers_.size(); k-- > 0;) {
        DenseLayer& layer = layers_[k];
        const std::vector<double>& x = trace.inputs[k];
        const std::vector<double>& pre = trace.pre[k];
        // dL/d(pre) = upstream * act'(pre)
        for (int o = 0; o < layer.out; ++o) {
            delta[o] *= activate_grad(layer.act, pre[o]);
        }
        for (int o = 0; o < layer.out; ++o) {
            double* grow = layer.gw.data() + static_cast<std::size_t>(o) * layer.in;
            const double d = delta[o];
            for (int i = 0; i < layer.in; ++i) {
                grow[i] += d * x[i];
            }
            layer.gb[o] += d;
        }
        next.assign(layer.in, 0.0);
        for (int o = 0; o < layer.out; ++o) {
            const double* row = layer.w.data() + static_cast<std::size_t>(o) * layer.in;
            const double d = delta[o];
            for (int i = 0; i < layer.in; ++i) {
                next[i] += row[i] * d;
            }
        }
        delta.swap(next);
    }
    return delta;
}

std::vector<double> DenseNet::backward(std::span<const double> upstream) {
    if (!have_trace_) {
        throw UsageError("backward called before forward");
    }
    return backward(trace_, upstream);
}

void DenseNet::zero_grad() {
    for (DenseLayer& layer : layers_) {
        std::fill(layer.gw.begin(), layer.gw.end(), 0.0);
        std::fill(layer.gb.begin(), layer.gb.end(), 0.0);
    }
}

void DenseNet::copy_parameters_from(const DenseNet& src) {
    if (src.layers_.size() != layers_.size() || src.input_size_ != input_size_) {
        throw ConfigError("parameter copy between differently shaped networks");
    }
    for (std::size_t k = 0; k < layers_.size(); ++k) {
        if (layers_[k].in != src.layers_[k].in || layers_[k].out != src.layers_[k].out) {
            throw ConfigError("parameter copy between differently shaped networks");
        }
        layers_[k].w = src.layers_[k].w;
        layers_[k].b = src.layers_[k].b;
    }
}

double DenseNet::get_param(std::size_t i) const {
    for (const DenseLayer& layer : layers_) {
        if (i < layer.w.size()) return layer.w[i];
        i -= layer.w.size();
        if (i < layer.b.size()) return layer.b[i];
        i -= layer.b.size();
    }
    throw UsageError("parameter index out of range");
}

void DenseNet::set_param(std::size_t i, double v) {
    for (DenseLayer& layer : layers_) {
        if (i < layer.w.size()) { layer.w[i] = v; return; }
        i -= layer.w.size();
        if (i < layer.b.size()) { layer.b[i] = v; return; }
        i -= layer.b.size();
    }
    throw UsageError("parameter index out of range");
}

double DenseNet::get_grad(std::size_t i) const {
    for (const DenseLayer& layer : layers_) {
        if (i < layer.gw.size()) return layer.gw[i];
        i -= layer.gw.size();
        if (i < layer.gb.size()) return layer.gb[i];
        i -= layer.gb.size();
    }
    throw UsageError("gradient index out of range");
}

void rmsprop_step(DenseNet& net, double lr, const OptimizerState& opt) {
    if (!(lr > 0.0)) {
        throw ConfigError("learning rate must be positive");
    }
    auto update = [&](std::vector<double>& p, const std::vector<double>& g,
                      std::vector<double>& s) {
        for (std::size_t i = 0; i < p.size(); ++i) {
            s[i] = opt.decay * s[i] + (1.0 - opt.decay) * g[i] * g[i];
            p[i] -= lr * g[i] / (std::sqrt(s[i]) + opt.epsilon_stab);
        }
    };
    for (DenseLayer& layer : net.layers()) {
        update(layer.w, layer.gw, layer.sw);
        update(layer.b, layer.gb, layer.sb);
    }
}

double clip_grad_norm(std::span<DenseNet* const> nets, double max_norm) {
    if (!(max_norm > 0.0)) {
        throw ConfigError("max_norm must be positive");
    }
    double sq = 0.0;
    for (DenseNet* net : nets) {
        for (const DenseLayer& layer : net->layers()) {
            for (double g : layer.gw) sq += g * g;
            for (double g : layer.gb) sq += g * g;
        }
    }
    const double norm = std::sqrt(sq);
    if (norm <= max_norm) {
        return 1.0;
    }
    const double scale = max_norm / norm;
    for (DenseNet* net : nets) {
        for (DenseLayer& layer : net->layers()) {
            for (double& g : layer.gw) g *= scale;
            for (double& g : layer.gb) g *= scale;
        }
    }
    return scale;
}

double finite_diff_check(DenseNet& net, std::span<const double> input,
                         const std::function<double(std::span<const double>)>& loss,
                         double h) {
    if (!(h > 0.0)) {
        throw ConfigError("finite-difference step must be positive");
    }
    // Analytic pass: backpropagate dL/d(output), itself estimated by central
    // differences on the output vector so the checker accepts any loss.
    net.zero_grad();
    std::span<const double> out = net.forward(input);
    std::vector<double> out_plus(out.begin(), out.end());
    std::vector<double> out_minus(out.begin(), out.end());
    std::vector<double> upstream(out.size());
    for (std::size_t j = 0; j < out.size(); ++j) {
        out_plus[j] += h;
        out_minus[j] -= h;
        upstream[j] = (loss(out_plus) - loss(out_minus)) / (2.0 * h);
        out_plus[j] = out[j];
        out_minus[j] = out[j];
    }
    net.backward(upstream);

    const std::size_t n = net.parameter_count();
    std::vector<double> analytic(n);
    for (std::size_t i = 0; i < n; ++i) {
        analytic[i] = net.get_grad(i);
    }

    double worst = 0.0;
    Trace scratch;
    for (std::size_t i = 0; i < n; ++i) {
        const double saved = net.get_param(i);
        net.set_param(i, saved + h);
        net.forward(input, scratch);
        const double lp = loss(scratch.out);
        net.set_param(i, saved - h);
        net.forward(input, scratch);
        const double lm = loss(scratch.out);
        net.set_param(i, saved);
        const double central = (lp - lm) / (2.0 * h);
        const double rel = std::abs(analytic[i] - central) /
                           std::max(1.0, std::abs(central));
        worst = std::max(worst, rel);
    }
    return worst;
}

} // namespace mcvd
