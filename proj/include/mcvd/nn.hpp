#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "mcvd/rng.hpp"

namespace mcvd {

enum class Activation { Identity, Relu, Abs };

struct LayerSpec {
    int out = 0;
    Activation act = Activation::Identity;
};

// One fully connected layer. Weights are row-major [out x in]; every
// parameter buffer is paired with a gradient buffer and an RMSProp
// accumulator of identical shape.
struct DenseLayer {
    int in = 0;
    int out = 0;
    Activation act = Activation::Identity;
    std::vector<double> w, b;   // parameters
    std::vector<double> gw, gb; // accumulated gradients
    std::vector<double> sw, sb; // RMSProp running mean of squared gradients
};

// Saved forward pass: per-layer inputs and pre-activations, plus the output.
// A Trace makes backward independent of network-internal state, so several
// forward passes through a shared network can be backpropagated later.
struct Trace {
    std::vector<std::vector<double>> inputs;
    std::vector<std::vector<double>> pre;
    std::vector<double> out;
};

struct OptimizerState {
    double decay = 0.99;
    double epsilon_stab = 1e-5;
};

// Plain dense network with manual forward/backward. Gradients accumulate
// across backward calls until zero_grad().
class DenseNet {
public:
    DenseNet() = default;

    // Weights start uniform in [-1/sqrt(fan_in), +1/sqrt(fan_in)], biases
    // at zero. Throws ConfigError on non-positive sizes or empty layout.
    DenseNet(int input_size, const std::vector<LayerSpec>& layers, Rng& rng);

    // Stateful convenience: forward stores an internal trace that the
    // next backward(upstream) consumes.
    std::span<const double> forward(std::span<const double> input);
    std::vector<double> backward(std::span<const double> upstream);

    // Re-entrant variants for interleaved passes through a shared network.
    void forward(std::span<const double> input, Trace& trace) const;
    std::vector<double> backward(const Trace& trace, std::span<const double> upstream);

    void zero_grad();

    // Copies parameters only (not gradients or optimizer state). Throws
    // ConfigError when the layer shapes differ.
    void copy_parameters_from(const DenseNet& src);

    int input_size() const { return input_size_; }
    int output_size() const;
    std::size_t parameter_count() const;

    std::vector<DenseLayer>& layers() { return layers_; }
    const std::vector<DenseLayer>& layers() const { return layers_; }

    // Flat parameter/gradient access in a fixed order (per layer: weights
    // then biases). Slow path used by the finite-difference checker.
    double get_param(std::size_t i) const;
    void set_param(std::size_t i, double v);
    double get_grad(std::size_t i) const;

private:
    int input_size_ = 0;
    std::vector<DenseLayer> layers_;
    Trace trace_;
    bool have_trace_ = false;
};

// One RMSProp update from the accumulated gradients:
//   s <- decay * s + (1 - decay) * g^2
//   p <- p - lr * g / (sqrt(s) + epsilon_stab)
void rmsprop_step(DenseNet& net, double lr, const OptimizerState& opt = {});

// Global gradient-norm clipping across all listed networks. When the joint
// L2 norm exceeds max_norm every gradient is scaled by max_norm / norm.
// Returns the applied scale (1.0 when no clipping occurred).
double clip_grad_norm(std::span<DenseNet* const> nets, double max_norm);

// Compares analytic gradients against central finite differences of
// loss(net(input)) over every parameter and returns the maximum relative
// error  |analytic - central| / max(1, |central|).
double finite_diff_check(DenseNet& net, std::span<const double> input,
                         const std::function<double(std::span<const double>)>& loss,
                         double h = 1e-4);

} // namespace mcvd
