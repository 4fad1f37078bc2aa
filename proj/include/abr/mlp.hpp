#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "abr/mat.hpp"
#include "abr/rng.hpp"

namespace abr {

enum class Activation { Identity, Relu, Tanh };

std::string activation_name(Activation a);
Activation activation_from_name(const std::string& name);

inline double activate(Activation act, double x) {
    switch (act) {
        case Activation::Relu: return x > 0.0 ? x : 0.0;
        case Activation::Tanh: return std::tanh(x);
        default: return x;
    }
}

// Derivative in terms of preactivation and activation value; tanh reuses the output.
inline double activate_grad(Activation act, double pre, double post) {
    switch (act) {
        case Activation::Relu: return pre > 0.0 ? 1.0 : 0.0;
        case Activation::Tanh: return 1.0 - post * post;
        default: return 1.0;
    }
}

// Fully connected net. weights[l] is (in x out) so a batch row vector
// multiplies it from the left.
struct Mlp {
    std::vector<int> layer_sizes;
    Activation hidden_act = Activation::Relu;
    Activation output_act = Activation::Identity;
    std::vector<Mat> weights;
    std::vector<std::vector<double>> biases;

    int num_layers() const { return static_cast<int>(weights.size()); }
    int input_dim() const { return layer_sizes.front(); }
    int output_dim() const { return layer_sizes.back(); }
    Activation layer_act(int l) const { return l + 1 == num_layers() ? output_act : hidden_act; }
};

// Uniform init in +-1/sqrt(fan_in) for both weights and biases.
Mlp make_mlp(const std::vector<int>& layer_sizes, Activation hidden, Activation output, Rng& rng);

struct ForwardCache {
    std::vector<Mat> acts;     // acts[0] is the input, acts[l+1] the layer-l output
    std::vector<Mat> preacts;  // preacts[l] before the layer-l activation
};

// Batched forward pass; rows of x are samples. cache may be null for inference.
Mat forward(const Mlp& net, const Mat& x, ForwardCache* cache);

struct Gradients {
    std::vector<Mat> weights;
    std::vector<std::vector<double>> biases;

    void zero();
};

Gradients make_gradients(const Mlp& net);

// Accumulates parameter gradients for upstream = dL/d(output) and returns
// dL/d(input). cache must come from a forward pass on the same net.
Mat backward(const Mlp& net, const ForwardCache& cache, const Mat& upstream, Gradients& grads);

struct AdamState {
    std::vector<Mat> m_w, v_w;
    std::vector<std::vector<double>> m_b, v_b;
    long long step_count = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

AdamState make_adam(const Mlp& net);
void adam_step(Mlp& net, const Gradients& grads, AdamState& state, double lr);

// target <- (1 - tau) * target + tau * online
void polyak_update(Mlp& target, const Mlp& online, double tau);

// Flat parameter views in a fixed order (weights then bias, layer by layer).
// gradient_values flattens a Gradients in the same order.
std::vector<double*> param_pointers(Mlp& net);
std::vector<double> gradient_values(const Gradients& grads);

struct GradCheckResult {
    double max_rel_err = 0.0;
    int checked = 0;
    int worst_index = -1;
    double worst_analytic = 0.0;
    double worst_fd = 0.0;
};

// Central finite differences on a random subset of parameters. loss() must
// recompute the scalar objective from the current parameter values. Relative
// error is |a - fd| / max(1e-8, |a| + |fd|).
GradCheckResult compare_gradients(const std::vector<double*>& params,
                                  const std::vector<double>& analytic,
                                  const std::function<double()>& loss, Rng& rng, int max_params,
                                  double step = 1e-5);

// JSON round trip; floating point values survive exactly.
std::string mlp_to_json(const Mlp& net);
Mlp mlp_from_json(const std::string& text);
void save_mlp(const Mlp& net, const std::string& path);
Mlp load_mlp(const std::string& path);

}  // namespace abr
