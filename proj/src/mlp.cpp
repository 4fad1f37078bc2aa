#include "abr/mlp.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace abr {

std::string activation_name(Activation a) {
    switch (a) {
        case Activation::Relu: return "relu";
        case Activation::Tanh: return "tanh";
        default: return "identity";
    }
}

Activation activation_from_name(const std::string& name) {
    if (name == "relu") return Activation::Relu;
    if (name == "tanh") return Activation::Tanh;
    if (name == "identity") return Activation::Identity;
    throw std::invalid_argument("unknown activation: " + name);
}

Mlp make_mlp(const std::vector<int>& layer_sizes, Activation hidden, Activation output, Rng& rng) {
    if (layer_sizes.size() < 2) throw std::invalid_argument("need at least input and output sizes");
    Mlp net;
    net.layer_sizes = layer_sizes;
    net.hidden_act = hidden;
    net.output_act = output;
    for (size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
        const int in = layer_sizes[l];
        const int out = layer_sizes[l + 1];
        const double bound = 1.0 / std::sqrt(static_cast<double>(in));
        Mat w(in, out);
        for (double& v : w.data) v = rng.uniform(-bound, bound);
        std::vector<double> b(static_cast<size_t>(out));
        for (double& v : b) v = rng.uniform(-bound, bound);
        net.weights.push_back(std::move(w));
        net.biases.push_back(std::move(b));
    }
    return net;
}

Mat forward(const Mlp& net, const Mat& x, ForwardCache* cache) {
    if (x.cols != net.input_dim()) throw std::invalid_argument("forward: input width mismatch");
    if (cache) {
        cache->acts.assign(1, x);
        cache->preacts.clear();
    }
    Mat cur = x;
    for (int l = 0; l < net.num_layers(); ++l) {
        Mat z;
        matmul(cur, net.weights[l], z);
        const std::vector<double>& b = net.biases[l];
        for (int i = 0; i < z.rows; ++i) {
            double* zrow = z.row_ptr(i);
            for (int j = 0; j < z.cols; ++j) zrow[j] += b[j];
        }
        Mat a(z.rows, z.cols);
        const Activation act = net.layer_act(l);
        for (size_t k = 0; k < z.size(); ++k) a.data[k] = activate(act, z.data[k]);
        if (cache) {
            cache->preacts.push_back(z);
            cache->acts.push_back(a);
        }
        cur = std::move(a);
    }
    return cur;
}

void Gradients::zero() {
    for (Mat& w : weights) w.fill(0.0);
    for (std::vector<double>& b : biases) std::fill(b.begin(), b.end(), 0.0);
}

Gradients make_gradients(const Mlp& net) {
    Gradients g;
    for (int l = 0; l < net.num_layers(); ++l) {
        g.weights.emplace_back(net.weights[l].rows, net.weights[l].cols);
        g.biases.emplace_back(net.biases[l].size(), 0.0);
    }
    return g;
}

Mat backward(const Mlp& net, const ForwardCache& cache, const Mat& upstream, Gradients& grads) {
    if (static_cast<int>(cache.preacts.size()) != net.num_layers())
        throw std::invalid_argument("backward: cache does not match net");
    Mat delta = upstream;
    for (int l = net.num_layers() - 1; l >= 0; --l) {
        const Mat& z = cache.preacts[l];
        const Mat& a = cache.acts[l + 1];
        const Activation act = net.layer_act(l);
        for (size_t k = 0; k < delta.size(); ++k)
            delta.data[k] *= activate_grad(act, z.data[k], a.data[k]);
        matmul_tn_accum(cache.acts[l], delta, grads.weights[l]);
        col_sums_accum(delta, grads.biases[l]);
        if (l > 0) {
            Mat prev;
            matmul_nt(delta, net.weights[l], prev);
            delta = std::move(prev);
        } else {
            Mat dx;
            matmul_nt(delta, net.weights[l], dx);
            return dx;
        }
    }
    return Mat(upstream.rows, net.input_dim());
}

AdamState make_adam(const Mlp& net) {
    AdamState s;
    for (int l = 0; l < net.num_layers(); ++l) {
        s.m_w.emplace_back(net.weights[l].rows, net.weights[l].cols);
        s.v_w.emplace_back(net.weights[l].rows, net.weights[l].cols);
        s.m_b.emplace_back(net.biases[l].size(), 0.0);
        s.v_b.emplace_back(net.biases[l].size(), 0.0);
    }
    return s;
}

namespace {

void adam_update(double* p, const double* g, double* m, double* v, size_t n, double lr,
                 const AdamState& s, double bc1, double bc2) {
    for (size_t k = 0; k < n; ++k) {
        m[k] = s.beta1 * m[k] + (1.0 - s.beta1) * g[k];
        v[k] = s.beta2 * v[k] + (1.0 - s.beta2) * g[k] * g[k];
        const double mhat = m[k] / bc1;
        const double vhat = v[k] / bc2;
        p[k] -= lr * mhat / (std::sqrt(vhat) + s.eps);
    }
}

}  // namespace

void adam_step(Mlp& net, const Gradients& grads, AdamState& state, double lr) {
    state.step_count += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));
    for (int l = 0; l < net.num_layers(); ++l) {
        adam_update(net.weights[l].data.data(), grads.weights[l].data.data(),
                    state.m_w[l].data.data(), state.v_w[l].data.data(), net.weights[l].size(), lr,
                    state, bc1, bc2);
        adam_update(net.biases[l].data(), grads.biases[l].data(), state.m_b[l].data(),
                    state.v_b[l].data(), net.biases[l].size(), lr, state, bc1, bc2);
    }
}

void polyak_update(Mlp& target, const Mlp& online, double tau) {
    for (int l = 0; l < target.num_layers(); ++l) {
        for (size_t k = 0; k < target.weights[l].size(); ++k)
            target.weights[l].data[k] =
                (1.0 - tau) * target.weights[l].data[k] + tau * online.weights[l].data[k];
        for (size_t k = 0; k < target.biases[l].size(); ++k)
            target.biases[l][k] = (1.0 - tau) * target.biases[l][k] + tau * online.biases[l][k];
    }
}

std::vector<double*> param_pointers(Mlp& net) {
    std::vector<double*> out;
    for (int l = 0; l < net.num_layers(); ++l) {
        for (double& v : net.weights[l].data) out.push_back(&v);
        for (double& v : net.biases[l]) out.push_back(&v);
    }
    return out;
}

std::vector<double> gradient_values(const Gradients& grads) {
    std::vector<double> out;
    for (size_t l = 0; l < grads.weights.size(); ++l) {
        out.insert(out.end(), grads.weights[l].data.begin(), grads.weights[l].data.end());
        out.insert(out.end(), grads.biases[l].begin(), grads.biases[l].end());
    }
    return out;
}

GradCheckResult compare_gradients(const std::vector<double*>& params,
                                  const std::vector<double>& analytic,
                                  const std::function<double()>& loss, Rng& rng, int max_params,
                                  double step) {
    if (params.size() != analytic.size())
        throw std::invalid_argument("compare_gradients: size mismatch");
    const int total = static_cast<int>(params.size());
    std::vector<int> order(total);
    for (int i = 0; i < total; ++i) order[i] = i;
    // Fisher-Yates keeps the subset deterministic for a given rng state.
    for (int i = total - 1; i > 0; --i) {
        const int j = static_cast<int>(rng.below(static_cast<uint64_t>(i) + 1));
        std::swap(order[i], order[j]);
    }
    const int n = std::min(max_params, total);
    GradCheckResult res;
    for (int t = 0; t < n; ++t) {
        const int idx = order[t];
        double* p = params[idx];
        const double saved = *p;
        *p = saved + step;
        const double up = loss();
        *p = saved - step;
        const double dn = loss();
        *p = saved;
        const double fd = (up - dn) / (2.0 * step);
        const double a = analytic[idx];
        const double rel = std::abs(a - fd) / std::max(1e-8, std::abs(a) + std::abs(fd));
        if (rel > res.max_rel_err) {
            res.max_rel_err = rel;
            res.worst_index = idx;
            res.worst_analytic = a;
            res.worst_fd = fd;
        }
        res.checked += 1;
    }
    return res;
}

std::string mlp_to_json(const Mlp& net) {
    nlohmann::json j;
    j["layer_sizes"] = net.layer_sizes;
    j["activations"] = {activation_name(net.hidden_act), activation_name(net.output_act)};
    nlohmann::json weights = nlohmann::json::array();
    for (const Mat& w : net.weights) {
        nlohmann::json rows = nlohmann::json::array();
        for (int r = 0; r < w.rows; ++r) {
            nlohmann::json row = nlohmann::json::array();
            for (int c = 0; c < w.cols; ++c) row.push_back(w(r, c));
            rows.push_back(std::move(row));
        }
        weights.push_back(std::move(rows));
    }
    j["weights"] = std::move(weights);
    j["biases"] = net.biases;
    return j.dump(2);
}

Mlp mlp_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    Mlp net;
    net.layer_sizes = j.at("layer_sizes").get<std::vector<int>>();
    const auto acts = j.at("activations").get<std::vector<std::string>>();
    if (acts.size() != 2) throw std::invalid_argument("checkpoint: expected two activation names");
    net.hidden_act = activation_from_name(acts[0]);
    net.output_act = activation_from_name(acts[1]);
    const nlohmann::json& weights = j.at("weights");
    const nlohmann::json& biases = j.at("biases");
    if (net.layer_sizes.size() < 2 || weights.size() + 1 != net.layer_sizes.size() ||
        biases.size() != weights.size())
        throw std::invalid_argument("checkpoint: inconsistent layer counts");
    for (size_t l = 0; l < weights.size(); ++l) {
        const int in = net.layer_sizes[l];
        const int out = net.layer_sizes[l + 1];
        const nlohmann::json& wj = weights[l];
        if (static_cast<int>(wj.size()) != in)
            throw std::invalid_argument("checkpoint: weight row count mismatch");
        Mat w(in, out);
        for (int r = 0; r < in; ++r) {
            const nlohmann::json& rowj = wj[r];
            if (static_cast<int>(rowj.size()) != out)
                throw std::invalid_argument("checkpoint: weight column count mismatch");
            for (int c = 0; c < out; ++c) w(r, c) = rowj[c].get<double>();
        }
        std::vector<double> b = biases[l].get<std::vector<double>>();
        if (static_cast<int>(b.size()) != out)
            throw std::invalid_argument("checkpoint: bias size mismatch");
        net.weights.push_back(std::move(w));
        net.biases.push_back(std::move(b));
    }
    return net;
}

void save_mlp(const Mlp& net, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << mlp_to_json(net) << '\n';
    if (!f) throw std::runtime_error("write failed: " + path);
}

Mlp load_mlp(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return mlp_from_json(ss.str());
}

}  // namespace abr
