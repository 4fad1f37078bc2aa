#include "abr/agent.hpp"

#include <cmath>
#include <stdexcept>

namespace abr {

namespace {

double clip(double v, double lo, double hi) { return v < lo ? lo : (v > hi ? hi : v); }

}  // namespace

void Td3Params::validate() const {
    if (!(discount >= 0.0 && discount < 1.0)) throw std::invalid_argument("discount must be in [0,1)");
    if (!(tau > 0.0 && tau <= 1.0)) throw std::invalid_argument("tau must be in (0,1]");
    if (policy_delay < 1) throw std::invalid_argument("policy_delay must be >= 1");
    if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
    if (total_steps < 1) throw std::invalid_argument("total_steps must be >= 1");
    if (metrics_every < 1) throw std::invalid_argument("metrics_every must be >= 1");
    if (!(lr_actor > 0.0) || !(lr_critic > 0.0)) throw std::invalid_argument("learning rates must be positive");
    if (!(policy_noise_sd >= 0.0) || !(noise_clip >= 0.0))
        throw std::invalid_argument("noise parameters must be non-negative");
    if (hidden.empty()) throw std::invalid_argument("hidden layer list must be nonempty");
    for (int h : hidden)
        if (h < 1) throw std::invalid_argument("hidden layer sizes must be positive");
}

void AbrConfig::validate() const {
    td3.validate();
    if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be >= 0");
    if (!(beta >= 0.0)) throw std::invalid_argument("beta must be >= 0");
    if (reg_samples < 1) throw std::invalid_argument("reg_samples must be >= 1");
}

Agent make_agent(int state_dim, int action_dim, double action_low, double action_high,
                 const Td3Params& p, Rng& rng) {
    if (state_dim < 1 || action_dim < 1) throw std::invalid_argument("make_agent: bad dims");
    if (!(action_low < action_high)) throw std::invalid_argument("make_agent: bad action bounds");
    std::vector<int> actor_sizes{state_dim};
    std::vector<int> critic_sizes{state_dim + action_dim};
    for (int h : p.hidden) {
        actor_sizes.push_back(h);
        critic_sizes.push_back(h);
    }
    actor_sizes.push_back(action_dim);
    critic_sizes.push_back(1);

    Agent a;
    Rng actor_rng = rng.child(1), c1_rng = rng.child(2), c2_rng = rng.child(3);
    a.actor = make_mlp(actor_sizes, p.hidden_activation, Activation::Tanh, actor_rng);
    a.critic1 = make_mlp(critic_sizes, p.hidden_activation, Activation::Identity, c1_rng);
    a.critic2 = make_mlp(critic_sizes, p.hidden_activation, Activation::Identity, c2_rng);
    a.actor_target = a.actor;
    a.critic1_target = a.critic1;
    a.critic2_target = a.critic2;
    a.actor_opt = make_adam(a.actor);
    a.critic1_opt = make_adam(a.critic1);
    a.critic2_opt = make_adam(a.critic2);
    a.action_low = action_low;
    a.action_high = action_high;
    return a;
}

Mat actor_actions(const Mlp& actor, const Mat& states, double action_low, double action_high,
                  ForwardCache* cache) {
    Mat out = forward(actor, states, cache);
    const double center = 0.5 * (action_low + action_high);
    const double half = 0.5 * (action_high - action_low);
    for (double& v : out.data) v = center + half * v;
    return out;
}

std::vector<double> td_target(const Batch& batch, Agent& agent, const Td3Params& p, double r_max,
                              Rng& rng) {
    const int b = batch.size();
    Mat next_actions =
        actor_actions(agent.actor_target, batch.next_states, agent.action_low, agent.action_high,
                      nullptr);
    for (int i = 0; i < b; ++i)
        for (int d = 0; d < next_actions.cols; ++d) {
            const double eps =
                clip(rng.normal(0.0, p.policy_noise_sd), -p.noise_clip, p.noise_clip);
            next_actions(i, d) = clip(next_actions(i, d) + eps, agent.action_low, agent.action_high);
        }
    const Mat x = hcat(batch.next_states, next_actions);
    const Mat q1 = forward(agent.critic1_target, x, nullptr);
    const Mat q2 = forward(agent.critic2_target, x, nullptr);
    const double bound = r_max / (1.0 - p.discount);
    std::vector<double> y(b);
    for (int i = 0; i < b; ++i) {
        const double q = std::min(q1(i, 0), q2(i, 0));
        double v = batch.rewards[i] + p.discount * (1.0 - batch.done[i]) * q;
        if (p.clip_targets) v = clip(v, -bound, bound);
        if (!std::isfinite(v)) throw std::runtime_error("td_target: non-finite target");
        y[i] = v;
    }
    return y;
}

double lambda_coeff(const Batch& batch, const Agent& agent, const AbrConfig& cfg) {
    const double range = agent.action_high - agent.action_low;
    const double denom = std::max(1e-3, mean_abs_q(batch, agent.critic1));
    return cfg.beta * range * range / denom;
}

Mat draw_uniform_actions(int batch, int reg_samples, int action_dim, double action_low,
                         double action_high, Rng& rng) {
    Mat a(batch * reg_samples, action_dim);
    for (double& v : a.data) v = rng.uniform(action_low, action_high);
    return a;
}

CriticLossResult critic_loss_core(const Batch& batch, Mlp& critic1, Mlp& critic2,
                                  const std::vector<double>& y, double alpha, double lambda,
                                  const Mat* uniform_actions) {
    const int b = batch.size();
    const int sdim = batch.states.cols;
    const int adim = batch.actions.cols;
    const bool reg = alpha != 0.0 && uniform_actions != nullptr;
    const int m = reg ? uniform_actions->rows / b : 0;
    if (reg && uniform_actions->rows != b * m)
        throw std::invalid_argument("critic_loss_core: uniform action rows not a multiple of batch");

    const int rows = b + b * m;
    Mat x(rows, sdim + adim);
    for (int i = 0; i < b; ++i) {
        double* row = x.row_ptr(i);
        const double* s = batch.states.row_ptr(i);
        const double* a = batch.actions.row_ptr(i);
        for (int d = 0; d < sdim; ++d) row[d] = s[d];
        for (int d = 0; d < adim; ++d) row[sdim + d] = a[d];
    }
    std::vector<double> targets(rows);
    for (int i = 0; i < b; ++i) targets[i] = y[i];
    if (reg) {
        for (int i = 0; i < b; ++i) {
            const double* s = batch.states.row_ptr(i);
            const double* a = batch.actions.row_ptr(i);
            for (int j = 0; j < m; ++j) {
                const int r = b + i * m + j;
                double* row = x.row_ptr(r);
                const double* ap = uniform_actions->row_ptr(i * m + j);
                double dist_sq = 0.0;
                for (int d = 0; d < sdim; ++d) row[d] = s[d];
                for (int d = 0; d < adim; ++d) {
                    row[sdim + d] = ap[d];
                    const double diff = a[d] - ap[d];
                    dist_sq += diff * diff;
                }
                targets[r] = y[i] - lambda * dist_sq;
            }
        }
    }

    CriticLossResult res;
    res.g1 = make_gradients(critic1);
    res.g2 = make_gradients(critic2);
    Mlp* critics[2] = {&critic1, &critic2};
    Gradients* grads[2] = {&res.g1, &res.g2};
    for (int c = 0; c < 2; ++c) {
        ForwardCache cache;
        const Mat q = forward(*critics[c], x, &cache);
        Mat upstream(rows, 1);
        double data_loss = 0.0, reg_loss = 0.0;
        for (int i = 0; i < b; ++i) {
            const double diff = q(i, 0) - targets[i];
            data_loss += diff * diff;
            upstream(i, 0) = 2.0 * diff / b;
        }
        for (int r = b; r < rows; ++r) {
            const double diff = q(r, 0) - targets[r];
            reg_loss += diff * diff;
            upstream(r, 0) = 2.0 * alpha * diff / (b * m);
        }
        const double loss = data_loss / b + (reg ? alpha * reg_loss / (b * m) : 0.0);
        if (!std::isfinite(loss)) throw std::runtime_error("critic loss is non-finite");
        res.loss += loss;
        backward(*critics[c], cache, upstream, *grads[c]);
        if (c == 0) {
            double s = 0.0;
            for (int i = 0; i < b; ++i) s += q(i, 0);
            res.q_data_mean = s / b;
        }
    }
    return res;
}

CriticLossResult abr_critic_loss(const Batch& batch, Agent& agent, const AbrConfig& cfg,
                                 const std::vector<double>& y, double lambda, Rng& rng) {
    if (cfg.alpha == 0.0)
        return critic_loss_core(batch, agent.critic1, agent.critic2, y, 0.0, lambda, nullptr);
    const Mat uniform = draw_uniform_actions(batch.size(), cfg.reg_samples, batch.actions.cols,
                                             agent.action_low, agent.action_high, rng);
    return critic_loss_core(batch, agent.critic1, agent.critic2, y, cfg.alpha, lambda, &uniform);
}

ActorLossResult actor_loss(const Batch& batch, Agent& agent) {
    const int b = batch.size();
    ForwardCache actor_cache;
    const Mat actions = actor_actions(agent.actor, batch.states, agent.action_low,
                                      agent.action_high, &actor_cache);
    ForwardCache critic_cache;
    const Mat x = hcat(batch.states, actions);
    const Mat q = forward(agent.critic1, x, &critic_cache);

    ActorLossResult res;
    res.g = make_gradients(agent.actor);
    double total = 0.0;
    Mat upstream(b, 1);
    for (int i = 0; i < b; ++i) {
        total += q(i, 0);
        upstream(i, 0) = -1.0 / b;
    }
    res.loss = -total / b;
    if (!std::isfinite(res.loss)) throw std::runtime_error("actor loss is non-finite");

    Gradients critic_scratch = make_gradients(agent.critic1);
    const Mat input_grads = backward(agent.critic1, critic_cache, upstream, critic_scratch);
    const int sdim = batch.states.cols;
    const double half = 0.5 * (agent.action_high - agent.action_low);
    Mat action_upstream(b, actions.cols);
    for (int i = 0; i < b; ++i)
        for (int d = 0; d < actions.cols; ++d)
            action_upstream(i, d) = input_grads(i, sdim + d) * half;
    backward(agent.actor, actor_cache, action_upstream, res.g);
    return res;
}

double evaluate_actor(RolloutEnv& env, const Mlp& actor, double action_low, double action_high,
                      int episodes, Rng& rng) {
    if (episodes < 1) throw std::invalid_argument("evaluate_actor: episodes must be >= 1");
    double total = 0.0;
    Mat obs_mat(1, env.state_dim());
    for (int e = 0; e < episodes; ++e) {
        std::vector<double> obs = env.reset(rng);
        bool done = false;
        while (!done) {
            for (int d = 0; d < env.state_dim(); ++d) obs_mat(0, d) = obs[d];
            const Mat a = actor_actions(actor, obs_mat, action_low, action_high, nullptr);
            std::vector<double> action(a.data.begin(), a.data.end());
            RolloutEnv::Step s = env.step(action, rng);
            total += s.reward;
            obs = std::move(s.obs);
            done = s.done;
        }
    }
    return total / episodes;
}

double normalized_score(double raw, double random_ref, double expert_ref) {
    if (expert_ref == random_ref)
        throw std::invalid_argument("normalized_score: degenerate references");
    return 100.0 * (raw - random_ref) / (expert_ref - random_ref);
}

}  // namespace abr
