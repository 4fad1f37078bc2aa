#include "abr/baselines.hpp"

#include <cmath>
#include <stdexcept>

namespace abr {

std::string baseline_name(BaselineMethod m) {
    switch (m) {
        case BaselineMethod::Bc: return "bc";
        case BaselineMethod::Td3: return "td3";
        default: return "td3bc";
    }
}

BaselineMethod baseline_from_name(const std::string& name) {
    if (name == "bc") return BaselineMethod::Bc;
    if (name == "td3") return BaselineMethod::Td3;
    if (name == "td3bc") return BaselineMethod::Td3Bc;
    throw std::invalid_argument("unknown baseline method: " + name);
}

void BaselineConfig::validate() const {
    td3.validate();
    if (!(alpha_fixed >= 0.0)) throw std::invalid_argument("alpha_fixed must be >= 0");
}

ActorLossResult bc_loss(const Batch& batch, Mlp& actor, double action_low, double action_high) {
    const int b = batch.size();
    ForwardCache cache;
    const Mat out = actor_actions(actor, batch.states, action_low, action_high, &cache);
    ActorLossResult res;
    res.g = make_gradients(actor);
    const double half = 0.5 * (action_high - action_low);
    Mat upstream(b, out.cols);
    double total = 0.0;
    for (int i = 0; i < b; ++i)
        for (int d = 0; d < out.cols; ++d) {
            const double diff = out(i, d) - batch.actions(i, d);
            total += diff * diff;
            upstream(i, d) = 2.0 * diff / b * half;
        }
    res.loss = total / b;
    if (!std::isfinite(res.loss)) throw std::runtime_error("bc loss is non-finite");
    backward(actor, cache, upstream, res.g);
    return res;
}

double td3bc_lambda_n(const Batch& batch, Agent& agent) {
    const Mat actions = actor_actions(agent.actor, batch.states, agent.action_low,
                                      agent.action_high, nullptr);
    const Mat x = hcat(batch.states, actions);
    const Mat q = forward(agent.critic1, x, nullptr);
    double s = 0.0;
    for (double v : q.data) s += std::abs(v);
    return 1.0 / std::max(1e-8, s / q.rows);
}

ActorLossResult td3bc_actor_loss_core(const Batch& batch, Agent& agent, double alpha_fixed,
                                      double lambda_n) {
    const int b = batch.size();
    ForwardCache actor_cache;
    const Mat actions = actor_actions(agent.actor, batch.states, agent.action_low,
                                      agent.action_high, &actor_cache);
    ForwardCache critic_cache;
    const Mat x = hcat(batch.states, actions);
    const Mat q = forward(agent.critic1, x, &critic_cache);

    ActorLossResult res;
    res.g = make_gradients(agent.actor);
    double q_total = 0.0, bc_total = 0.0;
    Mat q_upstream(b, 1);
    for (int i = 0; i < b; ++i) {
        q_total += q(i, 0);
        q_upstream(i, 0) = -lambda_n / b;
    }
    Gradients critic_scratch = make_gradients(agent.critic1);
    const Mat input_grads = backward(agent.critic1, critic_cache, q_upstream, critic_scratch);

    const int sdim = batch.states.cols;
    const double half = 0.5 * (agent.action_high - agent.action_low);
    Mat action_upstream(b, actions.cols);
    for (int i = 0; i < b; ++i)
        for (int d = 0; d < actions.cols; ++d) {
            const double diff = actions(i, d) - batch.actions(i, d);
            bc_total += diff * diff;
            action_upstream(i, d) =
                (input_grads(i, sdim + d) + 2.0 * alpha_fixed * diff / b) * half;
        }
    res.loss = -lambda_n * q_total / b + alpha_fixed * bc_total / b;
    if (!std::isfinite(res.loss)) throw std::runtime_error("td3bc actor loss is non-finite");
    backward(agent.actor, actor_cache, action_upstream, res.g);
    return res;
}

ActorLossResult td3bc_actor_loss(const Batch& batch, Agent& agent, double alpha_fixed) {
    return td3bc_actor_loss_core(batch, agent, alpha_fixed, td3bc_lambda_n(batch, agent));
}

CriticLossResult td3_critic_loss(const Batch& batch, Agent& agent,
                                 const std::vector<double>& y) {
    return critic_loss_core(batch, agent.critic1, agent.critic2, y, 0.0, 0.0, nullptr);
}

}  // namespace abr
