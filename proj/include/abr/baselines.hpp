#pragma once

#include "abr/agent.hpp"

namespace abr {

enum class BaselineMethod { Bc, Td3, Td3Bc };

std::string baseline_name(BaselineMethod m);
BaselineMethod baseline_from_name(const std::string& name);

struct BaselineConfig {
    BaselineMethod method = BaselineMethod::Bc;
    double alpha_fixed = 2.5;  // td3bc only
    Td3Params td3;

    void validate() const;
};

// loss = mean_i |actor(s_i) - a_i|^2
ActorLossResult bc_loss(const Batch& batch, Mlp& actor, double action_low, double action_high);

// 1 / mean |Q1(s, actor(s))|, floored away from zero. Treated as a constant
// inside td3bc_actor_loss_core.
double td3bc_lambda_n(const Batch& batch, Agent& agent);

// loss = mean_i [-lambda_n * Q1(s_i, actor(s_i)) + alpha_fixed * |actor(s_i) - a_i|^2]
ActorLossResult td3bc_actor_loss_core(const Batch& batch, Agent& agent, double alpha_fixed,
                                      double lambda_n);
ActorLossResult td3bc_actor_loss(const Batch& batch, Agent& agent, double alpha_fixed);

// Identical to the regularized critic loss at alpha = 0.
CriticLossResult td3_critic_loss(const Batch& batch, Agent& agent,
                                 const std::vector<double>& y);

}  // namespace abr
