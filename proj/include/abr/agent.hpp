#pragma once

#include <cstdint>
#include <vector>

#include "abr/dataset.hpp"
#include "abr/envs.hpp"
#include "abr/mlp.hpp"
#include "abr/rng.hpp"

namespace abr {

// Twin-critic deterministic actor-critic backbone shared by every method.
struct Td3Params {
    double discount = 0.99;
    double tau = 0.005;
    double policy_noise_sd = 0.2;
    double noise_clip = 0.5;
    int policy_delay = 2;
    int batch_size = 256;
    long long total_steps = 0;
    double lr_actor = 3e-4;
    double lr_critic = 3e-4;
    bool clip_targets = true;
    std::vector<int> hidden{256, 256};
    Activation hidden_activation = Activation::Relu;
    long long metrics_every = 1000;
    uint64_t seed = 0;

    void validate() const;
};

struct AbrConfig {
    Td3Params td3;
    double alpha = 0.15;      // critic regularizer weight
    double beta = 1.0;        // lambda scale multiplier
    int reg_samples = 1;      // uniform actions per transition (M)

    void validate() const;
};

struct Agent {
    Mlp actor, actor_target;
    Mlp critic1, critic2;
    Mlp critic1_target, critic2_target;
    AdamState actor_opt, critic1_opt, critic2_opt;
    double action_low = -1.0;
    double action_high = 1.0;
    long long step = 0;
};

Agent make_agent(int state_dim, int action_dim, double action_low, double action_high,
                 const Td3Params& p, Rng& rng);

// Actor output is a tanh head mapped affinely onto the action box.
Mat actor_actions(const Mlp& actor, const Mat& states, double action_low, double action_high,
                  ForwardCache* cache);

// a'' = clip(actor_target(s') + clip(eps, +-noise_clip), box); y = r +
// discount*(1-done)*min(Q1t, Q2t)(s', a''); optionally clipped to
// +-r_max/(1-discount). Noise draws: one per (sample, action dim), row major.
std::vector<double> td_target(const Batch& batch, Agent& agent, const Td3Params& p, double r_max,
                              Rng& rng);

// lambda = beta * range^2 / max(1e-3, mean |Q1(s,a)|), range taken from one
// coordinate of the uniform action box.
double lambda_coeff(const Batch& batch, const Agent& agent, const AbrConfig& cfg);

// One uniform draw per (sample, reg sample, action dim), row major.
Mat draw_uniform_actions(int batch, int reg_samples, int action_dim, double action_low,
                         double action_high, Rng& rng);

struct CriticLossResult {
    double loss = 0.0;        // sum over the two critics
    Gradients g1, g2;
    double q_data_mean = 0.0; // mean Q1 over the batch's dataset actions
};

// Per critic: mean_i (Q(s_i,a_i)-y_i)^2 + alpha * mean_i mean_j (Q(s_i,a'_ij)
// - (y_i - lambda*|a_i-a'_ij|^2))^2. The shifted target is a constant: no
// gradient flows through y or lambda. Both critics share uniform_actions.
// With alpha=0 the uniform rows are skipped entirely.
CriticLossResult critic_loss_core(const Batch& batch, Mlp& critic1, Mlp& critic2,
                                  const std::vector<double>& y, double alpha, double lambda,
                                  const Mat* uniform_actions);

// Full regularized critic step: uniform draws from rng, then the core loss.
CriticLossResult abr_critic_loss(const Batch& batch, Agent& agent, const AbrConfig& cfg,
                                 const std::vector<double>& y, double lambda, Rng& rng);

struct ActorLossResult {
    double loss = 0.0;
    Gradients g;
};

// loss = -mean Q1(s, actor(s)); gradient reaches the actor through the
// critic's action columns. Critic parameters are not updated.
ActorLossResult actor_loss(const Batch& batch, Agent& agent);

double evaluate_actor(RolloutEnv& env, const Mlp& actor, double action_low, double action_high,
                      int episodes, Rng& rng);

double normalized_score(double raw, double random_ref, double expert_ref);

}  // namespace abr
