#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "abr/dataset.hpp"
#include "abr/rng.hpp"

namespace abr {

struct BanditMode {
    double center = 0.0;
    double height = 0.0;
    double width = 1.0;
};

// One-dimensional continuous bandit; mean reward is a sum of Gaussian bumps.
struct BanditEnv {
    double action_low = -1.0;
    double action_high = 1.0;
    std::vector<BanditMode> reward_modes;
    double reward_noise_sd = 0.05;
};

BanditEnv default_bandit();

double bandit_mean_reward(const BanditEnv& env, double action);
// Mean reward plus Gaussian observation noise; throws on out-of-bounds action.
double bandit_reward(const BanditEnv& env, double action, Rng& rng);

// Mixture of normals truncated to [low, high]; density and CDF are exact.
struct TruncatedGaussianMixture {
    std::vector<double> weights;
    std::vector<double> means;
    std::vector<double> sds;
    double low = -1.0;
    double high = 1.0;

    double density(double a) const;
    double cdf(double a) const;
    // Component choice by weight, then rejection until the draw lands inside.
    double sample(Rng& rng) const;
};

TruncatedGaussianMixture default_bandit_behavior();

struct PointMassEnv {
    double dt = 0.05;
    double damping = 0.99;
    double pos_low = -2.0;
    double pos_high = 2.0;
    double action_low = -1.0;
    double action_high = 1.0;
    std::array<double, 2> goal{1.0, 1.0};
    std::array<double, 2> start{0.0, 0.0};
    int horizon = 100;
    double k_p = 2.0;
    double k_d = 1.0;
};

struct PmState {
    std::array<double, 2> pos{0.0, 0.0};
    std::array<double, 2> vel{0.0, 0.0};
    int t = 0;
};

struct PmStepResult {
    PmState next;
    double reward = 0.0;
    bool done = false;
};

PmState pm_reset(const PointMassEnv& env);
// velocity <- damping*velocity + dt*action; position <- clip(position + dt*velocity);
// reward = -|position - goal|; done once the horizon is reached. Pure function.
PmStepResult pm_step(const PointMassEnv& env, const PmState& state,
                     const std::array<double, 2>& action);
// Clipped PD law a = clip(k_p*(goal - position) - k_d*velocity).
std::array<double, 2> expert_action(const PointMassEnv& env, const PmState& state);
std::vector<double> pm_observation(const PmState& state);

enum class EnvKind { Bandit, PointMass };
enum class BehaviorKind { BanditMixture, Expert, Medium, Mixed };

std::string env_kind_name(EnvKind k);
EnvKind env_kind_from_name(const std::string& name);
std::string behavior_name(BehaviorKind k);
BehaviorKind behavior_from_name(const std::string& name);

struct EnvSpec {
    EnvKind kind = EnvKind::Bandit;
    BehaviorKind behavior = BehaviorKind::BanditMixture;
    BanditEnv bandit;
    TruncatedGaussianMixture bandit_behavior;
    PointMassEnv pm;
    double medium_noise_sd = 0.3;
};

EnvSpec make_env_spec(EnvKind kind, BehaviorKind behavior);
// Derives the environment from a dataset provenance tag such as
// "bandit" or "pointmass-mixed".
EnvSpec env_spec_from_provenance(const std::string& provenance);

// Bandit: i.i.d. one-step transitions with done=true. Point-mass: whole
// episodes under the chosen behavior (mixed alternates expert and medium
// episodes), truncated to exactly n transitions.
Dataset generate_dataset(const EnvSpec& spec, int n, uint64_t seed);

// Minimal rollout surface for evaluation.
class RolloutEnv {
  public:
    virtual ~RolloutEnv() = default;
    virtual int state_dim() const = 0;
    virtual int action_dim() const = 0;
    virtual double action_low() const = 0;
    virtual double action_high() const = 0;
    virtual std::vector<double> reset(Rng& rng) = 0;
    struct Step {
        std::vector<double> obs;
        double reward = 0.0;
        bool done = false;
    };
    virtual Step step(const std::vector<double>& action, Rng& rng) = 0;
};

std::unique_ptr<RolloutEnv> make_rollout_env(const EnvSpec& spec);

}  // namespace abr
