#include "abr/envs.hpp"

#include <cmath>
#include <stdexcept>

namespace abr {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double clip(double v, double lo, double hi) { return v < lo ? lo : (v > hi ? hi : v); }

}  // namespace

BanditEnv default_bandit() {
    BanditEnv env;
    env.reward_modes = {{0.2, 0.6, 0.1}, {0.8, 1.0, 0.05}};
    env.reward_noise_sd = 0.05;
    return env;
}

double bandit_mean_reward(const BanditEnv& env, double action) {
    double r = 0.0;
    for (const BanditMode& m : env.reward_modes) {
        const double z = (action - m.center) / m.width;
        r += m.height * std::exp(-0.5 * z * z);
    }
    return r;
}

double bandit_reward(const BanditEnv& env, double action, Rng& rng) {
    if (!(action >= env.action_low && action <= env.action_high))
        throw std::invalid_argument("bandit_reward: action outside bounds");
    double r = bandit_mean_reward(env, action);
    if (env.reward_noise_sd > 0.0) r += rng.normal(0.0, env.reward_noise_sd);
    return r;
}

double TruncatedGaussianMixture::density(double a) const {
    if (a < low || a > high) return 0.0;
    double d = 0.0;
    for (size_t k = 0; k < weights.size(); ++k) {
        const double z_norm = normal_cdf((high - means[k]) / sds[k]) -
                              normal_cdf((low - means[k]) / sds[k]);
        const double z = (a - means[k]) / sds[k];
        d += weights[k] * kInvSqrt2Pi * std::exp(-0.5 * z * z) / (sds[k] * z_norm);
    }
    return d;
}

double TruncatedGaussianMixture::cdf(double a) const {
    if (a <= low) return 0.0;
    if (a >= high) return 1.0;
    double c = 0.0;
    for (size_t k = 0; k < weights.size(); ++k) {
        const double lo_c = normal_cdf((low - means[k]) / sds[k]);
        const double hi_c = normal_cdf((high - means[k]) / sds[k]);
        c += weights[k] * (normal_cdf((a - means[k]) / sds[k]) - lo_c) / (hi_c - lo_c);
    }
    return clip(c, 0.0, 1.0);
}

double TruncatedGaussianMixture::sample(Rng& rng) const {
    const double u = rng.uniform01();
    size_t k = 0;
    double acc = 0.0;
    for (; k < weights.size(); ++k) {
        acc += weights[k];
        if (u < acc) break;
    }
    if (k == weights.size()) k = weights.size() - 1;
    for (int attempt = 0; attempt < 10000; ++attempt) {
        const double x = rng.normal(means[k], sds[k]);
        if (x >= low && x <= high) return x;
    }
    throw std::runtime_error("truncated mixture: rejection sampling did not terminate");
}

TruncatedGaussianMixture default_bandit_behavior() {
    TruncatedGaussianMixture m;
    m.weights = {0.5, 0.5};
    m.means = {0.2, -0.3};
    m.sds = {0.08, 0.10};
    return m;
}

PmState pm_reset(const PointMassEnv& env) {
    PmState s;
    s.pos = env.start;
    return s;
}

PmStepResult pm_step(const PointMassEnv& env, const PmState& state,
                     const std::array<double, 2>& action) {
    for (double a : action)
        if (!(a >= env.action_low && a <= env.action_high))
            throw std::invalid_argument("pm_step: action outside bounds");
    PmStepResult out;
    out.next = state;
    double dist_sq = 0.0;
    for (int d = 0; d < 2; ++d) {
        out.next.vel[d] = env.damping * state.vel[d] + env.dt * action[d];
        out.next.pos[d] = clip(state.pos[d] + env.dt * out.next.vel[d], env.pos_low, env.pos_high);
        const double e = out.next.pos[d] - env.goal[d];
        dist_sq += e * e;
    }
    out.next.t = state.t + 1;
    out.reward = -std::sqrt(dist_sq);
    out.done = out.next.t >= env.horizon;
    return out;
}

std::array<double, 2> expert_action(const PointMassEnv& env, const PmState& state) {
    std::array<double, 2> a;
    for (int d = 0; d < 2; ++d)
        a[d] = clip(env.k_p * (env.goal[d] - state.pos[d]) - env.k_d * state.vel[d],
                    env.action_low, env.action_high);
    return a;
}

std::vector<double> pm_observation(const PmState& state) {
    return {state.pos[0], state.pos[1], state.vel[0], state.vel[1]};
}

std::string env_kind_name(EnvKind k) { return k == EnvKind::Bandit ? "bandit" : "pointmass"; }

EnvKind env_kind_from_name(const std::string& name) {
    if (name == "bandit") return EnvKind::Bandit;
    if (name == "pointmass") return EnvKind::PointMass;
    throw std::invalid_argument("unknown environment: " + name);
}

std::string behavior_name(BehaviorKind k) {
    switch (k) {
        case BehaviorKind::BanditMixture: return "mixture";
        case BehaviorKind::Expert: return "expert";
        case BehaviorKind::Medium: return "medium";
        default: return "mixed";
    }
}

BehaviorKind behavior_from_name(const std::string& name) {
    if (name == "mixture") return BehaviorKind::BanditMixture;
    if (name == "expert") return BehaviorKind::Expert;
    if (name == "medium") return BehaviorKind::Medium;
    if (name == "mixed") return BehaviorKind::Mixed;
    throw std::invalid_argument("unknown behavior: " + name);
}

EnvSpec make_env_spec(EnvKind kind, BehaviorKind behavior) {
    EnvSpec spec;
    spec.kind = kind;
    spec.behavior = behavior;
    spec.bandit = default_bandit();
    spec.bandit_behavior = default_bandit_behavior();
    if (kind == EnvKind::Bandit && behavior != BehaviorKind::BanditMixture)
        throw std::invalid_argument("bandit supports only the mixture behavior");
    if (kind == EnvKind::PointMass && behavior == BehaviorKind::BanditMixture)
        throw std::invalid_argument("point-mass needs expert, medium, or mixed behavior");
    return spec;
}

EnvSpec env_spec_from_provenance(const std::string& provenance) {
    if (provenance == "bandit") return make_env_spec(EnvKind::Bandit, BehaviorKind::BanditMixture);
    const std::string prefix = "pointmass-";
    if (provenance.rfind(prefix, 0) == 0)
        return make_env_spec(EnvKind::PointMass, behavior_from_name(provenance.substr(prefix.size())));
    throw std::invalid_argument("unknown dataset provenance: " + provenance);
}

namespace {

Dataset generate_bandit(const EnvSpec& spec, int n, Rng& rng) {
    Dataset ds;
    ds.state_dim = 1;
    ds.action_dim = 1;
    ds.action_low = {spec.bandit.action_low};
    ds.action_high = {spec.bandit.action_high};
    ds.provenance = "bandit";
    ds.transitions.reserve(n);
    for (int i = 0; i < n; ++i) {
        Transition t;
        t.state = {0.0};
        const double a = spec.bandit_behavior.sample(rng);
        t.action = {a};
        t.reward = bandit_reward(spec.bandit, a, rng);
        t.next_state = {0.0};
        t.done = true;
        ds.transitions.push_back(std::move(t));
    }
    return ds;
}

Dataset generate_pointmass(const EnvSpec& spec, int n, Rng& rng) {
    Dataset ds;
    ds.state_dim = 4;
    ds.action_dim = 2;
    ds.action_low = {spec.pm.action_low, spec.pm.action_low};
    ds.action_high = {spec.pm.action_high, spec.pm.action_high};
    ds.provenance = "pointmass-" + behavior_name(spec.behavior);
    ds.transitions.reserve(n);
    int episode = 0;
    while (static_cast<int>(ds.transitions.size()) < n) {
        const bool medium = spec.behavior == BehaviorKind::Medium ||
                            (spec.behavior == BehaviorKind::Mixed && episode % 2 == 1);
        PmState s = pm_reset(spec.pm);
        bool done = false;
        while (!done && static_cast<int>(ds.transitions.size()) < n) {
            std::array<double, 2> a = expert_action(spec.pm, s);
            if (medium)
                for (int d = 0; d < 2; ++d)
                    a[d] = clip(a[d] + rng.normal(0.0, spec.medium_noise_sd), spec.pm.action_low,
                                spec.pm.action_high);
            const PmStepResult r = pm_step(spec.pm, s, a);
            Transition t;
            t.state = pm_observation(s);
            t.action = {a[0], a[1]};
            t.reward = r.reward;
            t.next_state = pm_observation(r.next);
            t.done = r.done;
            ds.transitions.push_back(std::move(t));
            s = r.next;
            done = r.done;
        }
        ++episode;
    }
    return ds;
}

}  // namespace

Dataset generate_dataset(const EnvSpec& spec, int n, uint64_t seed) {
    if (n <= 0) throw std::invalid_argument("generate_dataset: n must be positive");
    Rng rng(seed);
    Dataset ds = spec.kind == EnvKind::Bandit ? generate_bandit(spec, n, rng)
                                              : generate_pointmass(spec, n, rng);
    ds.validate();
    return ds;
}

namespace {

class BanditRollout final : public RolloutEnv {
  public:
    explicit BanditRollout(const BanditEnv& env) : env_(env) {}
    int state_dim() const override { return 1; }
    int action_dim() const override { return 1; }
    double action_low() const override { return env_.action_low; }
    double action_high() const override { return env_.action_high; }
    std::vector<double> reset(Rng&) override { return {0.0}; }
    Step step(const std::vector<double>& action, Rng& rng) override {
        Step s;
        s.obs = {0.0};
        s.reward = bandit_reward(env_, action.at(0), rng);
        s.done = true;
        return s;
    }

  private:
    BanditEnv env_;
};

class PmRollout final : public RolloutEnv {
  public:
    explicit PmRollout(const PointMassEnv& env) : env_(env) {}
    int state_dim() const override { return 4; }
    int action_dim() const override { return 2; }
    double action_low() const override { return env_.action_low; }
    double action_high() const override { return env_.action_high; }
    std::vector<double> reset(Rng&) override {
        cur_ = pm_reset(env_);
        return pm_observation(cur_);
    }
    Step step(const std::vector<double>& action, Rng&) override {
        const PmStepResult r = pm_step(env_, cur_, {action.at(0), action.at(1)});
        cur_ = r.next;
        Step s;
        s.obs = pm_observation(cur_);
        s.reward = r.reward;
        s.done = r.done;
        return s;
    }

  private:
    PointMassEnv env_;
    PmState cur_;
};

}  // namespace

std::unique_ptr<RolloutEnv> make_rollout_env(const EnvSpec& spec) {
    if (spec.kind == EnvKind::Bandit) return std::make_unique<BanditRollout>(spec.bandit);
    return std::make_unique<PmRollout>(spec.pm);
}

}  // namespace abr
