#include <algorithm>
#include <cmath>
#include <vector>

#include "abr/envs.hpp"
#include "doctest.h"

using namespace abr;

TEST_CASE("bandit mean reward is the sum of its Gaussian bumps") {
    const BanditEnv env = default_bandit();
    REQUIRE(env.reward_modes.size() == 2);
    for (double a : {-0.9, -0.3, 0.0, 0.2, 0.5, 0.8, 1.0}) {
        double expected = 0.0;
        for (const BanditMode& m : env.reward_modes) {
            const double z = (a - m.center) / m.width;
            expected += m.height * std::exp(-0.5 * z * z);
        }
        CHECK(bandit_mean_reward(env, a) == doctest::Approx(expected).epsilon(1e-15));
    }
    // narrow high bump wins over the broad one
    CHECK(bandit_mean_reward(env, 0.8) > bandit_mean_reward(env, 0.2));
    CHECK(bandit_mean_reward(env, 0.2) > bandit_mean_reward(env, -0.5));
}

TEST_CASE("bandit rewards are noisy around the mean and bounds are enforced") {
    const BanditEnv env = default_bandit();
    Rng rng(3);
    const int n = 50000;
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double r = bandit_reward(env, 0.2, rng);
        sum += r;
        sum_sq += r * r;
    }
    const double mean = sum / n, var = sum_sq / n - mean * mean;
    CHECK(mean == doctest::Approx(bandit_mean_reward(env, 0.2)).epsilon(0.01));
    CHECK(std::sqrt(var) == doctest::Approx(env.reward_noise_sd).epsilon(0.05));
    CHECK_THROWS(bandit_reward(env, 1.5, rng));
}

TEST_CASE("behavior mixture density integrates to one and matches its cdf") {
    const TruncatedGaussianMixture mix = default_bandit_behavior();

    // Simpson quadrature of the density over the support
    const int n = 20000;
    const double h = (mix.high - mix.low) / n;
    double integral = mix.density(mix.low) + mix.density(mix.high);
    for (int i = 1; i < n; ++i)
        integral += mix.density(mix.low + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
    integral *= h / 3.0;
    CHECK(integral == doctest::Approx(1.0).epsilon(1e-9));

    CHECK(mix.cdf(mix.low) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(mix.cdf(mix.high) == doctest::Approx(1.0).epsilon(1e-12));

    // cdf equals the integral of the density up to each probe point
    for (double probe : {-0.6, -0.1, 0.15, 0.4, 0.9}) {
        const int m = 20000;
        const double hh = (probe - mix.low) / m;
        double acc = mix.density(mix.low) + mix.density(probe);
        for (int i = 1; i < m; ++i)
            acc += mix.density(mix.low + i * hh) * (i % 2 == 1 ? 4.0 : 2.0);
        acc *= hh / 3.0;
        CHECK(mix.cdf(probe) == doctest::Approx(acc).epsilon(1e-8));
    }
}

TEST_CASE("mixture samples stay inside the support and follow the cdf") {
    const TruncatedGaussianMixture mix = default_bandit_behavior();
    Rng rng(7);
    const int n = 20000;
    std::vector<double> xs(n);
    for (double& x : xs) {
        x = mix.sample(rng);
        REQUIRE(x >= mix.low);
        REQUIRE(x <= mix.high);
    }
    std::sort(xs.begin(), xs.end());
    double ks = 0.0;
    for (int i = 0; i < n; ++i) {
        const double f = mix.cdf(xs[i]);
        ks = std::max(ks, std::abs(f - (i + 1.0) / n));
        ks = std::max(ks, std::abs(f - static_cast<double>(i) / n));
    }
    // 3.5 / sqrt(n) rejects far outside any reasonable sampling error
    CHECK(ks < 3.5 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("point-mass step applies damping, velocity-first integration and clipping") {
    const PointMassEnv env;
    PmState s;
    s.pos = {0.5, -0.2};
    s.vel = {0.1, 0.3};
    s.t = 4;
    const PmStepResult r = pm_step(env, s, {1.0, -1.0});
    const double vx = 0.99 * 0.1 + 0.05 * 1.0;
    const double vy = 0.99 * 0.3 + 0.05 * -1.0;
    CHECK(r.next.vel[0] == doctest::Approx(vx).epsilon(1e-15));
    CHECK(r.next.vel[1] == doctest::Approx(vy).epsilon(1e-15));
    CHECK(r.next.pos[0] == doctest::Approx(0.5 + 0.05 * vx).epsilon(1e-15));
    CHECK(r.next.pos[1] == doctest::Approx(-0.2 + 0.05 * vy).epsilon(1e-15));
    const double dx = r.next.pos[0] - 1.0, dy = r.next.pos[1] - 1.0;
    CHECK(r.reward == doctest::Approx(-std::sqrt(dx * dx + dy * dy)).epsilon(1e-15));
    CHECK(r.next.t == 5);
    CHECK_FALSE(r.done);

    PmState edge;
    edge.pos = {1.999, 0.0};
    edge.vel = {1.0, 0.0};
    const PmStepResult e = pm_step(env, edge, {1.0, 0.0});
    CHECK(e.next.pos[0] == 2.0);  // clipped to the position bound

    PmState last;
    last.t = env.horizon - 1;
    CHECK(pm_step(env, last, {0.0, 0.0}).done);
}

TEST_CASE("expert controller is the clipped PD law and reaches the goal") {
    const PointMassEnv env;
    PmState s;
    s.pos = {0.0, 0.5};
    s.vel = {0.4, -0.2};
    const auto a = expert_action(env, s);
    CHECK(a[0] == doctest::Approx(std::clamp(2.0 * (1.0 - 0.0) - 0.4, -1.0, 1.0)).epsilon(1e-15));
    CHECK(a[1] == doctest::Approx(std::clamp(2.0 * (1.0 - 0.5) + 0.2, -1.0, 1.0)).epsilon(1e-15));

    PmState st = pm_reset(env);
    double total = 0.0;
    for (int t = 0; t < env.horizon; ++t) {
        const PmStepResult r = pm_step(env, st, expert_action(env, st));
        total += r.reward;
        st = r.next;
    }
    CHECK(total > -45.0);
    const double dist = std::hypot(st.pos[0] - 1.0, st.pos[1] - 1.0);
    CHECK(dist < 0.1);
}

TEST_CASE("bandit datasets are one-step transitions under the mixture") {
    const EnvSpec spec = make_env_spec(EnvKind::Bandit, BehaviorKind::BanditMixture);
    const Dataset ds = generate_dataset(spec, 5000, 11);
    CHECK(ds.size() == 5000);
    CHECK(ds.state_dim == 1);
    CHECK(ds.action_dim == 1);
    CHECK(ds.provenance == "bandit");
    double mean_action = 0.0;
    for (const Transition& t : ds.transitions) {
        REQUIRE(t.done);
        REQUIRE(t.state[0] == 0.0);
        REQUIRE(t.next_state[0] == 0.0);
        REQUIRE(t.action[0] >= -1.0);
        REQUIRE(t.action[0] <= 1.0);
        mean_action += t.action[0];
    }
    mean_action /= ds.size();
    // mixture mean sits between the two behavior modes at 0.2 and -0.3
    CHECK(mean_action > -0.3);
    CHECK(mean_action < 0.2);
    CHECK(generate_dataset(spec, 5000, 11).transitions[17].reward ==
          ds.transitions[17].reward);  // determinism
}

TEST_CASE("point-mass datasets contain whole consistent episodes") {
    const EnvSpec spec = make_env_spec(EnvKind::PointMass, BehaviorKind::Expert);
    const Dataset ds = generate_dataset(spec, 250, 13);
    CHECK(ds.size() == 250);  // truncated mid-episode
    CHECK(ds.state_dim == 4);
    CHECK(ds.action_dim == 2);
    CHECK(ds.provenance == "pointmass-expert");
    for (size_t i = 0; i < ds.size(); ++i) {
        const Transition& t = ds.transitions[i];
        const bool episode_end = (i + 1) % 100 == 0;
        CHECK(t.done == episode_end);
        if (i + 1 < ds.size() && !episode_end)
            CHECK(ds.transitions[i + 1].state == t.next_state);
        if (i % 100 == 0)
            CHECK(t.state == std::vector<double>{0.0, 0.0, 0.0, 0.0});
    }
}

TEST_CASE("mixed behavior alternates expert and noisy episodes") {
    const EnvSpec spec = make_env_spec(EnvKind::PointMass, BehaviorKind::Mixed);
    const PointMassEnv env = spec.pm;
    const Dataset ds = generate_dataset(spec, 400, 17);

    // episode 0 follows the PD law exactly
    for (int i = 0; i < 100; ++i) {
        const Transition& t = ds.transitions[i];
        PmState s;
        s.pos = {t.state[0], t.state[1]};
        s.vel = {t.state[2], t.state[3]};
        const auto a = expert_action(env, s);
        CHECK(t.action[0] == doctest::Approx(a[0]).epsilon(1e-12));
        CHECK(t.action[1] == doctest::Approx(a[1]).epsilon(1e-12));
    }
    // episode 1 deviates from it on most steps
    int deviating = 0;
    for (int i = 100; i < 200; ++i) {
        const Transition& t = ds.transitions[i];
        PmState s;
        s.pos = {t.state[0], t.state[1]};
        s.vel = {t.state[2], t.state[3]};
        const auto a = expert_action(env, s);
        if (std::abs(t.action[0] - a[0]) > 1e-9 || std::abs(t.action[1] - a[1]) > 1e-9)
            ++deviating;
        REQUIRE(t.action[0] >= -1.0);
        REQUIRE(t.action[0] <= 1.0);
    }
    CHECK(deviating > 80);
}

TEST_CASE("environment names and provenance tags round trip") {
    CHECK(env_kind_from_name("bandit") == EnvKind::Bandit);
    CHECK(env_kind_from_name("pointmass") == EnvKind::PointMass);
    CHECK_THROWS(env_kind_from_name("cartpole"));
    CHECK_THROWS(behavior_from_name("novice"));
    CHECK_THROWS(make_env_spec(EnvKind::PointMass, BehaviorKind::BanditMixture));
    CHECK_THROWS(make_env_spec(EnvKind::Bandit, BehaviorKind::Medium));

    const EnvSpec pm = env_spec_from_provenance("pointmass-medium");
    CHECK(pm.kind == EnvKind::PointMass);
    CHECK(pm.behavior == BehaviorKind::Medium);
    CHECK(env_spec_from_provenance("bandit").kind == EnvKind::Bandit);
    CHECK_THROWS(env_spec_from_provenance("pointmass-novice"));
}

TEST_CASE("rollout environments mirror the raw dynamics") {
    const EnvSpec spec = make_env_spec(EnvKind::PointMass, BehaviorKind::Mixed);
    auto env = make_rollout_env(spec);
    CHECK(env->state_dim() == 4);
    CHECK(env->action_dim() == 2);
    Rng rng(1);
    std::vector<double> obs = env->reset(rng);
    CHECK(obs == std::vector<double>{0.0, 0.0, 0.0, 0.0});
    int steps = 0;
    bool done = false;
    double total = 0.0;
    while (!done) {
        auto s = env->step({1.0, 1.0}, rng);
        total += s.reward;
        done = s.done;
        ++steps;
    }
    CHECK(steps == spec.pm.horizon);

    // same actions through the pure-function dynamics
    PmState st = pm_reset(spec.pm);
    double ref = 0.0;
    for (int t = 0; t < spec.pm.horizon; ++t) {
        const PmStepResult r = pm_step(spec.pm, st, {1.0, 1.0});
        ref += r.reward;
        st = r.next;
    }
    CHECK(total == ref);
}
