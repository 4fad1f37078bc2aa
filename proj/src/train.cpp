#include "abr/train.hpp"

#include <cmath>
#include <stdexcept>

namespace abr {

namespace {

constexpr double kDivergenceBound = 1e8;

enum class Method { Abr, Bc, Td3, Td3Bc };

void guard(double loss) {
    if (!std::isfinite(loss) || std::abs(loss) > kDivergenceBound)
        throw std::runtime_error("training diverged: loss = " + std::to_string(loss));
}

double mean_probe_q(const Batch& batch, const Mlp& critic, const Mat& probes) {
    const int b = batch.size();
    const int n = probes.rows;
    const int sdim = batch.states.cols;
    Mat x(b * n, sdim + probes.cols);
    for (int i = 0; i < b; ++i) {
        const double* s = batch.states.row_ptr(i);
        for (int k = 0; k < n; ++k) {
            double* row = x.row_ptr(i * n + k);
            const double* p = probes.row_ptr(k);
            for (int d = 0; d < sdim; ++d) row[d] = s[d];
            for (int d = 0; d < probes.cols; ++d) row[sdim + d] = p[d];
        }
    }
    const Mat q = forward(critic, x, nullptr);
    double s = 0.0;
    for (double v : q.data) s += v;
    return s / static_cast<double>(q.rows);
}

TrainResult run_training(const Dataset& ds, Method method, const AbrConfig& acfg,
                         double alpha_fixed, const EvalHook* eval_hook) {
    ds.validate();
    const Td3Params& p = acfg.td3;
    for (int d = 1; d < ds.action_dim; ++d)
        if (ds.action_low[d] != ds.action_low[0] || ds.action_high[d] != ds.action_high[0])
            throw std::invalid_argument("training assumes a uniform action box");
    const double lo = ds.action_low[0], hi = ds.action_high[0];
    const double r_max = ds.max_abs_reward();

    Rng root(p.seed);
    Rng init_rng = root.child(1);
    Rng loop_rng = root.child(2);
    Rng probe_rng = root.child(3);

    TrainResult out;
    out.agent = make_agent(ds.state_dim, ds.action_dim, lo, hi, p, init_rng);
    Agent& agent = out.agent;
    const Mat probes = draw_uniform_actions(16, 1, ds.action_dim, lo, hi, probe_rng);

    const bool has_critic = method != Method::Bc;
    double last_actor_loss = 0.0;
    for (long long k = 0; k < p.total_steps; ++k) {
        const Batch batch = sample_batch(ds, p.batch_size, loop_rng);
        double critic_loss = 0.0, lambda = 0.0, q_data = 0.0;
        if (has_critic) {
            if (method == Method::Abr) lambda = lambda_coeff(batch, agent, acfg);
            const std::vector<double> y = td_target(batch, agent, p, r_max, loop_rng);
            CriticLossResult cl = method == Method::Abr
                                      ? abr_critic_loss(batch, agent, acfg, y, lambda, loop_rng)
                                      : td3_critic_loss(batch, agent, y);
            guard(cl.loss);
            critic_loss = cl.loss;
            q_data = cl.q_data_mean;
            adam_step(agent.critic1, cl.g1, agent.critic1_opt, p.lr_critic);
            adam_step(agent.critic2, cl.g2, agent.critic2_opt, p.lr_critic);
        }

        const bool actor_turn = method == Method::Bc || (k + 1) % p.policy_delay == 0;
        if (actor_turn) {
            ActorLossResult al;
            switch (method) {
                case Method::Bc: al = bc_loss(batch, agent.actor, lo, hi); break;
                case Method::Td3Bc: al = td3bc_actor_loss(batch, agent, alpha_fixed); break;
                default: al = actor_loss(batch, agent); break;
            }
            guard(al.loss);
            last_actor_loss = al.loss;
            adam_step(agent.actor, al.g, agent.actor_opt, p.lr_actor);
            if (has_critic) {
                polyak_update(agent.actor_target, agent.actor, p.tau);
                polyak_update(agent.critic1_target, agent.critic1, p.tau);
                polyak_update(agent.critic2_target, agent.critic2, p.tau);
            }
        }
        agent.step = k + 1;

        const long long step = k + 1;
        if (step % p.metrics_every == 0 || step == p.total_steps) {
            MetricsRow row;
            row.step = step;
            row.critic_loss = critic_loss;
            row.actor_loss = last_actor_loss;
            row.lambda = lambda;
            row.q_data = q_data;
            row.q_uniform = has_critic ? mean_probe_q(batch, agent.critic1, probes) : 0.0;
            if (eval_hook) {
                row.has_eval = true;
                row.eval_return = (*eval_hook)(agent.actor, lo, hi, step);
            }
            out.metrics.push_back(row);
        }
    }
    return out;
}

}  // namespace

TrainResult train_abr(const Dataset& ds, const AbrConfig& cfg, const EvalHook* eval_hook) {
    cfg.validate();
    return run_training(ds, Method::Abr, cfg, 0.0, eval_hook);
}

TrainResult train_baseline(const Dataset& ds, const BaselineConfig& cfg,
                           const EvalHook* eval_hook) {
    cfg.validate();
    AbrConfig acfg;
    acfg.td3 = cfg.td3;
    acfg.alpha = 0.0;
    Method m = Method::Td3;
    if (cfg.method == BaselineMethod::Bc) m = Method::Bc;
    if (cfg.method == BaselineMethod::Td3Bc) m = Method::Td3Bc;
    return run_training(ds, m, acfg, cfg.alpha_fixed, eval_hook);
}

}  // namespace abr
