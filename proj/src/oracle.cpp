#include "abr/oracle.hpp"

#include <cmath>
#include <stdexcept>

#include "abr/baselines.hpp"
#include "abr/train.hpp"

namespace abr {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;

}  // namespace

std::vector<double> closed_form_backup(const GridProblem& p) {
    const double au = p.alpha * p.grid.uniform_density();
    std::vector<double> q(p.pi_beta.size());
    for (size_t i = 0; i < q.size(); ++i) {
        if (p.alpha == 0.0) {
            q[i] = p.bq[i];
        } else if (p.pi_beta[i] == 0.0) {
            q[i] = p.q_tilde[i];
        } else {
            const double w = au / (p.pi_beta[i] + au);
            q[i] = (1.0 - w) * p.bq[i] + w * p.q_tilde[i];
        }
    }
    return q;
}

std::vector<double> objective_minimizer(const GridProblem& p) {
    const double au = p.alpha * p.grid.uniform_density();
    std::vector<double> q(p.pi_beta.size());
    for (size_t i = 0; i < q.size(); ++i) {
        const double pi = p.pi_beta[i];
        if (pi + au == 0.0) {
            q[i] = p.bq[i];
            continue;
        }
        // Derivative of pi*(Q-BQ)^2 + au*(Q-Qt)^2 is increasing; bisect its root.
        double lo = std::min(p.bq[i], p.q_tilde[i]) - 1.0;
        double hi = std::max(p.bq[i], p.q_tilde[i]) + 1.0;
        bool converged = false;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            const double deriv = pi * (mid - p.bq[i]) + au * (mid - p.q_tilde[i]);
            if (deriv > 0.0)
                hi = mid;
            else
                lo = mid;
            if (hi - lo <= 1e-10) {
                converged = true;
                break;
            }
        }
        if (!converged) throw std::runtime_error("objective_minimizer: bisection did not converge");
        q[i] = 0.5 * (lo + hi);
    }
    return q;
}

BiasCheck bias_bound_check(const GridProblem& p) {
    const double q_cap = p.r_max / (1.0 - p.gamma);
    for (size_t i = 0; i < p.bq.size(); ++i) {
        if (std::abs(p.bq[i]) > q_cap)
            throw std::runtime_error("bias_bound_check: |BQ| exceeds r_max/(1-gamma) at cell " +
                                     std::to_string(i));
        if (std::abs(p.q_tilde[i]) > p.delta_bound)
            throw std::runtime_error("bias_bound_check: |Q_tilde| exceeds delta at cell " +
                                     std::to_string(i));
    }
    if (!(p.sigma > 0.0)) throw std::runtime_error("bias_bound_check: sigma must be positive");
    const std::vector<double> q_hat = closed_form_backup(p);
    BiasCheck out;
    for (size_t i = 0; i < q_hat.size(); ++i)
        if (p.pi_beta[i] > p.sigma)
            out.max_bias = std::max(out.max_bias, std::abs(q_hat[i] - p.bq[i]));
    const double au = p.alpha * p.grid.uniform_density();
    out.bound = (au / p.sigma) * (q_cap + p.delta_bound);
    out.holds = p.alpha == 0.0 ? out.max_bias == 0.0 : out.max_bias < out.bound;
    return out;
}

double variance_y(double pi_b, double alpha_u, double q_pi, double q_tilde) {
    if (!(pi_b >= 0.0)) throw std::invalid_argument("variance_y: pi_b must be >= 0");
    if (!(alpha_u > 0.0)) throw std::invalid_argument("variance_y: alpha_u must be > 0");
    const double total = pi_b + alpha_u;
    const double p = pi_b / total;
    const double q = alpha_u / total;
    const double d = q_pi - q_tilde;
    return p * q * d * d;
}

VarianceReport expected_variance(const ActionGrid& grid, const std::vector<double>& pi_beta,
                                 const std::vector<double>& q_pi, const std::vector<double>& f,
                                 double alpha_u, double c) {
    if (pi_beta.size() != q_pi.size() || pi_beta.size() != f.size())
        throw std::invalid_argument("expected_variance: size mismatch");
    const double da = grid.delta();
    double full = 0.0, no_cross = 0.0;
    for (size_t i = 0; i < pi_beta.size(); ++i) {
        const double dev = q_pi[i] - c;
        no_cross += pi_beta[i] * (dev * dev + f[i] * f[i]) * da;
        full += pi_beta[i] * (dev * dev + f[i] * f[i] + 2.0 * f[i] * dev) * da;
    }
    VarianceReport out;
    out.expectation = 0.5 * alpha_u * full;
    out.bound = 0.5 * alpha_u * no_cross;
    out.cross_term = out.expectation - out.bound;
    return out;
}

double quadratic_term(const ActionGrid& grid, const std::vector<double>& pi_beta,
                      const std::vector<double>& q_pi, double c) {
    const double da = grid.delta();
    double s = 0.0;
    for (size_t i = 0; i < pi_beta.size(); ++i) {
        const double dev = q_pi[i] - c;
        s += pi_beta[i] * dev * dev * da;
    }
    return s;
}

double density_weighted_mean(const ActionGrid& grid, const std::vector<double>& pi_beta,
                             const std::vector<double>& q_pi) {
    const double da = grid.delta();
    double mass = 0.0, s = 0.0;
    for (size_t i = 0; i < pi_beta.size(); ++i) {
        mass += pi_beta[i] * da;
        s += pi_beta[i] * q_pi[i] * da;
    }
    if (mass <= 0.0) throw std::runtime_error("density_weighted_mean: zero total density");
    return s / mass;
}

GridProblem random_grid_problem(Rng& rng) {
    GridProblem p;
    p.grid = ActionGrid{401, -1.0, 1.0};
    const int n = p.grid.n_bins;

    const double support_lo = rng.uniform(-1.0, -0.1);
    const double support_hi = rng.uniform(0.1, 1.0);
    const int n_comp = 1 + static_cast<int>(rng.below(3));
    std::vector<double> w(n_comp), mu(n_comp), sd(n_comp);
    double w_total = 0.0;
    for (int k = 0; k < n_comp; ++k) {
        w[k] = rng.uniform(0.2, 1.0);
        w_total += w[k];
        mu[k] = rng.uniform(support_lo, support_hi);
        sd[k] = rng.uniform(0.05, 0.4);
    }
    p.pi_beta.assign(n, 0.0);
    double mass = 0.0;
    for (int i = 0; i < n; ++i) {
        const double a = p.grid.center(i);
        if (a < support_lo || a > support_hi) continue;
        double d = 0.0;
        for (int k = 0; k < n_comp; ++k) {
            const double z = (a - mu[k]) / sd[k];
            d += (w[k] / w_total) * kInvSqrt2Pi * std::exp(-0.5 * z * z) / sd[k];
        }
        p.pi_beta[i] = d;
        mass += d * p.grid.delta();
    }
    for (double& d : p.pi_beta) d /= mass;

    p.gamma = rng.uniform(0.0, 0.95);
    p.r_max = rng.uniform(0.5, 5.0);
    p.delta_bound = rng.uniform(0.1, 20.0);
    p.alpha = rng.uniform(0.01, 2.0);
    const double q_cap = p.r_max / (1.0 - p.gamma);
    p.bq.resize(n);
    p.q_tilde.resize(n);
    for (int i = 0; i < n; ++i) {
        p.bq[i] = rng.uniform(-q_cap, q_cap);
        p.q_tilde[i] = rng.uniform(-p.delta_bound, p.delta_bound);
    }
    double pi_max = 0.0;
    for (double d : p.pi_beta) pi_max = std::max(pi_max, d);
    p.sigma = rng.uniform(0.2, 0.8) * pi_max;
    return p;
}

std::vector<LandscapePoint> run_landscape(const Dataset& ds, const BanditEnv& env,
                                          const TruncatedGaussianMixture& behavior,
                                          const std::string& method,
                                          const std::vector<double>& alphas,
                                          const std::vector<uint64_t>& seeds,
                                          const LandscapeKnobs& knobs) {
    if (method != "abr" && method != "td3bc")
        throw std::invalid_argument("run_landscape: method must be abr or td3bc");
    ds.validate();
    if (ds.action_dim != 1) throw std::invalid_argument("run_landscape: needs a 1-D action space");
    const bool is_abr = method == "abr";
    const double lo = ds.action_low[0], hi = ds.action_high[0];

    if (knobs.steps < 1) throw std::invalid_argument("run_landscape: steps must be >= 1");
    if (knobs.grid_points < 3) throw std::invalid_argument("run_landscape: grid_points must be >= 3");

    Td3Params p;
    p.hidden = knobs.hidden;
    p.hidden_activation = knobs.hidden_activation;
    p.batch_size = knobs.batch_size;
    p.lr_actor = knobs.lr;
    p.lr_critic = knobs.lr;
    p.discount = knobs.discount;
    p.total_steps = knobs.steps;
    p.metrics_every = knobs.steps;
    p.validate();

    // Continuing-task view: every transition loops back to the bandit state,
    // so the policy's action enters the bootstrapped target.
    Dataset continuing = ds;
    for (Transition& t : continuing.transitions) t.done = false;

    const ActionGrid grid{knobs.grid_points, lo, hi};
    std::vector<LandscapePoint> out;
    out.reserve(alphas.size() * seeds.size() * grid.n_bins);

    // Full-dataset action statistics for the td3bc penalty term.
    double a_mean = 0.0, a_sq_mean = 0.0;
    for (const Transition& t : ds.transitions) {
        a_mean += t.action[0];
        a_sq_mean += t.action[0] * t.action[0];
    }
    a_mean /= ds.size();
    a_sq_mean /= ds.size();
    const double a_var = a_sq_mean - a_mean * a_mean;

    for (double alpha : alphas) {
        for (uint64_t seed : seeds) {
            p.seed = seed;
            TrainResult trained;
            if (is_abr) {
                AbrConfig cfg;
                cfg.td3 = p;
                cfg.alpha = alpha;
                cfg.beta = knobs.beta;
                cfg.reg_samples = knobs.reg_samples;
                trained = train_abr(continuing, cfg, nullptr);
            } else {
                BaselineConfig cfg;
                cfg.method = BaselineMethod::Td3Bc;
                cfg.alpha_fixed = alpha;
                cfg.td3 = p;
                trained = train_baseline(continuing, cfg, nullptr);
            }
            Agent& agent = trained.agent;

            const std::vector<double>& s0 = ds.transitions.front().state;
            Mat grid_x(grid.n_bins, ds.state_dim + 1);
            for (int i = 0; i < grid.n_bins; ++i) {
                for (int d = 0; d < ds.state_dim; ++d) grid_x(i, d) = s0[d];
                grid_x(i, ds.state_dim) = grid.center(i);
            }
            const Mat q_grid = forward(agent.critic1, grid_x, nullptr);
            for (double v : q_grid.data)
                if (!std::isfinite(v)) throw std::runtime_error("run_landscape: training diverged");

            double lambda_n = 1.0;
            if (!is_abr) {
                Mat data_x(static_cast<int>(ds.size()), ds.state_dim + 1);
                for (size_t i = 0; i < ds.size(); ++i) {
                    for (int d = 0; d < ds.state_dim; ++d)
                        data_x(static_cast<int>(i), d) = s0[d];
                    data_x(static_cast<int>(i), ds.state_dim) = ds.transitions[i].action[0];
                }
                const Mat q_data = forward(agent.critic1, data_x, nullptr);
                double s = 0.0;
                for (double v : q_data.data) s += std::abs(v);
                lambda_n = 1.0 / std::max(1e-8, s / q_data.rows);
            }

            for (int i = 0; i < grid.n_bins; ++i) {
                LandscapePoint pt;
                pt.alpha = alpha;
                pt.seed = seed;
                pt.action = grid.center(i);
                if (is_abr) {
                    pt.objective = q_grid(i, 0);
                } else {
                    const double dev = pt.action - a_mean;
                    pt.objective = lambda_n * q_grid(i, 0) - alpha * (dev * dev + a_var);
                }
                pt.density = behavior.density(pt.action);
                pt.mean_reward = bandit_mean_reward(env, pt.action);
                out.push_back(pt);
            }
        }
    }
    return out;
}

GradDecomposition gradient_decomposition(const Batch& batch, Agent& agent, double alpha_fixed) {
    const int b = batch.size();
    const int sdim = batch.states.cols;
    const int adim = batch.actions.cols;
    const double half = 0.5 * (agent.action_high - agent.action_low);
    const double lambda_n = td3bc_lambda_n(batch, agent);

    GradDecomposition out;
    out.value_total = make_gradients(agent.actor);
    out.penalty_total = make_gradients(agent.actor);
    Gradients critic_scratch = make_gradients(agent.critic1);

    Mat row_state(1, sdim);
    for (int i = 0; i < b; ++i) {
        for (int d = 0; d < sdim; ++d) row_state(0, d) = batch.states(i, d);
        ForwardCache actor_cache;
        const Mat action = actor_actions(agent.actor, row_state, agent.action_low,
                                         agent.action_high, &actor_cache);
        ForwardCache critic_cache;
        const Mat x = hcat(row_state, action);
        forward(agent.critic1, x, &critic_cache);

        Mat q_upstream(1, 1);
        q_upstream(0, 0) = -lambda_n / b;
        critic_scratch.zero();
        const Mat input_grads = backward(agent.critic1, critic_cache, q_upstream, critic_scratch);

        Mat value_upstream(1, adim), penalty_upstream(1, adim);
        for (int d = 0; d < adim; ++d) {
            value_upstream(0, d) = input_grads(0, sdim + d) * half;
            const double diff = action(0, d) - batch.actions(i, d);
            penalty_upstream(0, d) = 2.0 * alpha_fixed * diff / b * half;
        }
        Gradients gv = make_gradients(agent.actor);
        Gradients gp = make_gradients(agent.actor);
        backward(agent.actor, actor_cache, value_upstream, gv);
        backward(agent.actor, actor_cache, penalty_upstream, gp);

        double nv = 0.0, np = 0.0;
        const std::vector<double> fv = gradient_values(gv);
        const std::vector<double> fp = gradient_values(gp);
        for (double v : fv) nv += v * v;
        for (double v : fp) np += v * v;
        out.value_norms.push_back(std::sqrt(nv));
        out.penalty_norms.push_back(std::sqrt(np));
        for (size_t l = 0; l < gv.weights.size(); ++l) {
            for (size_t k = 0; k < gv.weights[l].size(); ++k) {
                out.value_total.weights[l].data[k] += gv.weights[l].data[k];
                out.penalty_total.weights[l].data[k] += gp.weights[l].data[k];
            }
            for (size_t k = 0; k < gv.biases[l].size(); ++k) {
                out.value_total.biases[l][k] += gv.biases[l][k];
                out.penalty_total.biases[l][k] += gp.biases[l][k];
            }
        }
    }
    return out;
}

}  // namespace abr
