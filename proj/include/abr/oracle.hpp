#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "abr/agent.hpp"
#include "abr/dataset.hpp"
#include "abr/envs.hpp"
#include "abr/mlp.hpp"
#include "abr/rng.hpp"

namespace abr {

// Uniform midpoint grid over a 1-D action interval; u is the uniform density.
struct ActionGrid {
    int n_bins = 401;
    double low = -1.0;
    double high = 1.0;

    double delta() const { return (high - low) / n_bins; }
    double center(int i) const { return low + (i + 0.5) * delta(); }
    double uniform_density() const { return 1.0 / (high - low); }
};

// One discretized per-state problem: behavior density, backup value, and
// surrogate value per cell, with the scalars the bound statement needs.
struct GridProblem {
    ActionGrid grid;
    std::vector<double> pi_beta;
    std::vector<double> bq;
    std::vector<double> q_tilde;
    double alpha = 0.1;
    double r_max = 1.0;
    double gamma = 0.9;
    double sigma = 0.1;       // density threshold of the bias statement
    double delta_bound = 1.0; // bound on |q_tilde|
};

// Per cell: (1-w)*BQ + w*Q_tilde with w = alpha*u/(pi_beta + alpha*u).
// The pi_beta = 0 and alpha = 0 limits return Q_tilde / BQ bit-exactly.
std::vector<double> closed_form_backup(const GridProblem& p);

// Minimizes pi_beta*(Q-BQ)^2 + alpha*u*(Q-Q_tilde)^2 per cell by bisecting
// the derivative to width 1e-10; independent of the closed form.
std::vector<double> objective_minimizer(const GridProblem& p);

struct BiasCheck {
    double max_bias = 0.0; // max |Q_hat - BQ| over cells with pi_beta > sigma
    double bound = 0.0;    // (alpha*u/sigma) * (r_max/(1-gamma) + delta_bound)
    bool holds = false;
};

// Throws if |BQ| exceeds r_max/(1-gamma) or |Q_tilde| exceeds delta_bound.
BiasCheck bias_bound_check(const GridProblem& p);

// Variance of the two-point mixture that takes value q_pi with probability
// pi_b/(pi_b + alpha_u) and q_tilde with probability alpha_u/(pi_b + alpha_u).
double variance_y(double pi_b, double alpha_u, double q_pi, double q_tilde);

struct VarianceReport {
    double expectation = 0.0; // (alpha_u/2) * integral pi*[(q-c)^2 + f^2 + 2f(q-c)]
    double bound = 0.0;       // same without the cross term
    double cross_term = 0.0;
};

VarianceReport expected_variance(const ActionGrid& grid, const std::vector<double>& pi_beta,
                                 const std::vector<double>& q_pi, const std::vector<double>& f,
                                 double alpha_u, double c);

// integral pi*(q-c)^2 da on the grid; the piece of expected_variance that the
// choice of constant c controls.
double quadratic_term(const ActionGrid& grid, const std::vector<double>& pi_beta,
                      const std::vector<double>& q_pi, double c);

// Density-weighted mean of q on the grid (the minimizer of quadratic_term).
double density_weighted_mean(const ActionGrid& grid, const std::vector<double>& pi_beta,
                             const std::vector<double>& q_pi);

// Random problem on a 401-cell grid: truncated-mixture density with an
// exact-zero region outside a random support interval, |BQ| <= r_max/(1-gamma),
// |Q_tilde| <= delta_bound, sigma below the density peak.
GridProblem random_grid_problem(Rng& rng);

struct LandscapePoint {
    double alpha = 0.0;
    uint64_t seed = 0;
    double action = 0.0;
    double objective = 0.0;
    double density = 0.0;
    double mean_reward = 0.0;
};

struct LandscapeKnobs {
    int steps = 2000;
    int grid_points = 401;
    int batch_size = 256;
    std::vector<int> hidden{256};
    Activation hidden_activation = Activation::Relu;
    double lr = 1e-3;
    double discount = 0.9;
    double beta = 1.0;   // abr lambda scale
    int reg_samples = 1; // abr M
};

// Trains the full method (actor and critics, bootstrapped targets) on a
// bandit dataset for a fixed number of gradient steps, then tabulates the
// learned objective on the action grid. The bandit is treated as a
// continuing task here so the policy's action enters the critic's target;
// that feedback is the effect the landscape is meant to expose.
// method "abr" plots Q1(s0, a); method "td3bc" plots
// lambda_n*Q1(s0,a) - alpha*mean_D|a - a_data|^2 with lambda_n = 1/mean_D|Q1|.
std::vector<LandscapePoint> run_landscape(const Dataset& ds, const BanditEnv& env,
                                          const TruncatedGaussianMixture& behavior,
                                          const std::string& method,
                                          const std::vector<double>& alphas,
                                          const std::vector<uint64_t>& seeds,
                                          const LandscapeKnobs& knobs);

struct GradDecomposition {
    std::vector<double> value_norms;   // per sample
    std::vector<double> penalty_norms; // per sample
    Gradients value_total;
    Gradients penalty_total;
};

// Splits the td3bc actor gradient into its value and behavior-penalty
// components; the two totals sum to the td3bc_actor_loss gradient.
GradDecomposition gradient_decomposition(const Batch& batch, Agent& agent, double alpha_fixed);

}  // namespace abr
