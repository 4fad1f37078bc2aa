#include <cmath>
#include <vector>

#include "abr/oracle.hpp"
#include "doctest.h"

using namespace abr;

namespace {

// All cells share the same values; the grid covers [-1, 1] so u = 0.5.
GridProblem uniform_problem(double pi, double bq, double q_tilde, double alpha) {
    GridProblem p;
    p.grid = ActionGrid{};
    p.pi_beta.assign(p.grid.n_bins, pi);
    p.bq.assign(p.grid.n_bins, bq);
    p.q_tilde.assign(p.grid.n_bins, q_tilde);
    p.alpha = alpha;
    p.r_max = 10.0;
    p.gamma = 0.5;
    p.sigma = 0.1;
    p.delta_bound = 10.0;
    return p;
}

}  // namespace

TEST_CASE("action grid geometry") {
    const ActionGrid g{};
    CHECK(g.n_bins == 401);
    CHECK(g.uniform_density() == 0.5);
    CHECK(g.center(0) == doctest::Approx(-1.0 + 0.5 * g.delta()).epsilon(1e-15));
    CHECK(g.center(g.n_bins - 1) == doctest::Approx(1.0 - 0.5 * g.delta()).epsilon(1e-15));
}

TEST_CASE("the closed-form backup interpolates with weight alpha*u/(pi + alpha*u)") {
    // pi = 0.4, alpha*u = 0.4*0.5 = 0.2, w = 1/3: backup = (2/3)*1 + (1/3)*4 = 2
    const GridProblem p = uniform_problem(0.4, 1.0, 4.0, 0.4);
    const std::vector<double> q = closed_form_backup(p);
    for (double v : q) CHECK(v == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("the minimizer oracle agrees with the closed form") {
    const GridProblem p = uniform_problem(0.7, -2.5, 1.25, 0.3);
    const std::vector<double> cf = closed_form_backup(p);
    const std::vector<double> om = objective_minimizer(p);
    for (size_t i = 0; i < cf.size(); ++i)
        CHECK(std::abs(cf[i] - om[i]) <= 1e-9);
}

TEST_CASE("degenerate densities and zero alpha are reproduced bit for bit") {
    GridProblem p = uniform_problem(0.5, 0.1234567890123456, -3.25, 0.8);
    p.pi_beta[7] = 0.0;
    p.pi_beta[300] = 0.0;
    const std::vector<double> q = closed_form_backup(p);
    CHECK(q[7] == -3.25);
    CHECK(q[300] == -3.25);

    p.alpha = 0.0;
    const std::vector<double> q0 = closed_form_backup(p);
    for (size_t i = 0; i < q0.size(); ++i) CHECK(q0[i] == p.bq[i]);
}

TEST_CASE("bias stays below the density-threshold bound") {
    // per cell: |backup - BQ| = w * |q_tilde - BQ| with w = 0.05/0.85
    GridProblem p = uniform_problem(0.8, 1.5, 0.0, 0.1);
    p.r_max = 1.0;
    p.gamma = 0.5;
    p.sigma = 0.5;
    p.delta_bound = 1.0;
    const BiasCheck b = bias_bound_check(p);
    CHECK(b.max_bias == doctest::Approx((0.05 / 0.85) * 1.5).epsilon(1e-12));
    CHECK(b.bound == doctest::Approx((0.05 / 0.5) * (2.0 + 1.0)).epsilon(1e-12));
    CHECK(b.holds);

    // zero alpha means zero bias by construction
    p.alpha = 0.0;
    const BiasCheck b0 = bias_bound_check(p);
    CHECK(b0.max_bias == 0.0);
    CHECK(b0.holds);
}

TEST_CASE("bias check rejects inputs that violate its preconditions") {
    GridProblem p = uniform_problem(0.8, 5.0, 0.0, 0.1);
    p.r_max = 1.0;
    p.gamma = 0.5;  // cap is 2 but BQ is 5
    CHECK_THROWS(bias_bound_check(p));

    GridProblem p2 = uniform_problem(0.8, 1.0, 3.0, 0.1);
    p2.r_max = 1.0;
    p2.gamma = 0.5;
    p2.delta_bound = 1.0;  // |q_tilde| above delta
    CHECK_THROWS(bias_bound_check(p2));
}

TEST_CASE("halving alpha shrinks the bias on random problems") {
    Rng rng(100);
    for (int t = 0; t < 50; ++t) {
        GridProblem p = random_grid_problem(rng);
        const BiasCheck full = bias_bound_check(p);
        CHECK(full.holds);
        GridProblem half = p;
        half.alpha *= 0.5;
        CHECK(bias_bound_check(half).max_bias <= full.max_bias);
    }
}

TEST_CASE("two-point target variance has the exact product form") {
    // p = 10/11, q = 1/11, d = 3: variance = (10/121)*9
    CHECK(variance_y(0.5, 0.05, 2.0, -1.0) ==
          doctest::Approx(0.743801652892562).epsilon(1e-15));
    // symmetric in the two outcomes
    CHECK(variance_y(0.5, 0.05, -1.0, 2.0) ==
          doctest::Approx(variance_y(0.05, 0.5, 2.0, -1.0)).epsilon(1e-15));
    // equal outcomes have no spread; a zero mixture weight is rejected
    CHECK(variance_y(0.7, 0.2, 1.5, 1.5) == 0.0);
    CHECK_THROWS(variance_y(0.7, 0.0, 1.5, -0.5));
}

TEST_CASE("two-point variance matches simulation") {
    Rng rng(101);
    const double pi = 0.6, au = 0.15, qp = 2.0, qt = -1.5;
    const double expected = variance_y(pi, au, qp, qt);
    const double p_hi = pi / (pi + au);
    const int n = 400000;
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double v = rng.uniform01() < p_hi ? qp : qt;
        sum += v;
        sum_sq += v * v;
    }
    const double mean = sum / n;
    const double s2 = (sum_sq - n * mean * mean) / (n - 1.0);
    CHECK(s2 == doctest::Approx(expected).epsilon(0.02));
}

TEST_CASE("expected variance integral splits into quadratic, offset and cross terms") {
    // pi = 0.5 on [-1, 1] (mass 1), q - c = 2 and f = 1 everywhere
    const ActionGrid grid{};
    const std::vector<double> pi(grid.n_bins, 0.5);
    std::vector<double> q(grid.n_bins);
    const double c = -0.75;
    for (int i = 0; i < grid.n_bins; ++i) q[i] = c + 2.0;
    const std::vector<double> f(grid.n_bins, 1.0);
    const double alpha_u = 0.1;
    const VarianceReport r = expected_variance(grid, pi, q, f, alpha_u, c);
    // (0.1/2) * [ integral 0.5*(4 + 1 + 4) ] = 0.05 * 9 = 0.45
    CHECK(r.expectation == doctest::Approx(0.45).epsilon(1e-12));
    CHECK(r.bound == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(r.cross_term == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("the density-weighted mean minimizes the quadratic term") {
    Rng rng(102);
    const ActionGrid grid{};
    std::vector<double> pi(grid.n_bins), q(grid.n_bins);
    for (int i = 0; i < grid.n_bins; ++i) {
        pi[i] = rng.uniform01();
        q[i] = rng.uniform(-4.0, 4.0);
    }
    const double c = density_weighted_mean(grid, pi, q);
    const double best = quadratic_term(grid, pi, q, c);
    for (double shift : {-1.0, -0.1, 0.01, 0.5, 2.0})
        CHECK(best <= quadratic_term(grid, pi, q, c + shift) + 1e-12);
}

TEST_CASE("random problems satisfy their own invariants") {
    Rng rng(103);
    for (int t = 0; t < 30; ++t) {
        const GridProblem p = random_grid_problem(rng);
        REQUIRE(p.pi_beta.size() == static_cast<size_t>(p.grid.n_bins));
        double mass = 0.0, peak = 0.0;
        int zeros = 0;
        const double cap = p.r_max / (1.0 - p.gamma);
        for (int i = 0; i < p.grid.n_bins; ++i) {
            REQUIRE(p.pi_beta[i] >= 0.0);
            mass += p.pi_beta[i] * p.grid.delta();
            peak = std::max(peak, p.pi_beta[i]);
            zeros += p.pi_beta[i] == 0.0;
            REQUIRE(std::abs(p.bq[i]) <= cap);
            REQUIRE(std::abs(p.q_tilde[i]) <= p.delta_bound);
        }
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(zeros > 0);
        CHECK(p.sigma > 0.0);
        CHECK(p.sigma < peak);
        CHECK(p.alpha > 0.0);
    }
}

TEST_CASE("closed form and minimizer agree across random problems") {
    Rng rng(104);
    double worst = 0.0;
    for (int t = 0; t < 40; ++t) {
        const GridProblem p = random_grid_problem(rng);
        const std::vector<double> cf = closed_form_backup(p);
        const std::vector<double> om = objective_minimizer(p);
        for (size_t i = 0; i < cf.size(); ++i)
            worst = std::max(worst, std::abs(cf[i] - om[i]));
    }
    CHECK(worst <= 1e-8);
}

TEST_CASE("landscape rows cover the grid for every setting and seed") {
    const EnvSpec spec = make_env_spec(EnvKind::Bandit, BehaviorKind::BanditMixture);
    const Dataset ds = generate_dataset(spec, 400, 5);
    LandscapeKnobs knobs;
    knobs.steps = 40;
    knobs.grid_points = 21;
    knobs.batch_size = 32;
    knobs.hidden = {16};

    const std::vector<double> alphas{0.1, 0.4};
    const std::vector<uint64_t> seeds{0, 1};
    const auto rows = run_landscape(ds, spec.bandit, spec.bandit_behavior, "abr", alphas, seeds,
                                    knobs);
    REQUIRE(rows.size() == alphas.size() * seeds.size() * 21);
    for (const LandscapePoint& r : rows) {
        CHECK(std::isfinite(r.objective));
        CHECK(r.density >= 0.0);
        CHECK(r.action >= -1.0);
        CHECK(r.action <= 1.0);
        CHECK(r.mean_reward ==
              doctest::Approx(bandit_mean_reward(spec.bandit, r.action)).epsilon(1e-12));
    }

    // identical inputs give identical tables
    const auto rows2 = run_landscape(ds, spec.bandit, spec.bandit_behavior, "abr", alphas, seeds,
                                     knobs);
    for (size_t i = 0; i < rows.size(); ++i) CHECK(rows[i].objective == rows2[i].objective);

    const auto bc_rows = run_landscape(ds, spec.bandit, spec.bandit_behavior, "td3bc", {2.5},
                                       seeds, knobs);
    REQUIRE(bc_rows.size() == 2 * 21);
    for (const LandscapePoint& r : bc_rows) CHECK(std::isfinite(r.objective));
}
