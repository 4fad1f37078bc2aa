#pragma once

#include <functional>

#include "abr/baselines.hpp"

namespace abr {

struct MetricsRow {
    long long step = 0;
    double critic_loss = 0.0;
    double actor_loss = 0.0;
    double lambda = 0.0;
    double q_data = 0.0;
    double q_uniform = 0.0;
    bool has_eval = false;
    double eval_return = 0.0;
};

struct TrainResult {
    Agent agent;
    std::vector<MetricsRow> metrics;
};

// Called at the metrics cadence; receives the current actor and step number
// and returns a scalar return. Must be deterministic in its arguments.
using EvalHook = std::function<double(const Mlp& actor, double action_low, double action_high,
                                      long long step)>;

// Deterministic under cfg.td3.seed: same dataset and config give bit-identical
// agents and metrics. Aborts if any loss magnitude exceeds 1e8.
TrainResult train_abr(const Dataset& ds, const AbrConfig& cfg, const EvalHook* eval_hook);
TrainResult train_baseline(const Dataset& ds, const BaselineConfig& cfg, const EvalHook* eval_hook);

}  // namespace abr
