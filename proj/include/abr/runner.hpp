#pragma once

// Command-level entry points shared by the CLI and the C API.
// Config errors throw ConfigError with a dotted field path; everything
// else signals failure through std::runtime_error.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "abr/dataset.hpp"
#include "abr/envs.hpp"
#include "abr/train.hpp"

namespace abr {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Reference returns used for score normalization.
struct EvalRefs {
    double random_ref = 0.0;
    double expert_ref = 0.0;
    int episodes = 0;
};

EvalRefs compute_refs(const EnvSpec& spec, uint64_t seed, int episodes);
EvalRefs load_refs(const std::string& path);

// Writes the dataset plus <out>.refs.json and <out>.meta.json sidecars.
void cmd_gen_data(const std::string& env, const std::string& behavior, long n, uint64_t seed,
                  const std::string& out_path);

// Trains one run per seed; writes seed_<n>/ directories under out_dir.
void cmd_train(const std::string& config_path);

// Single-run training from a JSON config string; no files written.
TrainResult train_from_json(const Dataset& ds, const std::string& config_text);

// Returns the evaluation report as a JSON string.
std::string cmd_eval(const std::string& actor_path, const std::string& env_name, int episodes,
                     uint64_t seed, const std::string& refs_path);

// Same report for an already-loaded policy network.
std::string eval_actor_json(const Mlp& actor, const std::string& env_name, int episodes,
                            uint64_t seed, const std::string& refs_path);

// Writes the critic landscape CSV named by the config.
void cmd_landscape(const std::string& config_path);

struct OracleCheckOptions {
    int problems = 1000;
    uint64_t seed = 7;
    long long mc_draws = 1000000;
    int param_draws = 100;
    std::string out_path; // empty: report not written to disk
};

struct OracleCheckOutcome {
    bool holds = false;
    std::string report_json;
};

OracleCheckOutcome cmd_oracle_check(const OracleCheckOptions& opt);

// Cartesian product over alpha/beta/reg_samples/seeds; writes per-point
// run directories, sweep_manifest.json and summary.csv under out_dir.
void cmd_sweep(const std::string& config_path);

// Rebuilds summary.csv from a finished sweep directory; returns the CSV.
std::string cmd_sweep_aggregate(const std::string& run_dir);

std::string metrics_to_csv(const std::vector<MetricsRow>& rows);

// Mean and n-1 standard deviation; sd is 0 for a single value.
std::pair<double, double> mean_and_sample_sd(const std::vector<double>& values);

}  // namespace abr
