#include <cstdint>
#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "abr/abr.h"

namespace {

// Exit code contract: 0 success, 1 runtime failure, 2 bad config or usage.
int report(int code) {
    if (code != ABR_OK) std::fprintf(stderr, "error: %s\n", abr_last_error());
    return code;
}

void print_and_free(char* text) {
    if (!text) return;
    std::fputs(text, stdout);
    abr_string_free(text);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Offline reinforcement learning engine with an adaptively regularized critic"};
    app.require_subcommand(1);

    auto* gen = app.add_subcommand("gen-data", "Generate an offline dataset and its sidecars");
    std::string gen_env, gen_behavior = "mixture", gen_out;
    long gen_n = 10000;
    uint64_t gen_seed = 0;
    gen->add_option("--env", gen_env, "Environment: bandit or pointmass")->required();
    gen->add_option("--behavior", gen_behavior,
                    "Behavior policy: mixture (bandit) or expert/medium/mixed (pointmass)")
        ->capture_default_str();
    gen->add_option("--n", gen_n, "Number of transitions")->capture_default_str();
    gen->add_option("--seed", gen_seed, "Generator seed")->capture_default_str();
    gen->add_option("--out", gen_out, "Output dataset path (JSONL)")->required();

    auto* train = app.add_subcommand("train", "Train one method over the configured seeds");
    std::string train_config;
    train->add_option("--config", train_config, "Training config JSON")->required();

    auto* eval = app.add_subcommand("eval", "Roll out a saved policy and report its return");
    std::string eval_actor, eval_env, eval_refs;
    int eval_episodes = 10;
    uint64_t eval_seed = 0;
    eval->add_option("--actor", eval_actor, "Policy checkpoint (actor.json)")->required();
    eval->add_option("--env", eval_env, "Environment: bandit or pointmass")->required();
    eval->add_option("--episodes", eval_episodes, "Evaluation episodes")->capture_default_str();
    eval->add_option("--seed", eval_seed, "Evaluation seed")->capture_default_str();
    eval->add_option("--refs", eval_refs, "Reference returns file for score normalization");

    auto* landscape =
        app.add_subcommand("landscape", "Trace critic values over the bandit action interval");
    std::string landscape_config;
    landscape->add_option("--config", landscape_config, "Landscape config JSON")->required();

    auto* oracle = app.add_subcommand("oracle-check",
                                      "Verify the closed-form analysis against numeric oracles");
    int oracle_problems = 1000, oracle_param_draws = 100;
    long long oracle_mc_draws = 1000000;
    uint64_t oracle_seed = 7;
    std::string oracle_out;
    oracle->add_option("--problems", oracle_problems, "Random problems per check")
        ->capture_default_str();
    oracle->add_option("--seed", oracle_seed, "Problem generator seed")->capture_default_str();
    oracle->add_option("--mc-draws", oracle_mc_draws, "Monte Carlo draws per variance check")
        ->capture_default_str();
    oracle->add_option("--param-draws", oracle_param_draws, "Parameter draws for variance checks")
        ->capture_default_str();
    oracle->add_option("--out", oracle_out, "Write the JSON report here as well");

    auto* sweep = app.add_subcommand("sweep", "Run a hyperparameter sweep or rebuild its summary");
    std::string sweep_config, sweep_aggregate;
    sweep->add_option("--config", sweep_config, "Sweep config JSON");
    sweep->add_option("--aggregate", sweep_aggregate, "Finished sweep directory to re-summarize");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (gen->parsed())
        return report(abr_cmd_gen_data(gen_env.c_str(), gen_behavior.c_str(), gen_n, gen_seed,
                                       gen_out.c_str()));
    if (train->parsed()) return report(abr_cmd_train(train_config.c_str()));
    if (eval->parsed()) {
        char* out = nullptr;
        const int code = abr_cmd_eval(eval_actor.c_str(), eval_env.c_str(), eval_episodes,
                                      eval_seed, eval_refs.empty() ? nullptr : eval_refs.c_str(),
                                      &out);
        print_and_free(out);
        return report(code);
    }
    if (landscape->parsed()) return report(abr_cmd_landscape(landscape_config.c_str()));
    if (oracle->parsed()) {
        int holds = 0;
        char* out = nullptr;
        const int code =
            abr_cmd_oracle_check(oracle_problems, oracle_seed, oracle_mc_draws, oracle_param_draws,
                                 oracle_out.empty() ? nullptr : oracle_out.c_str(), &holds, &out);
        print_and_free(out);
        if (code != ABR_OK) return report(code);
        if (!holds) std::fprintf(stderr, "error: at least one analytic check failed\n");
        return holds ? 0 : 1;
    }
    if (sweep->parsed()) {
        if (sweep_config.empty() == sweep_aggregate.empty()) {
            std::fprintf(stderr, "error: sweep needs exactly one of --config or --aggregate\n");
            return 2;
        }
        if (!sweep_config.empty()) return report(abr_cmd_sweep(sweep_config.c_str()));
        char* out = nullptr;
        const int code = abr_cmd_sweep_aggregate(sweep_aggregate.c_str(), &out);
        print_and_free(out);
        return report(code);
    }
    return 2;
}
