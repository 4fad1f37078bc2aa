#include "abr/abr.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "abr/agent.hpp"
#include "abr/runner.hpp"

namespace {

thread_local std::string g_last_error = "";

int fail(int code, const std::string& what) {
    g_last_error = what;
    return code;
}

// invalid_argument marks a caller mistake and maps to the config code.
template <typename F>
int guarded(F&& body) {
    try {
        body();
        return ABR_OK;
    } catch (const abr::ConfigError& e) {
        return fail(ABR_ERR_CONFIG, e.what());
    } catch (const std::invalid_argument& e) {
        return fail(ABR_ERR_CONFIG, e.what());
    } catch (const std::exception& e) {
        return fail(ABR_ERR_RUNTIME, e.what());
    } catch (...) {
        return fail(ABR_ERR_RUNTIME, "unknown error");
    }
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::runtime_error("out of memory");
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

std::string or_empty(const char* s) { return s ? std::string(s) : std::string(); }

}  // namespace

struct abr_dataset {
    abr::Dataset ds;
};

struct abr_policy {
    abr::Mlp net;
    double action_low = -1.0;
    double action_high = 1.0;
};

extern "C" {

const char* abr_last_error(void) { return g_last_error.c_str(); }

void abr_string_free(char* s) { std::free(s); }

int abr_dataset_generate(const char* env, const char* behavior, long n, uint64_t seed,
                         abr_dataset** out) {
    if (!env || !behavior || !out) return fail(ABR_ERR_CONFIG, "null argument");
    return guarded([&] {
        const abr::EnvSpec spec = abr::make_env_spec(abr::env_kind_from_name(env),
                                                     abr::behavior_from_name(behavior));
        if (n < 1) throw abr::ConfigError("n must be >= 1");
        auto* handle = new abr_dataset{abr::generate_dataset(spec, static_cast<int>(n), seed)};
        *out = handle;
    });
}

int abr_dataset_load(const char* path, abr_dataset** out) {
    if (!path || !out) return fail(ABR_ERR_CONFIG, "null argument");
    return guarded([&] { *out = new abr_dataset{abr::load_dataset(path)}; });
}

int abr_dataset_save(const abr_dataset* ds, const char* path) {
    if (!ds || !path) return fail(ABR_ERR_CONFIG, "null argument");
    return guarded([&] { abr::save_dataset(ds->ds, path); });
}

long abr_dataset_size(const abr_dataset* ds) {
    if (!ds) return -1;
    return static_cast<long>(ds->ds.size());
}

void abr_dataset_free(abr_dataset* ds) { delete ds; }

int abr_policy_load(const char* path, double action_low, double action_high, abr_policy** out) {
    if (!path || !out) return fail(ABR_ERR_CONFIG, "null argument");
    if (!(action_low < action_high))
        return fail(ABR_ERR_CONFIG, "action_low must be below action_high");
    return guarded([&] { *out = new abr_policy{abr::load_mlp(path), action_low, action_high}; });
}

int abr_policy_save(const abr_policy* p, const char* path) {
    if (!p || !path) return fail(ABR_ERR_CONFIG, "null argument");
    return guarded([&] { abr::save_mlp(p->net, path); });
}

int abr_policy_dims(const abr_policy* p, int* state_dim, int* action_dim) {
    if (!p) return fail(ABR_ERR_CONFIG, "null argument");
    if (state_dim) *state_dim = p->net.input_dim();
    if (action_dim) *action_dim = p->net.output_dim();
    return ABR_OK;
}

int abr_policy_act(const abr_policy* p, const double* state, int state_dim, double* action) {
    if (!p || !state || !action) return fail(ABR_ERR_CONFIG, "null argument");
    if (state_dim != p->net.input_dim())
        return fail(ABR_ERR_CONFIG, "state_dim does not match the policy input size");
    return guarded([&] {
        abr::Mat x(1, state_dim);
        for (int i = 0; i < state_dim; ++i) x(0, i) = state[i];
        const abr::Mat a =
            abr::actor_actions(p->net, x, p->action_low, p->action_high, nullptr);
        for (int j = 0; j < a.cols; ++j) action[j] = a(0, j);
    });
}

void abr_policy_free(abr_policy* p) { delete p; }

int abr_train(const abr_dataset* ds, const char* config_json, abr_policy** out) {
    if (!ds || !config_json || !out) return fail(ABR_ERR_CONFIG, "null argument");
    return guarded([&] {
        abr::TrainResult result = abr::train_from_json(ds->ds, config_json);
        *out = new abr_policy{std::move(result.agent.actor), result.agent.action_low,
                              result.agent.action_high};
    });
}

int abr_evaluate(const abr_policy* p, const char* env, int episodes, uint64_t seed,
                 const char* refs_path, char** out_json) {
    if (!p || !env || !out_json) return fail(ABR_ERR_CONFIG, "null argument");
    return guarded([&] {
        *out_json =
            dup_string(abr::eval_actor_json(p->net, env, episodes, seed, or_empty(refs_path)));
    });
}

int abr_cmd_gen_data(const char* env, const char* behavior, long n, uint64_t seed,
                     const char* out_path) {
    if (!env || !behavior || !out_path) return fail(ABR_ERR_CONFIG, "null argument");
    return guarded([&] { abr::cmd_gen_data(env, behavior, n, seed, out_path); });
}

int abr_cmd_train(const char* config_path) {
    if (!config_path) return fail(ABR_ERR_CONFIG, "null argument");
    return guarded([&] { abr::cmd_train(config_path); });
}

int abr_cmd_eval(const char* actor_path, const char* env, int episodes, uint64_t seed,
                 const char* refs_path, char** out_json) {
    if (!actor_path || !env || !out_json) return fail(ABR_ERR_CONFIG, "null argument");
    return guarded([&] {
        *out_json =
            dup_string(abr::cmd_eval(actor_path, env, episodes, seed, or_empty(refs_path)));
    });
}

int abr_cmd_landscape(const char* config_path) {
    if (!config_path) return fail(ABR_ERR_CONFIG, "null argument");
    return guarded([&] { abr::cmd_landscape(config_path); });
}

int abr_cmd_oracle_check(int problems, uint64_t seed, long long mc_draws, int param_draws,
                         const char* out_path, int* holds, char** report_json) {
    return guarded([&] {
        abr::OracleCheckOptions opt;
        opt.problems = problems;
        opt.seed = seed;
        opt.mc_draws = mc_draws;
        opt.param_draws = param_draws;
        opt.out_path = or_empty(out_path);
        const abr::OracleCheckOutcome outcome = abr::cmd_oracle_check(opt);
        if (holds) *holds = outcome.holds ? 1 : 0;
        if (report_json) *report_json = dup_string(outcome.report_json);
    });
}

int abr_cmd_sweep(const char* config_path) {
    if (!config_path) return fail(ABR_ERR_CONFIG, "null argument");
    return guarded([&] { abr::cmd_sweep(config_path); });
}

int abr_cmd_sweep_aggregate(const char* run_dir, char** summary_csv) {
    if (!run_dir) return fail(ABR_ERR_CONFIG, "null argument");
    return guarded([&] {
        const std::string csv = abr::cmd_sweep_aggregate(run_dir);
        if (summary_csv) *summary_csv = dup_string(csv);
    });
}

}  // extern "C"
