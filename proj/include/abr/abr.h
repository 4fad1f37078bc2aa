#ifndef ABR_H
#define ABR_H

/* C interface to the offline reinforcement learning engine.
 *
 * Every function returns ABR_OK on success. On failure the return value
 * distinguishes runtime errors from configuration errors and
 * abr_last_error() describes what went wrong for the calling thread.
 * Strings handed back through char** parameters are heap-allocated and
 * must be released with abr_string_free. */

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#ifndef ABR_API
#define ABR_API __attribute__((visibility("default")))
#endif

enum {
    ABR_OK = 0,
    ABR_ERR_RUNTIME = 1,
    ABR_ERR_CONFIG = 2
};

typedef struct abr_dataset abr_dataset;
typedef struct abr_policy abr_policy;

/* Message for the last failing call on this thread; never NULL. */
ABR_API const char* abr_last_error(void);

ABR_API void abr_string_free(char* s);

/* Datasets. env is "bandit" or "pointmass"; behavior is "mixture" for the
 * bandit and "expert", "medium" or "mixed" for the point mass. */
ABR_API int abr_dataset_generate(const char* env, const char* behavior, long n, uint64_t seed,
                                 abr_dataset** out);
ABR_API int abr_dataset_load(const char* path, abr_dataset** out);
ABR_API int abr_dataset_save(const abr_dataset* ds, const char* path);
ABR_API long abr_dataset_size(const abr_dataset* ds);
ABR_API void abr_dataset_free(abr_dataset* ds);

/* Policies. action_low/action_high give the action interval the network
 * was trained for; checkpoints store the network only. */
ABR_API int abr_policy_load(const char* path, double action_low, double action_high,
                            abr_policy** out);
ABR_API int abr_policy_save(const abr_policy* p, const char* path);
ABR_API int abr_policy_dims(const abr_policy* p, int* state_dim, int* action_dim);
/* Deterministic action for one state; writes action_dim doubles. */
ABR_API int abr_policy_act(const abr_policy* p, const double* state, int state_dim,
                           double* action);
ABR_API void abr_policy_free(abr_policy* p);

/* Trains on a dataset. config_json holds {"method", "seed", "train", ...}
 * with the same schema as the train command's config file minus the
 * dataset, out_dir, seeds and eval entries. */
ABR_API int abr_train(const abr_dataset* ds, const char* config_json, abr_policy** out);

/* Rolls out a policy on a named environment. refs_path may be NULL; when
 * given, the report includes a normalized score. */
ABR_API int abr_evaluate(const abr_policy* p, const char* env, int episodes, uint64_t seed,
                         const char* refs_path, char** out_json);

/* Command-level entry points mirroring the CLI subcommands. */
ABR_API int abr_cmd_gen_data(const char* env, const char* behavior, long n, uint64_t seed,
                             const char* out_path);
ABR_API int abr_cmd_train(const char* config_path);
ABR_API int abr_cmd_eval(const char* actor_path, const char* env, int episodes, uint64_t seed,
                         const char* refs_path, char** out_json);
ABR_API int abr_cmd_landscape(const char* config_path);
/* Runs the analytic self-checks. holds (if non-NULL) receives 1 when every
 * check passes. out_path may be NULL or empty to skip writing the report;
 * report_json may be NULL to skip returning it. */
ABR_API int abr_cmd_oracle_check(int problems, uint64_t seed, long long mc_draws, int param_draws,
                                 const char* out_path, int* holds, char** report_json);
ABR_API int abr_cmd_sweep(const char* config_path);
ABR_API int abr_cmd_sweep_aggregate(const char* run_dir, char** summary_csv);

#ifdef __cplusplus
}
#endif

#endif
