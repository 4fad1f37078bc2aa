#include "abr/runner.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <optional>
#include <sstream>

#include "abr/oracle.hpp"
#include "abr/util.hpp"
#include "json.hpp"

namespace abr {

namespace {

using nlohmann::json;

constexpr uint64_t kRefsSalt = 0x9E3779B97F4A7C15ULL;
constexpr uint64_t kEvalSalt = 0xE7A9D5C4B3F21A07ULL;

json parse_json_text(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(what + ": " + e.what());
    }
}

json load_config_file(const std::string& path) {
    std::string text;
    try {
        text = read_text_file(path);
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    return parse_json_text(text, path);
}

void reject_unknown(const json& j, const std::string& where,
                    std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) {
                known = true;
                break;
            }
        if (!known) throw ConfigError(where + "." + it.key() + ": unknown key");
    }
}

const json* find_key(const json& j, const char* key) {
    const auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

const json& require_key(const json& j, const std::string& where, const char* key) {
    const json* p = find_key(j, key);
    if (!p) throw ConfigError(where + "." + std::string(key) + ": missing");
    return *p;
}

double as_double(const json& j, const std::string& path) {
    if (!j.is_number()) throw ConfigError(path + ": expected a number");
    return j.get<double>();
}

long long as_integer(const json& j, const std::string& path) {
    if (!j.is_number_integer()) throw ConfigError(path + ": expected an integer");
    return j.get<long long>();
}

bool as_bool(const json& j, const std::string& path) {
    if (!j.is_boolean()) throw ConfigError(path + ": expected a boolean");
    return j.get<bool>();
}

std::string as_string(const json& j, const std::string& path) {
    if (!j.is_string()) throw ConfigError(path + ": expected a string");
    return j.get<std::string>();
}

double opt_double(const json& j, const std::string& where, const char* key, double def) {
    const json* p = find_key(j, key);
    return p ? as_double(*p, where + "." + key) : def;
}

long long opt_integer(const json& j, const std::string& where, const char* key, long long def) {
    const json* p = find_key(j, key);
    return p ? as_integer(*p, where + "." + key) : def;
}

bool opt_bool(const json& j, const std::string& where, const char* key, bool def) {
    const json* p = find_key(j, key);
    return p ? as_bool(*p, where + "." + key) : def;
}

std::vector<int> as_int_list(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) throw ConfigError(path + ": expected a nonempty array");
    std::vector<int> out;
    for (size_t i = 0; i < j.size(); ++i)
        out.push_back(static_cast<int>(as_integer(j[i], path + "[" + std::to_string(i) + "]")));
    return out;
}

std::vector<double> as_double_list(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) throw ConfigError(path + ": expected a nonempty array");
    std::vector<double> out;
    for (size_t i = 0; i < j.size(); ++i)
        out.push_back(as_double(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

std::vector<uint64_t> as_seed_list(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) throw ConfigError(path + ": expected a nonempty array");
    std::vector<uint64_t> out;
    for (size_t i = 0; i < j.size(); ++i) {
        const long long v = as_integer(j[i], path + "[" + std::to_string(i) + "]");
        if (v < 0) throw ConfigError(path + "[" + std::to_string(i) + "]: seeds must be >= 0");
        out.push_back(static_cast<uint64_t>(v));
    }
    for (size_t i = 0; i < out.size(); ++i)
        for (size_t k = i + 1; k < out.size(); ++k)
            if (out[i] == out[k]) throw ConfigError(path + ": duplicate seed " + std::to_string(out[i]));
    return out;
}

Activation parse_activation(const json& j, const std::string& path) {
    const std::string name = as_string(j, path);
    try {
        return activation_from_name(name);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

Td3Params parse_td3(const json& j, const std::string& where) {
    reject_unknown(j, where,
                   {"total_steps", "batch_size", "hidden", "hidden_activation", "lr_actor",
                    "lr_critic", "discount", "tau", "policy_noise_sd", "noise_clip",
                    "policy_delay", "clip_targets", "metrics_every"});
    Td3Params p;
    p.total_steps = as_integer(require_key(j, where, "total_steps"), where + ".total_steps");
    p.batch_size = static_cast<int>(opt_integer(j, where, "batch_size", p.batch_size));
    if (const json* h = find_key(j, "hidden")) p.hidden = as_int_list(*h, where + ".hidden");
    if (const json* a = find_key(j, "hidden_activation"))
        p.hidden_activation = parse_activation(*a, where + ".hidden_activation");
    p.lr_actor = opt_double(j, where, "lr_actor", p.lr_actor);
    p.lr_critic = opt_double(j, where, "lr_critic", p.lr_critic);
    p.discount = opt_double(j, where, "discount", p.discount);
    p.tau = opt_double(j, where, "tau", p.tau);
    p.policy_noise_sd = opt_double(j, where, "policy_noise_sd", p.policy_noise_sd);
    p.noise_clip = opt_double(j, where, "noise_clip", p.noise_clip);
    p.policy_delay = static_cast<int>(opt_integer(j, where, "policy_delay", p.policy_delay));
    p.clip_targets = opt_bool(j, where, "clip_targets", p.clip_targets);
    p.metrics_every = opt_integer(j, where, "metrics_every", p.metrics_every);
    try {
        p.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(where + ": " + e.what());
    }
    return p;
}

struct TrainSpec {
    std::string method;
    AbrConfig abr;            // carries the TD3 backbone for every method
    double alpha_fixed = 2.5; // td3bc only
};

TrainSpec parse_train_spec(const json& cfg, const std::string& where) {
    TrainSpec spec;
    spec.method = as_string(require_key(cfg, where, "method"), where + ".method");
    if (spec.method != "abr" && spec.method != "bc" && spec.method != "td3" &&
        spec.method != "td3bc")
        throw ConfigError(where + ".method: must be one of abr, bc, td3, td3bc");
    spec.abr.td3 = parse_td3(require_key(cfg, where, "train"), where + ".train");
    if (const json* a = find_key(cfg, "abr")) {
        if (spec.method != "abr") throw ConfigError(where + ".abr: only valid when method is abr");
        reject_unknown(*a, where + ".abr", {"alpha", "beta", "reg_samples"});
        spec.abr.alpha = opt_double(*a, where + ".abr", "alpha", spec.abr.alpha);
        spec.abr.beta = opt_double(*a, where + ".abr", "beta", spec.abr.beta);
        spec.abr.reg_samples =
            static_cast<int>(opt_integer(*a, where + ".abr", "reg_samples", spec.abr.reg_samples));
    }
    if (const json* t = find_key(cfg, "td3bc")) {
        if (spec.method != "td3bc")
            throw ConfigError(where + ".td3bc: only valid when method is td3bc");
        reject_unknown(*t, where + ".td3bc", {"alpha_fixed"});
        spec.alpha_fixed = opt_double(*t, where + ".td3bc", "alpha_fixed", spec.alpha_fixed);
    }
    try {
        spec.abr.validate();
        if (!(spec.alpha_fixed >= 0.0)) throw std::invalid_argument("alpha_fixed must be >= 0");
    } catch (const std::invalid_argument& e) {
        throw ConfigError(where + ": " + e.what());
    }
    return spec;
}

TrainResult run_with_seed(const Dataset& ds, const TrainSpec& spec, uint64_t seed,
                          const EvalHook* hook) {
    if (spec.method == "abr") {
        AbrConfig cfg = spec.abr;
        cfg.td3.seed = seed;
        return train_abr(ds, cfg, hook);
    }
    BaselineConfig cfg;
    cfg.method = baseline_from_name(spec.method);
    cfg.alpha_fixed = spec.alpha_fixed;
    cfg.td3 = spec.abr.td3;
    cfg.td3.seed = seed;
    return train_baseline(ds, cfg, hook);
}

struct EvalContext {
    bool enabled = false;
    EnvSpec env;
    int episodes = 5;
    bool has_refs = false;
    EvalRefs refs;
};

EvalContext parse_eval_section(const json& cfg, const std::string& where,
                               const std::string& provenance) {
    EvalContext ctx;
    const json* e = find_key(cfg, "eval");
    if (!e) return ctx;
    reject_unknown(*e, where + ".eval", {"episodes", "refs"});
    ctx.enabled = true;
    ctx.episodes = static_cast<int>(opt_integer(*e, where + ".eval", "episodes", 5));
    if (ctx.episodes < 1) throw ConfigError(where + ".eval.episodes: must be >= 1");
    try {
        ctx.env = env_spec_from_provenance(provenance);
    } catch (const std::invalid_argument& err) {
        throw ConfigError(where + ".eval: " + err.what());
    }
    if (const json* r = find_key(*e, "refs")) {
        ctx.refs = load_refs(as_string(*r, where + ".eval.refs"));
        ctx.has_refs = true;
    }
    return ctx;
}

double run_final_eval(const EvalContext& ctx, const Mlp& actor, double lo, double hi,
                      uint64_t seed) {
    auto env = make_rollout_env(ctx.env);
    Rng rng = Rng(seed ^ kEvalSalt).child(0);
    return evaluate_actor(*env, actor, lo, hi, ctx.episodes, rng);
}

void write_seed_outputs(const std::string& dir, const TrainSpec& spec, const TrainResult& result,
                        const EvalContext& eval_ctx, uint64_t seed, double wall_seconds) {
    namespace fs = std::filesystem;
    ensure_dir(dir);
    write_text_file((fs::path(dir) / "metrics.csv").string(), metrics_to_csv(result.metrics));
    save_mlp(result.agent.actor, (fs::path(dir) / "actor.json").string());
    if (spec.method != "bc") {
        save_mlp(result.agent.critic1, (fs::path(dir) / "critic1.json").string());
        save_mlp(result.agent.critic2, (fs::path(dir) / "critic2.json").string());
    }
    if (eval_ctx.enabled) {
        const double raw = run_final_eval(eval_ctx, result.agent.actor, result.agent.action_low,
                                          result.agent.action_high, seed);
        json fe;
        fe["episodes"] = eval_ctx.episodes;
        fe["raw_return"] = raw;
        fe["step"] = result.agent.step;
        if (eval_ctx.has_refs)
            fe["normalized_score"] =
                normalized_score(raw, eval_ctx.refs.random_ref, eval_ctx.refs.expert_ref);
        write_text_file((fs::path(dir) / "final_eval.json").string(), fe.dump(2) + "\n");
    }
    json meta;
    meta["wall_clock_seconds"] = wall_seconds;
    write_text_file((fs::path(dir) / "meta.json").string(), meta.dump(2) + "\n");
}

EvalHook make_train_hook(const EvalContext& ctx, uint64_t seed) {
    const EnvSpec env = ctx.env;
    const int episodes = ctx.episodes;
    return [env, episodes, seed](const Mlp& actor, double lo, double hi, long long step) {
        auto renv = make_rollout_env(env);
        Rng rng = Rng(seed ^ kEvalSalt).child(static_cast<uint64_t>(step));
        return evaluate_actor(*renv, actor, lo, hi, episodes, rng);
    };
}

}  // namespace

EvalRefs compute_refs(const EnvSpec& spec, uint64_t seed, int episodes) {
    if (episodes < 1) throw std::invalid_argument("compute_refs: episodes must be >= 1");
    EvalRefs refs;
    refs.episodes = episodes;
    auto env = make_rollout_env(spec);
    Rng root(seed);
    Rng random_rng = root.child(1);
    Rng expert_rng = root.child(2);

    double total = 0.0;
    for (int e = 0; e < episodes; ++e) {
        std::vector<double> obs = env->reset(random_rng);
        bool done = false;
        while (!done) {
            std::vector<double> a(env->action_dim());
            for (double& v : a) v = random_rng.uniform(env->action_low(), env->action_high());
            auto s = env->step(a, random_rng);
            total += s.reward;
            obs = std::move(s.obs);
            done = s.done;
        }
    }
    refs.random_ref = total / episodes;

    double best_bandit_action = 0.0;
    if (spec.kind == EnvKind::Bandit) {
        double best = -1e300;
        for (int i = 0; i <= 2000; ++i) {
            const double a = spec.bandit.action_low +
                             (spec.bandit.action_high - spec.bandit.action_low) * i / 2000.0;
            const double r = bandit_mean_reward(spec.bandit, a);
            if (r > best) {
                best = r;
                best_bandit_action = a;
            }
        }
    }
    total = 0.0;
    for (int e = 0; e < episodes; ++e) {
        std::vector<double> obs = env->reset(expert_rng);
        bool done = false;
        while (!done) {
            std::vector<double> a;
            if (spec.kind == EnvKind::Bandit) {
                a = {best_bandit_action};
            } else {
                PmState s;
                s.pos = {obs[0], obs[1]};
                s.vel = {obs[2], obs[3]};
                const auto act = expert_action(spec.pm, s);
                a = {act[0], act[1]};
            }
            auto s = env->step(a, expert_rng);
            total += s.reward;
            obs = std::move(s.obs);
            done = s.done;
        }
    }
    refs.expert_ref = total / episodes;
    return refs;
}

EvalRefs load_refs(const std::string& path) {
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const std::exception& e) {
        throw ConfigError(std::string("refs file ") + path + ": " + e.what());
    }
    reject_unknown(j, path, {"env", "episodes", "expert_ref", "random_ref"});
    EvalRefs refs;
    refs.random_ref = as_double(require_key(j, path, "random_ref"), path + ".random_ref");
    refs.expert_ref = as_double(require_key(j, path, "expert_ref"), path + ".expert_ref");
    refs.episodes = static_cast<int>(opt_integer(j, path, "episodes", 0));
    if (refs.expert_ref == refs.random_ref)
        throw ConfigError(path + ": expert_ref equals random_ref");
    return refs;
}

void cmd_gen_data(const std::string& env, const std::string& behavior, long n, uint64_t seed,
                  const std::string& out_path) {
    if (n < 1) throw ConfigError("gen-data: n must be >= 1");
    if (out_path.empty()) throw ConfigError("gen-data: out path must not be empty");
    EnvSpec spec;
    try {
        spec = make_env_spec(env_kind_from_name(env), behavior_from_name(behavior));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("gen-data: ") + e.what());
    }
    const auto t0 = std::chrono::steady_clock::now();
    const Dataset ds = generate_dataset(spec, static_cast<int>(n), seed);
    const std::string out = resolve_out_path(out_path);
    save_dataset(ds, out);

    const EvalRefs refs = compute_refs(spec, seed ^ kRefsSalt, 100);
    json rj;
    rj["env"] = env_kind_name(spec.kind);
    rj["episodes"] = refs.episodes;
    rj["expert_ref"] = refs.expert_ref;
    rj["random_ref"] = refs.random_ref;
    write_text_file(out + ".refs.json", rj.dump(2) + "\n");

    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    json meta;
    meta["wall_clock_seconds"] = dt.count();
    write_text_file(out + ".meta.json", meta.dump(2) + "\n");
}

void cmd_train(const std::string& config_path) {
    const json cfg = load_config_file(config_path);
    reject_unknown(cfg, "config",
                   {"method", "dataset", "out_dir", "seeds", "train", "abr", "td3bc", "eval"});
    const TrainSpec spec = parse_train_spec(cfg, "config");
    const std::string dataset_path =
        as_string(require_key(cfg, "config", "dataset"), "config.dataset");
    const std::string out_dir = as_string(require_key(cfg, "config", "out_dir"), "config.out_dir");
    const std::vector<uint64_t> seeds =
        as_seed_list(require_key(cfg, "config", "seeds"), "config.seeds");

    Dataset ds;
    try {
        ds = load_dataset(dataset_path);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config.dataset: ") + e.what());
    }
    const EvalContext eval_ctx = parse_eval_section(cfg, "config", ds.provenance);

    const std::string out_root = resolve_out_path(out_dir);
    for (uint64_t seed : seeds) {
        const auto t0 = std::chrono::steady_clock::now();
        TrainResult result;
        if (eval_ctx.enabled) {
            const EvalHook hook = make_train_hook(eval_ctx, seed);
            result = run_with_seed(ds, spec, seed, &hook);
        } else {
            result = run_with_seed(ds, spec, seed, nullptr);
        }
        const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
        const std::string dir =
            (std::filesystem::path(out_root) / ("seed_" + std::to_string(seed))).string();
        write_seed_outputs(dir, spec, result, eval_ctx, seed, dt.count());
    }
}

TrainResult train_from_json(const Dataset& ds, const std::string& config_text) {
    const json cfg = parse_json_text(config_text, "config");
    reject_unknown(cfg, "config", {"method", "seed", "train", "abr", "td3bc"});
    const TrainSpec spec = parse_train_spec(cfg, "config");
    const long long seed = opt_integer(cfg, "config", "seed", 0);
    if (seed < 0) throw ConfigError("config.seed: must be >= 0");
    return run_with_seed(ds, spec, static_cast<uint64_t>(seed), nullptr);
}

std::string cmd_eval(const std::string& actor_path, const std::string& env_name, int episodes,
                     uint64_t seed, const std::string& refs_path) {
    return eval_actor_json(load_mlp(actor_path), env_name, episodes, seed, refs_path);
}

std::string eval_actor_json(const Mlp& actor, const std::string& env_name, int episodes,
                            uint64_t seed, const std::string& refs_path) {
    if (episodes < 1) throw ConfigError("eval: episodes must be >= 1");
    EnvSpec spec;
    try {
        const EnvKind kind = env_kind_from_name(env_name);
        spec = make_env_spec(kind, kind == EnvKind::Bandit ? BehaviorKind::BanditMixture
                                                           : BehaviorKind::Mixed);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("eval: ") + e.what());
    }
    auto env = make_rollout_env(spec);
    if (actor.input_dim() != env->state_dim())
        throw ConfigError("eval: actor input size " + std::to_string(actor.input_dim()) +
                          " does not match state size " + std::to_string(env->state_dim()));
    if (actor.output_dim() != env->action_dim())
        throw ConfigError("eval: actor output size " + std::to_string(actor.output_dim()) +
                          " does not match action size " + std::to_string(env->action_dim()));
    Rng rng(seed);
    const double mean =
        evaluate_actor(*env, actor, env->action_low(), env->action_high(), episodes, rng);
    json out;
    out["episodes"] = episodes;
    out["mean_return"] = mean;
    if (!refs_path.empty()) {
        const EvalRefs refs = load_refs(refs_path);
        out["normalized_score"] = normalized_score(mean, refs.random_ref, refs.expert_ref);
    }
    return out.dump(2) + "\n";
}

void cmd_landscape(const std::string& config_path) {
    const json cfg = load_config_file(config_path);
    reject_unknown(cfg, "config",
                   {"method", "dataset", "out", "alphas", "seeds", "steps", "grid_points", "train",
                    "abr"});
    const std::string method = as_string(require_key(cfg, "config", "method"), "config.method");
    if (method != "abr" && method != "td3bc")
        throw ConfigError("config.method: must be abr or td3bc");
    const std::string dataset_path =
        as_string(require_key(cfg, "config", "dataset"), "config.dataset");
    const std::string out = as_string(require_key(cfg, "config", "out"), "config.out");
    const std::vector<double> alphas =
        as_double_list(require_key(cfg, "config", "alphas"), "config.alphas");
    const std::vector<uint64_t> seeds =
        as_seed_list(require_key(cfg, "config", "seeds"), "config.seeds");

    LandscapeKnobs knobs;
    knobs.steps = static_cast<int>(opt_integer(cfg, "config", "steps", knobs.steps));
    knobs.grid_points = static_cast<int>(opt_integer(cfg, "config", "grid_points", knobs.grid_points));
    if (knobs.steps < 1) throw ConfigError("config.steps: must be >= 1");
    if (knobs.grid_points < 3) throw ConfigError("config.grid_points: must be >= 3");
    if (const json* t = find_key(cfg, "train")) {
        reject_unknown(*t, "config.train",
                       {"batch_size", "hidden", "hidden_activation", "lr", "discount"});
        knobs.batch_size = static_cast<int>(opt_integer(*t, "config.train", "batch_size", knobs.batch_size));
        if (const json* h = find_key(*t, "hidden"))
            knobs.hidden = as_int_list(*h, "config.train.hidden");
        if (const json* a = find_key(*t, "hidden_activation"))
            knobs.hidden_activation = parse_activation(*a, "config.train.hidden_activation");
        knobs.lr = opt_double(*t, "config.train", "lr", knobs.lr);
        knobs.discount = opt_double(*t, "config.train", "discount", knobs.discount);
        if (!(knobs.lr > 0.0)) throw ConfigError("config.train.lr: must be positive");
        if (knobs.discount < 0.0 || knobs.discount >= 1.0)
            throw ConfigError("config.train.discount: must be in [0, 1)");
        if (knobs.batch_size < 1) throw ConfigError("config.train.batch_size: must be >= 1");
    }
    if (const json* a = find_key(cfg, "abr")) {
        if (method != "abr") throw ConfigError("config.abr: only valid when method is abr");
        reject_unknown(*a, "config.abr", {"beta", "reg_samples"});
        knobs.beta = opt_double(*a, "config.abr", "beta", knobs.beta);
        knobs.reg_samples =
            static_cast<int>(opt_integer(*a, "config.abr", "reg_samples", knobs.reg_samples));
        if (knobs.reg_samples < 1) throw ConfigError("config.abr.reg_samples: must be >= 1");
    }

    Dataset ds;
    try {
        ds = load_dataset(dataset_path);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config.dataset: ") + e.what());
    }
    EnvSpec spec;
    try {
        spec = env_spec_from_provenance(ds.provenance);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config.dataset: ") + e.what());
    }
    if (spec.kind != EnvKind::Bandit)
        throw ConfigError("config.dataset: the landscape experiment needs a bandit dataset");

    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<LandscapePoint> rows =
        run_landscape(ds, spec.bandit, spec.bandit_behavior, method, alphas, seeds, knobs);
    std::ostringstream csv;
    csv << "alpha,seed,action,objective_value,behavior_density,mean_reward\n";
    for (const LandscapePoint& r : rows)
        csv << format_double(r.alpha) << ',' << r.seed << ',' << format_double(r.action) << ','
            << format_double(r.objective) << ',' << format_double(r.density) << ','
            << format_double(r.mean_reward) << '\n';
    const std::string out_file = resolve_out_path(out);
    write_text_file(out_file, csv.str());
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    json meta;
    meta["wall_clock_seconds"] = dt.count();
    write_text_file(out_file + ".meta.json", meta.dump(2) + "\n");
}

OracleCheckOutcome cmd_oracle_check(const OracleCheckOptions& opt) {
    if (opt.problems < 1) throw ConfigError("oracle-check: problems must be >= 1");
    if (opt.param_draws < 1) throw ConfigError("oracle-check: param-draws must be >= 1");
    if (opt.mc_draws < 100) throw ConfigError("oracle-check: mc-draws must be >= 100");

    Rng root(opt.seed);
    Rng prob_rng = root.child(1);
    Rng var_rng = root.child(2);
    Rng mc_rng = root.child(3);
    Rng center_rng = root.child(4);

    double max_diff = 0.0;
    long long zero_density_cells = 0;
    int piecewise_failures = 0;
    int bias_violations = 0;
    int halving_violations = 0;
    double worst_bias_margin = 1e300; // bound - max_bias, minimized over problems
    for (int t = 0; t < opt.problems; ++t) {
        const GridProblem p = random_grid_problem(prob_rng);
        const std::vector<double> cf = closed_form_backup(p);
        const std::vector<double> om = objective_minimizer(p);
        for (size_t i = 0; i < cf.size(); ++i)
            max_diff = std::max(max_diff, std::abs(cf[i] - om[i]));

        for (size_t i = 0; i < cf.size(); ++i) {
            if (p.pi_beta[i] == 0.0) {
                ++zero_density_cells;
                if (cf[i] != p.q_tilde[i]) ++piecewise_failures;
            }
        }
        GridProblem p0 = p;
        p0.alpha = 0.0;
        const std::vector<double> cf0 = closed_form_backup(p0);
        for (size_t i = 0; i < cf0.size(); ++i)
            if (cf0[i] != p.bq[i]) ++piecewise_failures;

        const BiasCheck b = bias_bound_check(p);
        if (!b.holds) ++bias_violations;
        worst_bias_margin = std::min(worst_bias_margin, b.bound - b.max_bias);
        GridProblem ph = p;
        ph.alpha *= 0.5;
        if (bias_bound_check(ph).max_bias > b.max_bias) ++halving_violations;
    }

    double max_abs_z = 0.0;
    for (int t = 0; t < opt.param_draws; ++t) {
        const double pi = var_rng.uniform(0.05, 3.0);
        const double au = var_rng.uniform(0.005, 1.0);
        const double qp = var_rng.uniform(-5.0, 5.0);
        const double qt = var_rng.uniform(-5.0, 5.0);
        const double v = variance_y(pi, au, qp, qt);
        const double p_hi = pi / (pi + au);
        const double q_lo = au / (pi + au);
        double sum = 0.0, sum_sq = 0.0;
        for (long long n = 0; n < opt.mc_draws; ++n) {
            const double y = mc_rng.uniform01() < p_hi ? qp : qt;
            sum += y;
            sum_sq += y * y;
        }
        const double nn = static_cast<double>(opt.mc_draws);
        const double mean = sum / nn;
        const double s2 = (sum_sq - nn * mean * mean) / (nn - 1.0);
        const double d = qp - qt;
        const double mu2 = p_hi * q_lo * d * d;
        const double mu4 = p_hi * std::pow(q_lo * d, 4) + q_lo * std::pow(p_hi * d, 4);
        const double var_s2 = (mu4 - mu2 * mu2 * (nn - 3.0) / (nn - 1.0)) / nn;
        const double se = std::sqrt(std::max(var_s2, 0.0));
        const double z = se > 0.0 ? std::abs(s2 - v) / se : (s2 == v ? 0.0 : 1e300);
        max_abs_z = std::max(max_abs_z, z);
    }

    bool center_holds = true;
    const int center_problems = 20, center_alternatives = 20;
    for (int t = 0; t < center_problems; ++t) {
        const GridProblem p = random_grid_problem(center_rng);
        const double c_star = density_weighted_mean(p.grid, p.pi_beta, p.bq);
        const double base = quadratic_term(p.grid, p.pi_beta, p.bq, c_star);
        for (int j = 0; j < center_alternatives; ++j) {
            const double alt = c_star + center_rng.uniform(-10.0, 10.0);
            if (base > quadratic_term(p.grid, p.pi_beta, p.bq, alt) + 1e-12) center_holds = false;
        }
    }

    const bool equivalence_holds = max_diff <= 1e-8;
    const bool piecewise_holds = piecewise_failures == 0 && zero_density_cells > 0;
    const bool bias_holds = bias_violations == 0 && halving_violations == 0;
    const bool variance_holds = max_abs_z <= 3.0;
    const bool all =
        equivalence_holds && piecewise_holds && bias_holds && variance_holds && center_holds;

    json checks;
    checks["closed_form_equivalence"] = {{"problems", opt.problems},
                                         {"max_abs_diff", max_diff},
                                         {"tolerance", 1e-8},
                                         {"holds", equivalence_holds}};
    checks["piecewise_limits"] = {{"problems", opt.problems},
                                  {"zero_density_cells", zero_density_cells},
                                  {"failures", piecewise_failures},
                                  {"holds", piecewise_holds}};
    checks["bias_bound"] = {{"problems", opt.problems},
                            {"violations", bias_violations},
                            {"halving_violations", halving_violations},
                            {"min_margin", worst_bias_margin},
                            {"holds", bias_holds}};
    checks["variance_monte_carlo"] = {{"param_draws", opt.param_draws},
                                      {"mc_draws", opt.mc_draws},
                                      {"max_abs_z", max_abs_z},
                                      {"holds", variance_holds}};
    checks["optimal_center"] = {{"problems", center_problems},
                                {"alternatives", center_alternatives},
                                {"holds", center_holds}};
    json report;
    report["checks"] = checks;
    report["holds"] = all;

    OracleCheckOutcome out;
    out.holds = all;
    out.report_json = report.dump(2) + "\n";
    if (!opt.out_path.empty()) write_text_file(resolve_out_path(opt.out_path), out.report_json);
    return out;
}

namespace {

struct SweepPoint {
    double alpha = 0.0;
    double beta = 0.0;
    int reg_samples = 1;
    std::string dir;
};

std::string sweep_point_dir(double alpha, double beta, int m) {
    return "alpha_" + format_double(alpha) + "_beta_" + format_double(beta) + "_M_" +
           std::to_string(m);
}

}  // namespace

void cmd_sweep(const std::string& config_path) {
    const json cfg = load_config_file(config_path);
    reject_unknown(cfg, "config",
                   {"method", "dataset", "out_dir", "alphas", "betas", "reg_samples", "seeds",
                    "train", "eval"});
    const std::string method = as_string(require_key(cfg, "config", "method"), "config.method");
    if (method != "abr")
        throw ConfigError("config.method: the sweep drives the regularized method only");
    const std::string dataset_path =
        as_string(require_key(cfg, "config", "dataset"), "config.dataset");
    const std::string out_dir = as_string(require_key(cfg, "config", "out_dir"), "config.out_dir");
    const std::vector<double> alphas =
        as_double_list(require_key(cfg, "config", "alphas"), "config.alphas");
    const std::vector<double> betas =
        as_double_list(require_key(cfg, "config", "betas"), "config.betas");
    const std::vector<int> reg_samples =
        as_int_list(require_key(cfg, "config", "reg_samples"), "config.reg_samples");
    for (int m : reg_samples)
        if (m < 1) throw ConfigError("config.reg_samples: entries must be >= 1");
    const std::vector<uint64_t> seeds =
        as_seed_list(require_key(cfg, "config", "seeds"), "config.seeds");
    const Td3Params td3 = parse_td3(require_key(cfg, "config", "train"), "config.train");
    if (!find_key(cfg, "eval"))
        throw ConfigError("config.eval: missing (the sweep summary needs evaluation references)");

    Dataset ds;
    try {
        ds = load_dataset(dataset_path);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config.dataset: ") + e.what());
    }
    const EvalContext eval_ctx = parse_eval_section(cfg, "config", ds.provenance);
    if (!eval_ctx.has_refs) throw ConfigError("config.eval.refs: missing");

    const std::string out_root = resolve_out_path(out_dir);
    ensure_dir(out_root);
    json manifest;
    manifest["method"] = method;
    manifest["dataset"] = dataset_path;
    json points = json::array();
    std::vector<SweepPoint> expanded;
    for (double a : alphas)
        for (double b : betas)
            for (int m : reg_samples) {
                SweepPoint p{a, b, m, sweep_point_dir(a, b, m)};
                expanded.push_back(p);
                points.push_back({{"alpha", a}, {"beta", b}, {"reg_samples", m}, {"dir", p.dir}});
            }
    manifest["points"] = points;
    json seed_list = json::array();
    for (uint64_t s : seeds) seed_list.push_back(s);
    manifest["seeds"] = seed_list;
    write_text_file((std::filesystem::path(out_root) / "sweep_manifest.json").string(),
                    manifest.dump(2) + "\n");

    for (const SweepPoint& point : expanded) {
        TrainSpec spec;
        spec.method = "abr";
        spec.abr.td3 = td3;
        spec.abr.alpha = point.alpha;
        spec.abr.beta = point.beta;
        spec.abr.reg_samples = point.reg_samples;
        try {
            spec.abr.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("config: ") + e.what());
        }
        for (uint64_t seed : seeds) {
            const auto t0 = std::chrono::steady_clock::now();
            TrainResult result;
            const EvalHook hook = make_train_hook(eval_ctx, seed);
            result = run_with_seed(ds, spec, seed, &hook);
            const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
            const std::string dir = (std::filesystem::path(out_root) / point.dir /
                                     ("seed_" + std::to_string(seed)))
                                        .string();
            write_seed_outputs(dir, spec, result, eval_ctx, seed, dt.count());
        }
    }
    cmd_sweep_aggregate(out_root);
}

std::string cmd_sweep_aggregate(const std::string& run_dir) {
    namespace fs = std::filesystem;
    const std::string root = resolve_out_path(run_dir);
    const std::string manifest_path = (fs::path(root) / "sweep_manifest.json").string();
    json manifest;
    try {
        manifest = json::parse(read_text_file(manifest_path));
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("sweep aggregate: ") + e.what());
    }
    const std::string method = manifest.at("method").get<std::string>();
    std::ostringstream csv;
    csv << "method,alpha,beta,M,n_seeds,mean_score,sd_score\n";
    for (const json& point : manifest.at("points")) {
        const std::string dir = point.at("dir").get<std::string>();
        std::vector<double> scores;
        for (const json& seed : manifest.at("seeds")) {
            const std::string fe_path =
                (fs::path(root) / dir / ("seed_" + std::to_string(seed.get<uint64_t>())) /
                 "final_eval.json")
                    .string();
            if (!fs::exists(fe_path))
                throw std::runtime_error("sweep aggregate: missing run output " + fe_path);
            json fe;
            try {
                fe = json::parse(read_text_file(fe_path));
            } catch (const std::exception& e) {
                throw std::runtime_error(std::string("sweep aggregate: ") + e.what());
            }
            if (!fe.contains("normalized_score"))
                throw std::runtime_error("sweep aggregate: " + fe_path +
                                         " has no normalized_score");
            scores.push_back(fe.at("normalized_score").get<double>());
        }
        const auto [mean, sd] = mean_and_sample_sd(scores);
        csv << method << ',' << format_double(point.at("alpha").get<double>()) << ','
            << format_double(point.at("beta").get<double>()) << ','
            << point.at("reg_samples").get<int>() << ',' << scores.size() << ','
            << format_double(mean) << ',' << format_double(sd) << '\n';
    }
    const std::string content = csv.str();
    write_text_file((fs::path(root) / "summary.csv").string(), content);
    return content;
}

std::string metrics_to_csv(const std::vector<MetricsRow>& rows) {
    std::ostringstream out;
    out << "step,critic_loss,actor_loss,lambda,q_data,q_uniform,eval_return\n";
    for (const MetricsRow& r : rows) {
        out << r.step << ',' << format_double(r.critic_loss) << ',' << format_double(r.actor_loss)
            << ',' << format_double(r.lambda) << ',' << format_double(r.q_data) << ','
            << format_double(r.q_uniform) << ',';
        if (r.has_eval) out << format_double(r.eval_return);
        out << '\n';
    }
    return out.str();
}

std::pair<double, double> mean_and_sample_sd(const std::vector<double>& values) {
    if (values.empty()) throw std::invalid_argument("mean_and_sample_sd: empty input");
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= values.size();
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double sd = values.size() > 1 ? std::sqrt(ss / (values.size() - 1)) : 0.0;
    return {mean, sd};
}

}  // namespace abr
