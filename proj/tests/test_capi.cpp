// Exercises the shared library strictly through its C surface.
#include <cstring>
#include <filesystem>
#include <string>

#include "abr/abr.h"
#include "doctest.h"

namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("abr_capi_" + tag);
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("null arguments are reported as config errors") {
    CHECK(abr_dataset_generate(nullptr, "mixture", 10, 0, nullptr) == ABR_ERR_CONFIG);
    CHECK(std::strlen(abr_last_error()) > 0);
    CHECK(abr_cmd_train(nullptr) == ABR_ERR_CONFIG);
    CHECK(abr_dataset_size(nullptr) == -1);
}

TEST_CASE("datasets round trip through the handle api") {
    TempDir dir("ds");
    abr_dataset* ds = nullptr;
    REQUIRE(abr_dataset_generate("bandit", "mixture", 123, 7, &ds) == ABR_OK);
    REQUIRE(ds != nullptr);
    CHECK(abr_dataset_size(ds) == 123);

    const std::string path = dir / "d.jsonl";
    CHECK(abr_dataset_save(ds, path.c_str()) == ABR_OK);
    abr_dataset* back = nullptr;
    REQUIRE(abr_dataset_load(path.c_str(), &back) == ABR_OK);
    CHECK(abr_dataset_size(back) == 123);
    abr_dataset_free(back);
    abr_dataset_free(ds);

    abr_dataset* bad = nullptr;
    CHECK(abr_dataset_generate("maze", "mixture", 10, 0, &bad) == ABR_ERR_CONFIG);
    CHECK(abr_dataset_load((dir / "missing.jsonl").c_str(), &bad) == ABR_ERR_RUNTIME);
}

TEST_CASE("training through the api yields a usable policy") {
    TempDir dir("train");
    abr_dataset* ds = nullptr;
    REQUIRE(abr_dataset_generate("bandit", "mixture", 300, 3, &ds) == ABR_OK);

    const char* cfg =
        "{\"method\": \"abr\", \"seed\": 0, "
        "\"train\": {\"total_steps\": 40, \"batch_size\": 16, \"hidden\": [8], "
        "\"metrics_every\": 40}, "
        "\"abr\": {\"alpha\": 0.15, \"beta\": 1.0, \"reg_samples\": 1}}";
    abr_policy* pol = nullptr;
    REQUIRE(abr_train(ds, cfg, &pol) == ABR_OK);
    REQUIRE(pol != nullptr);

    int sdim = 0, adim = 0;
    CHECK(abr_policy_dims(pol, &sdim, &adim) == ABR_OK);
    CHECK(sdim == 1);
    CHECK(adim == 1);

    const double state[1] = {0.0};
    double action[1] = {99.0};
    CHECK(abr_policy_act(pol, state, 1, action) == ABR_OK);
    CHECK(action[0] >= -1.0);
    CHECK(action[0] <= 1.0);
    CHECK(abr_policy_act(pol, state, 2, action) == ABR_ERR_CONFIG);

    const std::string saved = dir / "actor.json";
    CHECK(abr_policy_save(pol, saved.c_str()) == ABR_OK);
    abr_policy* loaded = nullptr;
    REQUIRE(abr_policy_load(saved.c_str(), -1.0, 1.0, &loaded) == ABR_OK);
    double action2[1] = {0.0};
    CHECK(abr_policy_act(loaded, state, 1, action2) == ABR_OK);
    CHECK(action2[0] == action[0]);

    char* report = nullptr;
    REQUIRE(abr_evaluate(pol, "bandit", 3, 5, nullptr, &report) == ABR_OK);
    REQUIRE(report != nullptr);
    CHECK(std::string(report).find("\"mean_return\"") != std::string::npos);
    abr_string_free(report);

    abr_policy_free(loaded);
    abr_policy_free(pol);

    abr_policy* bad = nullptr;
    CHECK(abr_train(ds, "{\"method\": \"abr\"}", &bad) == ABR_ERR_CONFIG);
    CHECK(abr_train(ds, "{]", &bad) == ABR_ERR_CONFIG);
    abr_dataset_free(ds);
}

TEST_CASE("command mirrors run end to end") {
    TempDir dir("cmd");
    const std::string data = dir / "d.jsonl";
    REQUIRE(abr_cmd_gen_data("bandit", "mixture", 200, 1, data.c_str()) == ABR_OK);
    CHECK(fs::exists(data + ".refs.json"));

    int holds = 0;
    char* report = nullptr;
    REQUIRE(abr_cmd_oracle_check(20, 7, 20000, 3, nullptr, &holds, &report) == ABR_OK);
    CHECK(holds == 1);
    REQUIRE(report != nullptr);
    CHECK(std::string(report).find("\"holds\": true") != std::string::npos);
    abr_string_free(report);
    CHECK(abr_cmd_oracle_check(0, 7, 20000, 3, nullptr, nullptr, nullptr) == ABR_ERR_CONFIG);

    char* out = nullptr;
    CHECK(abr_cmd_eval((dir / "nope.json").c_str(), "bandit", 2, 0, nullptr, &out) ==
          ABR_ERR_RUNTIME);
    CHECK(abr_cmd_sweep_aggregate((dir / "norun").c_str(), &out) == ABR_ERR_RUNTIME);
}
