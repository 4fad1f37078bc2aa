#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>

#include "abr/dataset.hpp"
#include "abr/util.hpp"
#include "doctest.h"

using namespace abr;

namespace {

Dataset tiny_dataset() {
    Dataset ds;
    ds.state_dim = 2;
    ds.action_dim = 1;
    ds.action_low = {-1.0};
    ds.action_high = {1.0};
    ds.provenance = "bandit";
    ds.transitions = {
        {{0.1, -0.2}, {0.5}, 1.25, {0.0, 0.0}, true},
        {{0.0, 0.3}, {-0.125}, -2.5, {0.7, 0.1}, false},
        {{1.0, 1.0}, {0.999999999999}, 0.1234567890123456789, {0.0, -1.0}, true},
    };
    return ds;
}

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

bool throws_containing(const std::function<void()>& f, const std::string& needle) {
    try {
        f();
    } catch (const std::exception& e) {
        return std::string(e.what()).find(needle) != std::string::npos;
    }
    return false;
}

}  // namespace

TEST_CASE("datasets round trip exactly through disk") {
    const Dataset ds = tiny_dataset();
    const std::string path = temp_path("abr_test_roundtrip.jsonl");
    save_dataset(ds, path);
    const Dataset back = load_dataset(path);
    CHECK(back.state_dim == ds.state_dim);
    CHECK(back.action_dim == ds.action_dim);
    CHECK(back.action_low == ds.action_low);
    CHECK(back.action_high == ds.action_high);
    CHECK(back.provenance == ds.provenance);
    REQUIRE(back.size() == ds.size());
    for (size_t i = 0; i < ds.size(); ++i) {
        CHECK(back.transitions[i].state == ds.transitions[i].state);
        CHECK(back.transitions[i].action == ds.transitions[i].action);
        CHECK(back.transitions[i].reward == ds.transitions[i].reward);
        CHECK(back.transitions[i].next_state == ds.transitions[i].next_state);
        CHECK(back.transitions[i].done == ds.transitions[i].done);
    }

    // a second save of the loaded data is byte-identical
    const std::string path2 = temp_path("abr_test_roundtrip2.jsonl");
    save_dataset(back, path2);
    CHECK(read_text_file(path) == read_text_file(path2));
    std::remove(path.c_str());
    std::remove(path2.c_str());
}

TEST_CASE("loading rejects malformed files with located errors") {
    const Dataset ds = tiny_dataset();
    const std::string path = temp_path("abr_test_malformed.jsonl");
    save_dataset(ds, path);
    const std::string good = read_text_file(path);

    SUBCASE("unknown header key") {
        std::string bad = good;
        bad.replace(bad.find("\"action_dim\""), 12, "\"action_dmm\"");
        write_text_file(path, bad);
        CHECK(throws_containing([&] { load_dataset(path); }, "action_dmm"));
    }
    SUBCASE("unknown row key") {
        std::string bad = good;
        bad.replace(bad.find("\"reward\""), 8, "\"rewarb\"");
        write_text_file(path, bad);
        CHECK(throws_containing([&] { load_dataset(path); }, "rewarb"));
    }
    SUBCASE("count larger than rows present") {
        std::string bad = good;
        bad.replace(bad.find("\"count\":3"), 9, "\"count\":4");
        write_text_file(path, bad);
        CHECK(throws_containing([&] { load_dataset(path); }, "truncated"));
    }
    SUBCASE("garbage line") {
        write_text_file(path, good + "not json\n");
        CHECK_THROWS(load_dataset(path));
    }
    std::remove(path.c_str());
}

TEST_CASE("validate names the offending transition") {
    Dataset ds = tiny_dataset();
    ds.transitions[1].action = {2.0};  // outside the box
    CHECK(throws_containing([&] { ds.validate(); }, "transition 2"));

    Dataset ds2 = tiny_dataset();
    ds2.transitions[2].state = {1.0};  // wrong dimension
    CHECK(throws_containing([&] { ds2.validate(); }, "transition 3"));

    Dataset ds3 = tiny_dataset();
    ds3.transitions[0].reward = std::nan("");
    CHECK_THROWS(ds3.validate());
}

TEST_CASE("max_abs_reward scans every transition") {
    const Dataset ds = tiny_dataset();
    CHECK(ds.max_abs_reward() == 2.5);
}

TEST_CASE("sample_batch draws valid deterministic minibatches") {
    const Dataset ds = tiny_dataset();
    Rng a(3), b(3);
    const Batch ba = sample_batch(ds, 8, a);
    const Batch bb = sample_batch(ds, 8, b);
    CHECK(ba.size() == 8);
    CHECK(ba.states.rows == 8);
    CHECK(ba.states.cols == 2);
    CHECK(ba.actions.cols == 1);
    CHECK(ba.next_states.cols == 2);
    CHECK(ba.states.data == bb.states.data);
    CHECK(ba.rewards == bb.rewards);
    for (int i = 0; i < 8; ++i) {
        // every sampled row must be one of the dataset transitions
        bool found = false;
        for (const Transition& t : ds.transitions)
            if (t.reward == ba.rewards[i] && t.state[0] == ba.states(i, 0)) found = true;
        CHECK(found);
        CHECK((ba.done[i] == 0.0 || ba.done[i] == 1.0));
    }
}

TEST_CASE("mean_abs_q of a constant critic is the bias magnitude") {
    const Dataset ds = tiny_dataset();
    Rng rng(5);
    Mlp critic = make_mlp({3, 4, 1}, Activation::Relu, Activation::Identity, rng);
    for (Mat& w : critic.weights) w.fill(0.0);
    for (auto& b : critic.biases) std::fill(b.begin(), b.end(), 0.0);
    critic.biases.back()[0] = -2.25;
    const Batch batch = sample_batch(ds, 16, rng);
    CHECK(mean_abs_q(batch, critic) == doctest::Approx(2.25).epsilon(1e-15));
}
