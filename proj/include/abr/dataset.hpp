#pragma once

#include <string>
#include <vector>

#include "abr/mat.hpp"
#include "abr/mlp.hpp"
#include "abr/rng.hpp"

namespace abr {

struct Transition {
    std::vector<double> state;
    std::vector<double> action;
    double reward = 0.0;
    std::vector<double> next_state;
    bool done = false;
};

// Immutable offline experience. Action bounds are a uniform box.
struct Dataset {
    int state_dim = 0;
    int action_dim = 0;
    std::vector<double> action_low;
    std::vector<double> action_high;
    std::string provenance;
    std::vector<Transition> transitions;

    size_t size() const { return transitions.size(); }
    double max_abs_reward() const;
    // Throws with the offending row named on any dimension/bound violation.
    void validate() const;
};

// Header line (JSON) followed by one JSON object per transition. Doubles use
// shortest round-trip encoding, so save/load is byte-exact.
void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

struct Batch {
    Mat states;
    Mat actions;
    Mat next_states;
    std::vector<double> rewards;
    std::vector<double> done;

    int size() const { return states.rows; }
};

// Uniform with replacement; consumes exactly batch_size index draws.
Batch sample_batch(const Dataset& ds, int batch_size, Rng& rng);

// Mean |Q(s,a)| over the batch; critic takes concatenated (s,a) rows.
double mean_abs_q(const Batch& batch, const Mlp& critic);

}  // namespace abr
