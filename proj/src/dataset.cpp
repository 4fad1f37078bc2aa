#include "abr/dataset.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "abr/util.hpp"
#include "json.hpp"

namespace abr {

namespace {

using nlohmann::json;

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) known = true;
        if (!known) throw std::runtime_error(where + ": unexpected key \"" + it.key() + "\"");
    }
    for (const char* k : allowed)
        if (!j.contains(k)) throw std::runtime_error(where + ": missing key \"" + k + "\"");
}

}  // namespace

double Dataset::max_abs_reward() const {
    double m = 0.0;
    for (const Transition& t : transitions) m = std::max(m, std::abs(t.reward));
    return m;
}

void Dataset::validate() const {
    if (transitions.empty()) throw std::runtime_error("dataset: empty");
    if (state_dim <= 0 || action_dim <= 0) throw std::runtime_error("dataset: non-positive dims");
    if (static_cast<int>(action_low.size()) != action_dim ||
        static_cast<int>(action_high.size()) != action_dim)
        throw std::runtime_error("dataset: bound vectors do not match action_dim");
    for (size_t i = 0; i < transitions.size(); ++i) {
        const Transition& t = transitions[i];
        const std::string row = "transition " + std::to_string(i + 1);
        if (static_cast<int>(t.state.size()) != state_dim ||
            static_cast<int>(t.next_state.size()) != state_dim)
            throw std::runtime_error(row + ": state dimension mismatch");
        if (static_cast<int>(t.action.size()) != action_dim)
            throw std::runtime_error(row + ": action dimension mismatch");
        if (!std::isfinite(t.reward)) throw std::runtime_error(row + ": non-finite reward");
        for (int d = 0; d < action_dim; ++d) {
            if (!(t.action[d] >= action_low[d] && t.action[d] <= action_high[d]))
                throw std::runtime_error(row + ": action[" + std::to_string(d) + "] = " +
                                         format_double(t.action[d]) + " outside [" +
                                         format_double(action_low[d]) + ", " +
                                         format_double(action_high[d]) + "]");
        }
    }
}

void save_dataset(const Dataset& ds, const std::string& path) {
    ds.validate();
    json header;
    header["state_dim"] = ds.state_dim;
    header["action_dim"] = ds.action_dim;
    header["action_low"] = ds.action_low;
    header["action_high"] = ds.action_high;
    header["provenance"] = ds.provenance;
    header["count"] = ds.transitions.size();
    std::ostringstream out;
    out << header.dump() << '\n';
    for (const Transition& t : ds.transitions) {
        json row;
        row["state"] = t.state;
        row["action"] = t.action;
        row["reward"] = t.reward;
        row["next_state"] = t.next_state;
        row["done"] = t.done;
        out << row.dump() << '\n';
    }
    write_text_file(path, out.str());
}

Dataset load_dataset(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open: " + path);
    std::string line;
    if (!std::getline(f, line)) throw std::runtime_error(path + ": empty file");
    json header;
    try {
        header = json::parse(line);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(path + ": malformed header: " + e.what());
    }
    check_keys(header,
               {"state_dim", "action_dim", "action_low", "action_high", "provenance", "count"},
               path + ": header");
    Dataset ds;
    ds.state_dim = header.at("state_dim").get<int>();
    ds.action_dim = header.at("action_dim").get<int>();
    ds.action_low = header.at("action_low").get<std::vector<double>>();
    ds.action_high = header.at("action_high").get<std::vector<double>>();
    ds.provenance = header.at("provenance").get<std::string>();
    const size_t count = header.at("count").get<size_t>();
    size_t row = 0;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        ++row;
        const std::string where = path + ": transition " + std::to_string(row);
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw std::runtime_error(where + ": malformed JSON: " + e.what());
        }
        check_keys(j, {"state", "action", "reward", "next_state", "done"}, where);
        Transition t;
        t.state = j.at("state").get<std::vector<double>>();
        t.action = j.at("action").get<std::vector<double>>();
        t.reward = j.at("reward").get<double>();
        t.next_state = j.at("next_state").get<std::vector<double>>();
        t.done = j.at("done").get<bool>();
        ds.transitions.push_back(std::move(t));
    }
    if (ds.transitions.size() != count)
        throw std::runtime_error(path + ": header count " + std::to_string(count) +
                                 " does not match " + std::to_string(ds.transitions.size()) +
                                 " transitions (truncated file?)");
    ds.validate();
    return ds;
}

Batch sample_batch(const Dataset& ds, int batch_size, Rng& rng) {
    if (ds.transitions.empty()) throw std::runtime_error("sample_batch: empty dataset");
    if (batch_size < 1) throw std::invalid_argument("sample_batch: batch_size must be >= 1");
    Batch b;
    b.states = Mat(batch_size, ds.state_dim);
    b.actions = Mat(batch_size, ds.action_dim);
    b.next_states = Mat(batch_size, ds.state_dim);
    b.rewards.resize(batch_size);
    b.done.resize(batch_size);
    for (int i = 0; i < batch_size; ++i) {
        const Transition& t = ds.transitions[rng.below(ds.transitions.size())];
        for (int d = 0; d < ds.state_dim; ++d) {
            b.states(i, d) = t.state[d];
            b.next_states(i, d) = t.next_state[d];
        }
        for (int d = 0; d < ds.action_dim; ++d) b.actions(i, d) = t.action[d];
        b.rewards[i] = t.reward;
        b.done[i] = t.done ? 1.0 : 0.0;
    }
    return b;
}

double mean_abs_q(const Batch& batch, const Mlp& critic) {
    const Mat x = hcat(batch.states, batch.actions);
    const Mat q = forward(critic, x, nullptr);
    double s = 0.0;
    for (double v : q.data) {
        if (!std::isfinite(v)) throw std::runtime_error("mean_abs_q: non-finite critic output");
        s += std::abs(v);
    }
    return s / static_cast<double>(q.rows);
}

}  // namespace abr
